"""Cross-picture and inequality verification.

The two dynamics engines are built on separate code paths (state evolution
through the propagator versus operator conjugation), so their expectation
values agreeing over a time grid is itself the oracle.  The variance
inequality is checked in its operator form, and its geometric right-hand
side is assembled independently from the realified metric and symplectic
tensors acting on finite-difference gradients of the quadratic generator
functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kahler import KahlerSpace, as_state
from .numdiff import gradient
from .schrodinger import (as_operator, evolve, expectation, generator_function)
from .heisenberg import heisenberg_evolve, jordan_product


def random_hermitian(rng, n, scale=1.0):
    """Hermitian part of a complex Gaussian matrix (rotation-invariant ensemble)."""
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (m + m.conj().T)


def random_state(rng, n):
    """Normalized complex Gaussian vector."""
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return as_state(v)


@dataclass(frozen=True)
class EquivalenceReport:
    """Per-time deviation of the two pictures' expectation values."""

    times: np.ndarray
    state_picture: np.ndarray
    operator_picture: np.ndarray
    deviations: np.ndarray
    max_deviation: float
    tolerance: float
    passed: bool
    descriptor: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "descriptor": dict(self.descriptor),
            "times": [float(t) for t in self.times],
            "state_picture": [float(v) for v in self.state_picture],
            "operator_picture": [float(v) for v in self.operator_picture],
            "deviations": [float(v) for v in self.deviations],
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def check_equivalence(H, A, psi0, grid, hbar=1.0, tol=1e-9, descriptor=None):
    """Compare <psi_t|A|psi_t> against <psi_0|A(t)|psi_0> over a time grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("time grid must be non-empty")
    psi0 = as_state(psi0)
    if as_operator(H).shape[0] != psi0.dim or as_operator(A).shape[0] != psi0.dim:
        raise ValueError("operator and state dimensions differ")
    state_vals = np.empty(grid.size)
    oper_vals = np.empty(grid.size)
    for k, t in enumerate(grid):
        state_vals[k] = expectation(A, evolve(H, psi0, t, hbar=hbar))
        oper_vals[k] = expectation(heisenberg_evolve(H, A, t, hbar=hbar), psi0)
    deviations = np.abs(state_vals - oper_vals)
    max_dev = float(np.max(deviations))
    return EquivalenceReport(grid, state_vals, oper_vals, deviations, max_dev,
                             float(tol), bool(max_dev <= tol),
                             descriptor or {})


@dataclass(frozen=True)
class UncertaintySample:
    """One evaluation of the variance inequality: lhs >= rhs with slack = lhs - rhs."""

    lhs: float
    rhs: float
    slack: float

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack}


@dataclass(frozen=True)
class UncertaintyReport:
    samples: tuple
    min_slack: float
    tolerance: float
    passed: bool

    @staticmethod
    def from_samples(samples, tolerance=-1e-10):
        min_slack = min(s.slack for s in samples)
        return UncertaintyReport(tuple(samples), float(min_slack), float(tolerance),
                                 bool(min_slack >= tolerance))

    def to_dict(self):
        return {
            "samples": [s.to_dict() for s in self.samples],
            "min_slack": self.min_slack,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def check_uncertainty(A, B, psi, hbar=1.0):
    """Variance-product inequality for two observables in a given state.

    lhs is the product of variances; rhs is the squared expectation of the
    (1/2i)-commutator plus the squared expectation of the symmetrized
    product of the centered operators.
    """
    a, b = as_operator(A), as_operator(B)
    psi = as_state(psi)
    mean_a = expectation(a, psi)
    mean_b = expectation(b, psi)
    var_a = expectation(a @ a, psi) - mean_a ** 2
    var_b = expectation(b @ b, psi) - mean_b ** 2
    lhs = var_a * var_b
    eye = np.eye(a.shape[0])
    da = a - mean_a * eye
    db = b - mean_b * eye
    comm = (a @ b - b @ a) / 2j
    rhs = expectation(comm, psi) ** 2 + expectation(jordan_product(da, db), psi) ** 2
    return UncertaintySample(float(lhs), float(rhs), float(lhs - rhs))


def geometric_uncertainty_rhs(A, B, psi, step=1e-5):
    """Right-hand side rebuilt from the realified tensors.

    Squares the symplectic pairing of the generator-function gradients and
    the metric pairing minus the product of means; agrees with the operator
    form of check_uncertainty under the half-expectation scaling.
    """
    psi = as_state(psi)
    space = KahlerSpace(psi.dim)
    G, W = space.contravariant()
    u = psi.realified
    grad_a = gradient(generator_function(A), u, step)
    grad_b = gradient(generator_function(B), u, step)
    omega_term = float(grad_a @ W @ grad_b)
    g_term = float(grad_a @ G @ grad_b) - expectation(A, psi) * expectation(B, psi)
    return omega_term ** 2 + g_term ** 2


def check_quadratic_identities(A, B, psi, step=1e-5):
    """Residuals of the metric and symplectic quadratic-function identities.

    The metric tensor on the generator-function gradients should equal the
    expectation of the symmetrized product, and the symplectic tensor the
    expectation of the (1/2i)-commutator; both sides are computed on
    independent code paths (finite differences versus operator algebra).
    """
    a, b = as_operator(A), as_operator(B)
    psi = as_state(psi)
    space = KahlerSpace(psi.dim)
    G, W = space.contravariant()
    u = psi.realified
    grad_a = gradient(generator_function(a), u, step)
    grad_b = gradient(generator_function(b), u, step)
    g_residual = abs(float(grad_a @ G @ grad_b) - expectation(jordan_product(a, b), psi))
    comm = (a @ b - b @ a) / 2j
    omega_residual = abs(float(grad_a @ W @ grad_b) - expectation(comm, psi))
    return g_residual, omega_residual
