"""Prolongation of an algebroid over its dual bundle.

The induced frame at a dual point z = (q, p) has r "horizontal" elements,
whose tangent parts are the anchor columns, and r vertical elements along
the dual fiber directions.  Coefficient vectors in this frame are ordered
(horizontal block, vertical block), giving 2r-dimensional arrays; the
canonical two-section is the 2r x 2r matrix of the frame pairings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebroids import (AlgebroidForm, DualCoordinates, LieAlgebroid,
                         NumericalBlowupError, differential_components)
from .numdiff import gradient_qp

COMPAT_TOL = 1e-10


class ProlongationPoint:
    """Element (a, b, v) of the prolongation fiber over a dual point.

    The base point a is a DualCoordinates value, b is a fiber vector, and v
    is a tangent vector at a whose base part must equal the anchor image of
    b; construction rejects incompatible data.
    """

    def __init__(self, algebroid, base, fiber_b, tangent_v, tol=COMPAT_TOL):
        n, r = algebroid.base_dim, algebroid.fiber_rank
        fiber_b = np.asarray(fiber_b, dtype=float)
        tangent_v = np.asarray(tangent_v, dtype=float)
        if fiber_b.shape != (r,):
            raise ValueError(f"fiber component must have length {r}")
        if tangent_v.shape != (n + r,):
            raise ValueError(f"tangent component must have length {n + r}")
        rho = algebroid.anchor_at(base.q)
        residual = float(np.max(np.abs(rho @ fiber_b - tangent_v[:n]))) if n else 0.0
        if residual > tol:
            raise ValueError(f"incompatible prolongation point: anchor/tangent residual {residual:.3e}")
        self.algebroid = algebroid
        self.base = base
        self.fiber_b = fiber_b
        self.tangent_v = tangent_v
        self.compatibility_residual = residual

    # Projections onto the three factors and the first pair.
    @property
    def projection_base(self):
        return self.base

    @property
    def projection_fiber(self):
        return self.fiber_b

    @property
    def projection_tangent(self):
        return self.tangent_v

    @property
    def projection_pair(self):
        return (self.base, self.fiber_b)


@dataclass(frozen=True)
class ProlongationBasis:
    """Frame at a dual point: horizontal elements X and vertical elements V."""

    X: tuple
    V: tuple


@dataclass(frozen=True)
class SymplecticSectionData:
    """Canonical one-section coefficients and two-section matrix at a point."""

    theta0: np.ndarray
    omega0: np.ndarray


def prolongation_basis(algebroid, z):
    n, r = algebroid.base_dim, algebroid.fiber_rank
    rho = algebroid.anchor_at(z.q)
    eye = np.eye(r)
    X = tuple(ProlongationPoint(algebroid, z, eye[a],
                                np.concatenate([rho[:, a], np.zeros(r)]))
              for a in range(r))
    V = tuple(ProlongationPoint(algebroid, z, np.zeros(r),
                                np.concatenate([np.zeros(n), eye[a]]))
              for a in range(r))
    return ProlongationBasis(X, V)


def liouville(algebroid, z):
    """Coefficients of the canonical one-section in the horizontal coframe.

    Pairing these coefficients with the fiber part of any prolongation point
    reproduces the dual pairing p . b.
    """
    if z.p.size != algebroid.fiber_rank or z.q.size != algebroid.base_dim:
        raise ValueError("dual coordinates do not match the algebroid dimensions")
    return z.p.copy()


def liouville_pairing(algebroid, z, point):
    return float(liouville(algebroid, z) @ point.fiber_b)


def canonical_two_form(algebroid, z):
    """Canonical two-section at z in the (horizontal, vertical) frame.

    Blocks: horizontal/horizontal entries are p_k C^k_ij, the mixed block is
    the identity pairing, and vertical/vertical vanishes.  The returned
    matrix is antisymmetrized exactly and checked for non-degeneracy.
    """
    r = algebroid.fiber_rank
    theta0 = liouville(algebroid, z)
    c = algebroid.structure_at(z.q)
    pc = np.einsum("kij,k->ij", c, z.p)
    pc = 0.5 * (pc - pc.T)
    omega = np.zeros((2 * r, 2 * r))
    omega[:r, :r] = pc
    omega[:r, r:] = np.eye(r)
    omega[r:, :r] = -np.eye(r)
    det = abs(float(np.linalg.det(omega)))
    if det < 1e-8:
        raise NumericalBlowupError(f"degenerate two-section (|det| = {det:.3e})")
    return SymplecticSectionData(theta0, omega)


def hamiltonian_section(algebroid, hamiltonian, z):
    """Coefficients of the section solving the contraction identity for H.

    Horizontal block: dH/dp.  Vertical block: -(rho^T dH/dq + p_k C^k_ij dH/dp_j).
    Contracting the returned coefficients into the canonical two-section
    reproduces the frame components of dH.
    """
    dq, dp = gradient_qp(hamiltonian, z.q, z.p, algebroid.fd_step)
    if not (np.all(np.isfinite(dq)) and np.all(np.isfinite(dp))):
        raise NumericalBlowupError("non-finite Hamiltonian gradient")
    rho = algebroid.anchor_at(z.q)
    c = algebroid.structure_at(z.q)
    pc = np.einsum("kij,k->ij", c, z.p)
    return np.concatenate([dp, -(rho.T @ dq + pc @ dp)])


def anchor_vector_field(algebroid, hamiltonian, z):
    """Anchor image of the Hamiltonian section: (dq/dt, dp/dt) at z."""
    dq, dp = gradient_qp(hamiltonian, z.q, z.p, algebroid.fd_step)
    if not (np.all(np.isfinite(dq)) and np.all(np.isfinite(dp))):
        raise NumericalBlowupError("non-finite Hamiltonian gradient")
    rho = algebroid.anchor_at(z.q)
    c = algebroid.structure_at(z.q)
    pc = np.einsum("kij,k->ij", c, z.p)
    return np.concatenate([rho @ dp, -(rho.T @ dq) - pc @ dp])


def differential_of_function(algebroid, hamiltonian, z):
    """Frame components of dH at z: (rho^T dH/dq, dH/dp)."""
    dq, dp = gradient_qp(hamiltonian, z.q, z.p, algebroid.fd_step)
    rho = algebroid.anchor_at(z.q)
    return np.concatenate([rho.T @ dq, dp])


def interior_product(coefficients, omega0):
    """Contraction of a frame section into a two-section matrix, as a coframe row."""
    coefficients = np.asarray(coefficients, dtype=float)
    return coefficients @ omega0


def symplectic_poisson(algebroid, f, g, z):
    """Function bracket built from the canonical two-section.

    Evaluates the two-section on the Hamiltonian sections of f and g; this
    agrees with the local dual-bundle bracket formula.
    """
    omega = canonical_two_form(algebroid, z).omega0
    sf = hamiltonian_section(algebroid, f, z)
    sg = hamiltonian_section(algebroid, g, z)
    return float(sf @ omega @ sg)


def prolongation_algebroid(algebroid):
    """The prolongation as an algebroid over the dual bundle.

    Base coordinates are (q, p); the anchor sends the horizontal frame to
    the anchor columns in the q-directions and the vertical frame to the
    p-directions, with structure functions supported on the horizontal block.
    """
    n, r = algebroid.base_dim, algebroid.fiber_rank

    def anchor(y):
        out = np.zeros((n + r, 2 * r))
        out[:n, :r] = algebroid.anchor_at(y[:n])
        out[n:, r:] = np.eye(r)
        return out

    def structure(y):
        out = np.zeros((2 * r,) * 3)
        out[:r, :r, :r] = algebroid.structure_at(y[:n])
        return out

    name = f"{algebroid.name}-prolongation" if algebroid.name else "prolongation"
    return LieAlgebroid(n + r, 2 * r, anchor, structure,
                        fd_step=algebroid.fd_step, name=name)


def two_form_closedness_residual(algebroid, z):
    """Max component of the exterior derivative of the canonical two-section."""
    n = algebroid.base_dim
    prol = prolongation_algebroid(algebroid)
    form = AlgebroidForm(
        2, lambda y: canonical_two_form(algebroid, DualCoordinates.from_vector(y, n)).omega0)
    d = differential_components(prol, form, z.as_vector())
    return float(np.max(np.abs(d)))
