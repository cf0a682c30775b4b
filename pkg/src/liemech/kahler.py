"""Realified Hilbert-space geometry: metric, symplectic form, complex structure.

A complex n-dimensional state z = x + iy is realified as the 2n-vector
(x, y).  The Hermitian product is conjugate-linear in the first argument,
<X|Y> = sum conj(x_k) y_k, and splits as <X|Y> = g(X, Y) + i w(X, Y) with

    g = identity,   w = [[0, I], [-I, 0]],   J = [[0, -I], [I, 0]],

so that J is multiplication by i, J^2 = -1, and w(X, Y) = g(JX, Y), i.e.
the matrix of w is J^T g.  Projective-space geometry (affine charts, the
quotient metric, and the geodesic transition law) lives here as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def realify(psi):
    """Stack a complex vector as (real parts, imaginary parts)."""
    psi = np.asarray(psi, dtype=complex)
    return np.concatenate([psi.real, psi.imag])


def unrealify(u):
    u = np.asarray(u, dtype=float)
    if u.size % 2:
        raise ValueError("realified vector must have even length")
    n = u.size // 2
    return u[:n] + 1j * u[n:]


def realified_operator(matrix):
    """The 2n x 2n real matrix acting as the complex-linear map `matrix`."""
    matrix = np.asarray(matrix, dtype=complex)
    a, b = matrix.real, matrix.imag
    return np.block([[a, -b], [b, a]])


@dataclass(frozen=True)
class KahlerSpace:
    """Compatible (g, w, J) triple on the realification of C^n."""

    complex_dim: int

    def __post_init__(self):
        if self.complex_dim < 1:
            raise ValueError("complex_dim must be a positive integer")

    @cached_property
    def g(self):
        out = np.eye(2 * self.complex_dim)
        out.flags.writeable = False
        return out

    @cached_property
    def omega(self):
        n = self.complex_dim
        w = np.zeros((2 * n, 2 * n))
        w[:n, n:] = np.eye(n)
        w[n:, :n] = -np.eye(n)
        w.flags.writeable = False
        return w

    @cached_property
    def J(self):
        n = self.complex_dim
        j = np.zeros((2 * n, 2 * n))
        j[:n, n:] = -np.eye(n)
        j[n:, :n] = np.eye(n)
        j.flags.writeable = False
        return j

    def contravariant(self):
        """Inverse-pairing tensors (G, W) with G = g^-1 and W = -omega^-1."""
        return np.linalg.inv(self.g), -np.linalg.inv(self.omega)

    def metric(self, u, v):
        return float(np.asarray(u) @ self.g @ np.asarray(v))

    def symplectic(self, u, v):
        return float(np.asarray(u) @ self.omega @ np.asarray(v))


class QuantumState:
    """Unit-norm complex vector representing a ray.

    With normalize=True (default) the amplitudes are rescaled to unit norm;
    otherwise they must already be within 1e-12 of unit norm.
    """

    def __init__(self, amplitudes, normalize=True):
        amp = np.array(amplitudes, dtype=complex).reshape(-1)
        norm = float(np.linalg.norm(amp))
        if norm == 0.0:
            raise ValueError("quantum state must be a nonzero vector")
        if normalize:
            amp = amp / norm
        elif abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm} is not within 1e-12 of 1")
        amp.flags.writeable = False
        self.amplitudes = amp

    @property
    def dim(self):
        return self.amplitudes.size

    @property
    def realified(self):
        return realify(self.amplitudes)

    def overlap(self, other):
        """Hermitian product <self|other>, conjugate-linear in self."""
        other = as_state(other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def as_state(psi):
    return psi if isinstance(psi, QuantumState) else QuantumState(psi)


class RayProjector:
    """Rank-one Hermitian projector onto a ray."""

    def __init__(self, matrix, tol=1e-12):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("projector must be a square matrix")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValueError("projector must be Hermitian")
        if np.max(np.abs(m @ m - m)) > tol:
            raise ValueError("projector must be idempotent")
        if abs(np.trace(m).real - 1.0) > tol:
            raise ValueError("projector must have unit trace")
        m = m.copy()
        m.flags.writeable = False
        self.matrix = m

    @property
    def dim(self):
        return self.matrix.shape[0]


def ray_projector(psi):
    """Phase-invariant projector |psi><psi| / <psi|psi>."""
    psi = as_state(psi)
    return RayProjector(np.outer(psi.amplitudes, psi.amplitudes.conj()))


def hermitian_split(space, X, Y):
    """Split <X|Y> into its metric and symplectic parts.

    Returns (g_part, w_part, recombined) where recombined = g_part + i*w_part
    equals the Hermitian product.
    """
    X = as_state(X)
    Y = as_state(Y)
    if X.dim != space.complex_dim or Y.dim != space.complex_dim:
        raise ValueError("states do not match the space dimension")
    ip = X.overlap(Y)
    return ip.real, ip.imag, ip


def chart_coordinates(psi, pivot=None):
    """Affine chart of the projective space, pivoting on the largest amplitude.

    Returns (pivot index, z) with z_k = psi_k / psi_pivot over the non-pivot
    entries.  Raises on a vanishing pivot amplitude (chart singularity).
    """
    amp = as_state(psi).amplitudes
    if pivot is None:
        pivot = int(np.argmax(np.abs(amp)))
    if abs(amp[pivot]) == 0.0:
        raise ValueError("chart singularity: pivot amplitude vanishes")
    z = np.delete(amp, pivot) / amp[pivot]
    return pivot, z


def chart_embedding(pivot, z, normalized=True):
    """Inverse of chart_coordinates: the representative with amplitude 1 at the pivot."""
    z = np.asarray(z, dtype=complex)
    amp = np.insert(z, pivot, 1.0)
    if normalized:
        amp = amp / np.linalg.norm(amp)
    return amp


def fubini_study_metric(z, dz):
    """Squared line element of the quotient metric in an affine chart.

    ds^2 = [(1 + |z|^2) |dz|^2 - (conj(z).dz)(z.conj(dz))] / (1 + |z|^2)^2.
    """
    z = np.asarray(z, dtype=complex)
    dz = np.asarray(dz, dtype=complex)
    if z.shape != dz.shape:
        raise ValueError("coordinate and displacement shapes differ")
    zz = 1.0 + float(np.vdot(z, z).real)
    mixed = np.vdot(z, dz)
    val = (zz * float(np.vdot(dz, dz).real) - float(abs(mixed) ** 2)) / zz ** 2
    return float(val)


def geodesic_transition(x, y, hbar=1.0):
    """Geodesic distance between rays and the transition probability.

    Returns (gamma, prob) with prob = |<x|y>|^2 for normalized representatives
    and gamma = sqrt(2 hbar) arccos(sqrt(prob)); the pair satisfies
    cos^2(gamma / sqrt(2 hbar)) = prob by construction.
    """
    x = as_state(x)
    y = as_state(y)
    prob = float(min(1.0, abs(x.overlap(y)) ** 2))
    gamma = float(np.sqrt(2.0 * hbar) * np.arccos(np.sqrt(prob)))
    return gamma, prob
