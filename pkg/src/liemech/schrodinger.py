"""State-picture dynamics: expectation functions, the flow generator on the
realified space, unitary evolution, and Born-rule measurement.

Sign and unit conventions, fixed once and verified by the cross-picture
tests: the flow is U_t = exp(-i H t / hbar), the vector field on the
realified space is the realification of -(i/hbar) H psi, and it equals
(1/hbar) W grad(h) where W is the contravariant symplectic matrix and
h(u) = <psi|H psi> / 2.  Born probabilities are squared overlaps so they
sum to one.
"""

from __future__ import annotations

import numpy as np

from .kahler import QuantumState, as_state, realify

HERMITICITY_TOL = 1e-12
EIGEN_RESIDUAL_TOL = 1e-10


class Observable:
    """Hermitian operator with cached eigendata.

    Eigenvalues are ascending; eigenvectors are the orthonormal columns of
    the cached matrix.  The eigendecomposition residual is validated at
    construction, after which instances are immutable.
    """

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("observable must be a square matrix")
        scale = max(1.0, float(np.max(np.abs(m))))
        if float(np.max(np.abs(m - m.conj().T))) > HERMITICITY_TOL * scale:
            raise ValueError("observable must be Hermitian")
        eigenvalues, eigenvectors = np.linalg.eigh(m)
        residual = float(np.max(np.abs(m @ eigenvectors - eigenvectors * eigenvalues)))
        if residual > EIGEN_RESIDUAL_TOL * scale:
            raise ValueError(f"eigendecomposition residual {residual:.3e} too large")
        m = m.copy()
        m.flags.writeable = False
        eigenvalues.flags.writeable = False
        eigenvectors.flags.writeable = False
        self.matrix = m
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __matmul__(self, other):
        return self.matrix @ other


def as_operator(A):
    """Coerce an Observable or array to its matrix."""
    return A.matrix if isinstance(A, Observable) else np.asarray(A, dtype=complex)


def expectation(A, psi):
    """Normalized expectation value <psi|A psi> / <psi|psi>; real by Hermiticity."""
    psi = as_state(psi)
    m = as_operator(A)
    if m.shape[0] != psi.dim:
        raise ValueError("observable and state dimensions differ")
    val = complex(np.vdot(psi.amplitudes, m @ psi.amplitudes))
    if abs(val.imag) > 1e-12 * max(1.0, abs(val)):
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}")
    return val.real


def generator_function(A):
    """Half expectation as a function of realified coordinates.

    Returns h(u) = <psi_u | A psi_u> / 2 for the complex vector behind u;
    through the symplectic structure this generates the unitary flow of A.
    """
    m = as_operator(A)

    def h(u):
        u = np.asarray(u, dtype=float)
        n = u.size // 2
        psi = u[:n] + 1j * u[n:]
        return 0.5 * float(np.vdot(psi, m @ psi).real)

    return h


def schrodinger_vector_field(H, psi, hbar=1.0):
    """Realified tangent vector of the state flow: -(i/hbar) H psi."""
    psi = as_state(psi)
    m = as_operator(H)
    if m.shape[0] != psi.dim:
        raise ValueError("operator and state dimensions differ")
    return realify(-1j / hbar * (m @ psi.amplitudes))


def expectation_gradient(A, psi):
    """Gradient of the expectation value restricted to the unit sphere.

    Equals the realification of 2 (A psi - <A> psi) for a normalized state;
    it vanishes exactly at eigenvectors.
    """
    psi = as_state(psi)
    m = as_operator(A)
    mean = expectation(m, psi)
    return realify(2.0 * (m @ psi.amplitudes - mean * psi.amplitudes))


def evolve(H, psi0, t, hbar=1.0):
    """Apply U_t = exp(-i H t / hbar) through the eigendecomposition of H."""
    H = H if isinstance(H, Observable) else Observable(H)
    psi0 = as_state(psi0)
    if H.dim != psi0.dim:
        raise ValueError("operator and state dimensions differ")
    phases = np.exp(-1j * H.eigenvalues * (t / hbar))
    v = H.eigenvectors
    amp = v @ (phases * (v.conj().T @ psi0.amplitudes))
    return QuantumState(amp, normalize=False)


def measure(A, psi, degeneracy_tol=1e-10):
    """Outcome table [(eigenvalue, probability)] with squared overlaps.

    Probabilities of eigenvalues closer than degeneracy_tol (relative) are
    summed over an orthonormal basis of the shared eigenspace.
    """
    A = A if isinstance(A, Observable) else Observable(A)
    psi = as_state(psi)
    if A.dim != psi.dim:
        raise ValueError("observable and state dimensions differ")
    overlaps = A.eigenvectors.conj().T @ psi.amplitudes
    probs = np.abs(overlaps) ** 2
    scale = max(1.0, float(np.max(np.abs(A.eigenvalues))))
    outcomes = []
    i = 0
    vals = A.eigenvalues
    while i < vals.size:
        j = i + 1
        while j < vals.size and abs(vals[j] - vals[i]) <= degeneracy_tol * scale:
            j += 1
        outcomes.append((float(np.mean(vals[i:j])), float(np.sum(probs[i:j]))))
        i = j
    total = sum(p for _, p in outcomes)
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"probabilities sum to {total}, not 1")
    return outcomes
