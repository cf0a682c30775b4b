"""Operator-picture dynamics on the dual of the unitary algebra.

Anti-Hermitian elements A pair with Hermitian dual elements xi through the
trace form <xi, A> = (i/2) Tr(A xi); the correspondence A <-> iA identifies
the two sides.  States are trace-one positive functionals.  On Hermitian
operators the symmetric and antisymmetric state tensors are

    R(w)(A, B)      = Re Tr(w A B) = (1/2) Tr(w (AB + BA))
    Lambda(w)(A, B) = Im Tr(w A B) = (i/2) Tr(w (BA - AB))

so that R + i Lambda = Tr(w A B) and, through the momentum map, Lambda
pulls the realified state-space Poisson bracket back to operator space.
The flow convention matches the state picture: A(t) = U_t^dagger A U_t with
U_t = exp(-i H t / hbar), generated by dA/dt = (i/hbar)[H, A].
"""

from __future__ import annotations

import numpy as np

from .kahler import as_state
from .schrodinger import Observable, as_operator

_TOL = 1e-12


def _square(matrix, what):
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be a square matrix")
    return m


class AntiHermitianElement:
    """Element of the unitary Lie algebra: A + A^dagger = 0."""

    def __init__(self, matrix):
        m = _square(matrix, "algebra element")
        scale = max(1.0, float(np.max(np.abs(m))))
        if float(np.max(np.abs(m + m.conj().T))) > _TOL * scale:
            raise ValueError("algebra element must be anti-Hermitian")
        m = m.copy()
        m.flags.writeable = False
        self.matrix = m


class DualElement:
    """Element of the dual algebra: Hermitian matrix xi = iA."""

    def __init__(self, matrix):
        m = _square(matrix, "dual element")
        scale = max(1.0, float(np.max(np.abs(m))))
        if float(np.max(np.abs(m - m.conj().T))) > _TOL * scale:
            raise ValueError("dual element must be Hermitian")
        m = m.copy()
        m.flags.writeable = False
        self.matrix = m


class StateFunctional:
    """Positive trace-one Hermitian functional (a density matrix)."""

    def __init__(self, matrix):
        m = _square(matrix, "state functional")
        scale = max(1.0, float(np.max(np.abs(m))))
        if float(np.max(np.abs(m - m.conj().T))) > _TOL * scale:
            raise ValueError("state functional must be Hermitian")
        if abs(float(np.trace(m).real) - 1.0) > _TOL:
            raise ValueError("state functional must have unit trace")
        if float(np.min(np.linalg.eigvalsh(m))) < -_TOL:
            raise ValueError("state functional must be positive semidefinite")
        m = m.copy()
        m.flags.writeable = False
        self.matrix = m

    @property
    def dim(self):
        return self.matrix.shape[0]


def to_dual(element):
    """A -> iA, the algebra-to-dual correspondence."""
    m = element.matrix if isinstance(element, AntiHermitianElement) else _square(element, "element")
    return DualElement(1j * m)


def to_algebra(dual):
    """xi -> -i xi, inverse of the correspondence; the round trip is exact."""
    m = dual.matrix if isinstance(dual, DualElement) else _square(dual, "dual element")
    return AntiHermitianElement(-1j * m)


def _matrix(x):
    if isinstance(x, (AntiHermitianElement, DualElement, StateFunctional)):
        return x.matrix
    return as_operator(x)


def pairing(xi, A):
    """Trace pairing (i/2) Tr(A xi) of a dual element with an algebra element."""
    xi_m = _matrix(xi)
    a_m = _matrix(A)
    if xi_m.shape != a_m.shape:
        raise ValueError("pairing arguments must have matching dimensions")
    val = 0.5j * np.trace(a_m @ xi_m)
    if abs(val.imag) > 1e-12 * max(1.0, abs(val)):
        raise ValueError("pairing of dual and algebra elements should be real")
    return float(val.real)


def jordan_product(A, B):
    """Symmetrized product (AB + BA) / 2; Hermitian and commutative."""
    a, b = _matrix(A), _matrix(B)
    if a.shape != b.shape:
        raise ValueError("operands must have matching dimensions")
    return 0.5 * (a @ b + b @ a)


def lie_product(A, B, hbar=1.0):
    """Hermitian-valued bracket (i/hbar)(AB - BA); antisymmetric."""
    a, b = _matrix(A), _matrix(B)
    if a.shape != b.shape:
        raise ValueError("operands must have matching dimensions")
    return (1j / hbar) * (a @ b - b @ a)


def jordan_associator(A, B, C):
    """(A o B) o C - A o (B o C) for the symmetrized product."""
    return jordan_product(jordan_product(A, B), C) - jordan_product(A, jordan_product(B, C))


def associator_identity_residual(A, B, C, hbar=1.0):
    """Defect of the associator rule against its bracket form.

    With the products above the identity reads
    (A o B) o C - A o (B o C) = (hbar^2 / 4) {{A, C}, B}
    where {.,.} is lie_product at the same hbar; returns the max deviation.
    """
    lhs = jordan_associator(A, B, C)
    rhs = (hbar ** 2 / 4.0) * lie_product(lie_product(A, C, hbar), B, hbar)
    return float(np.max(np.abs(lhs - rhs)))


def tensor_R(w, A, B):
    """Symmetric state tensor (1/2) Tr(w (AB + BA)) = Re Tr(w A B)."""
    w_m, a, b = _matrix(w), _matrix(A), _matrix(B)
    if not (w_m.shape == a.shape == b.shape):
        raise ValueError("operands must have matching dimensions")
    return float(np.trace(w_m @ a @ b).real)


def tensor_Lambda(w, A, B):
    """Antisymmetric state tensor (i/2) Tr(w (BA - AB)) = Im Tr(w A B).

    With this orientation R + i Lambda = Tr(w A B) and the realified
    state-space bracket of expectation functions pulls back through the
    momentum map onto Lambda.
    """
    w_m, a, b = _matrix(w), _matrix(A), _matrix(B)
    if not (w_m.shape == a.shape == b.shape):
        raise ValueError("operands must have matching dimensions")
    return float(np.trace(w_m @ a @ b).imag)


def momentum_map(psi):
    """Rank-one state functional |psi><psi| / <psi|psi>."""
    psi = as_state(psi)
    return StateFunctional(np.outer(psi.amplitudes, psi.amplitudes.conj()))


def heisenberg_evolve(H, A, t, hbar=1.0):
    """Conjugated observable A(t) = U_t^dagger A U_t with U_t = exp(-iHt/hbar).

    Solves dA/dt = (i/hbar)[H, A]; Hermiticity and the spectrum are
    preserved to rounding.
    """
    H = H if isinstance(H, Observable) else Observable(H)
    a = _matrix(A)
    if a.shape != H.matrix.shape:
        raise ValueError("operands must have matching dimensions")
    phases = np.exp(-1j * H.eigenvalues * (t / hbar))
    v = H.eigenvectors
    u = (v * phases) @ v.conj().T
    evolved = u.conj().T @ a @ u
    evolved = 0.5 * (evolved + evolved.conj().T)
    return Observable(evolved)


def hamiltonian_derivation(H, A, hbar=1.0):
    """Instantaneous rate (i/hbar)[H, A]; the t-derivative of the flow at 0."""
    h, a = _matrix(H), _matrix(A)
    if h.shape != a.shape:
        raise ValueError("operands must have matching dimensions")
    return Observable((1j / hbar) * (h @ a - a @ h))
