"""Finite-rank Lie algebroids over coordinate patches.

An algebroid here is concrete numerical data over a patch of R^n: a base
dimension n, a fiber rank r, an anchor field x -> rho (n x r), and structure
functions x -> C (r x r x r), stored as C[gamma, alpha, beta] and required to
be antisymmetric in (alpha, beta).  Anchor and structure may be constant
arrays or callables of the base point; all derivatives are central finite
differences with a per-algebroid step.

Everything is immutable after construction and every operation is a pure
function of its arguments, so concurrent evaluation is safe.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass

import numpy as np

from .numdiff import DEFAULT_STEP, directional_derivative, gradient_qp, partial_derivative


class NumericalBlowupError(RuntimeError):
    """A numerical evaluation produced non-finite values."""

    def __init__(self, message, time=None, partial=None):
        super().__init__(message)
        self.time = time
        self.partial = partial


def _freeze(arr):
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


def _as_field(value, shape, what):
    """Wrap a constant array as a callable field; pass callables through."""
    if callable(value):
        return value, False
    arr = np.asarray(value, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"{what} must have shape {shape}, got {arr.shape}")
    return (lambda x, _arr=arr: _arr), True


class LieAlgebroid:
    """Anchor and structure data of a finite-rank algebroid over R^n.

    Parameters
    ----------
    base_dim : int
        Dimension n of the base patch.
    fiber_rank : int
        Rank r of the fiber.
    anchor : array or callable
        Constant (n, r) matrix or map x -> (n, r) matrix.
    structure : array or callable
        Constant (r, r, r) array or map x -> (r, r, r) array, indexed
        [gamma, alpha, beta] and antisymmetric in the last two slots.
    fd_step : float
        Central-difference step for all derivatives taken on this algebroid.
    """

    def __init__(self, base_dim, fiber_rank, anchor, structure,
                 fd_step=DEFAULT_STEP, name=""):
        base_dim = int(base_dim)
        fiber_rank = int(fiber_rank)
        if base_dim < 1:
            raise ValueError("base_dim must be a positive integer")
        if fiber_rank < 1:
            raise ValueError("fiber_rank must be a positive integer")
        self.base_dim = base_dim
        self.fiber_rank = fiber_rank
        self.fd_step = float(fd_step)
        self.name = str(name)
        self._anchor, self.anchor_is_constant = _as_field(
            anchor, (base_dim, fiber_rank), "anchor")
        # Antisymmetry of the structure functions is a sampled invariant,
        # reported by check_structure_equations rather than enforced here, so
        # corrupted tensors can be constructed and then detected.
        self._structure, self.structure_is_constant = _as_field(
            structure, (fiber_rank, fiber_rank, fiber_rank), "structure")

    def point(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.base_dim:
            raise ValueError(f"point has dimension {x.size}, expected {self.base_dim}")
        return x

    def anchor_at(self, x):
        rho = np.asarray(self._anchor(self.point(x)), dtype=float)
        if rho.shape != (self.base_dim, self.fiber_rank):
            raise ValueError(f"anchor field returned shape {rho.shape}")
        return rho

    def structure_at(self, x):
        c = np.asarray(self._structure(self.point(x)), dtype=float)
        if c.shape != (self.fiber_rank,) * 3:
            raise ValueError(f"structure field returned shape {c.shape}")
        return c

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"LieAlgebroid(n={self.base_dim}, r={self.fiber_rank}{label})"


class AlgebroidSection:
    """Section given by its fiber components over the base patch."""

    def __init__(self, components):
        if callable(components):
            self._f = components
        else:
            arr = _freeze(components)
            self._f = lambda x, _arr=arr: _arr

    def at(self, x):
        v = np.asarray(self._f(np.asarray(x, dtype=float)), dtype=float)
        if v.ndim != 1:
            raise ValueError("section components must evaluate to a vector")
        return v


class AlgebroidForm:
    """Antisymmetric fiber k-form; degree 0 is a function on the base."""

    def __init__(self, degree, components):
        degree = int(degree)
        if degree < 0:
            raise ValueError("form degree must be non-negative")
        self.degree = degree
        if callable(components):
            self._f = components
        elif degree == 0:
            val = float(components)
            self._f = lambda x, _v=val: _v
        else:
            arr = _freeze(components)
            self._f = lambda x, _arr=arr: _arr

    def at(self, x):
        val = self._f(np.asarray(x, dtype=float))
        if self.degree == 0:
            return float(val)
        arr = np.asarray(val, dtype=float)
        if arr.ndim != self.degree or len(set(arr.shape)) != 1:
            raise ValueError(f"degree-{self.degree} form must evaluate to a cubic rank-{self.degree} array")
        scale = max(1.0, float(np.max(np.abs(arr))))
        for axis in range(self.degree - 1):
            if not np.allclose(arr, -np.swapaxes(arr, axis, axis + 1), atol=1e-10 * scale):
                raise ValueError("form components are not antisymmetric")
        return arr


def as_section(s):
    return s if isinstance(s, AlgebroidSection) else AlgebroidSection(s)


def basis_sections(algebroid):
    """Constant unit sections e_1 .. e_r."""
    return [AlgebroidSection(row) for row in np.eye(algebroid.fiber_rank)]


def antisymmetrize(arr):
    """Project a tensor onto its fully antisymmetric part."""
    arr = np.asarray(arr, dtype=float)
    k = arr.ndim
    out = np.zeros_like(arr)
    for perm in itertools.permutations(range(k)):
        out += _parity(perm) * np.transpose(arr, perm)
    return out / float(_factorial(k))


def _factorial(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def _parity(perm):
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def _section_at(algebroid, s, x):
    v = as_section(s).at(x)
    if v.size != algebroid.fiber_rank:
        raise ValueError(f"section has {v.size} components, expected {algebroid.fiber_rank}")
    return v


def bracket(algebroid, s1, s2, x):
    """Bracket of two sections evaluated at a base point.

    Returns the fiber vector with components
    s1^a s2^b C^g_ab + rho(s1)(s2^g) - rho(s2)(s1^g),
    the derivative terms taken along the anchor images of the sections.
    """
    x = algebroid.point(x)
    s1 = as_section(s1)
    s2 = as_section(s2)
    v1 = _section_at(algebroid, s1, x)
    v2 = _section_at(algebroid, s2, x)
    rho = algebroid.anchor_at(x)
    c = algebroid.structure_at(x)
    out = np.einsum("gab,a,b->g", c, v1, v2)
    out = out + directional_derivative(lambda y: _section_at(algebroid, s2, y),
                                       x, rho @ v1, algebroid.fd_step)
    out = out - directional_derivative(lambda y: _section_at(algebroid, s1, y),
                                       x, rho @ v2, algebroid.fd_step)
    if not np.all(np.isfinite(out)):
        raise NumericalBlowupError("non-finite bracket value")
    return out


@dataclass(frozen=True)
class StructureReport:
    """Residuals of the two structure equations over a sample of points."""

    n_samples: int
    tol: float
    max_antisymmetry: float
    first_equation: tuple
    second_equation: tuple

    @property
    def max_first_equation(self):
        return max(self.first_equation)

    @property
    def max_second_equation(self):
        return max(self.second_equation)

    @property
    def passed(self):
        worst = max(self.max_antisymmetry, self.max_first_equation, self.max_second_equation)
        return bool(worst <= self.tol)

    def to_dict(self):
        return {
            "n_samples": self.n_samples,
            "tol": self.tol,
            "max_antisymmetry": self.max_antisymmetry,
            "max_first_equation": self.max_first_equation,
            "max_second_equation": self.max_second_equation,
            "first_equation": list(self.first_equation),
            "second_equation": list(self.second_equation),
            "passed": self.passed,
        }


def check_structure_equations(algebroid, samples, tol=1e-6):
    """Evaluate both structure-equation residuals at every sample point.

    The first equation compares anchor-image commutators against the anchor
    contracted with the structure functions; the second is the cyclic
    rho.dC + C.C sum.  Passing certifies consistency at the samples only.
    """
    samples = [algebroid.point(x) for x in samples]
    if not samples:
        raise ValueError("need at least one sample point")
    step = algebroid.fd_step
    eq1 = []
    eq2 = []
    anti = 0.0
    for x in samples:
        rho = algebroid.anchor_at(x)
        c = algebroid.structure_at(x)
        anti = max(anti, float(np.max(np.abs(c + np.swapaxes(c, 1, 2)))))
        n = algebroid.base_dim
        d_rho = np.stack([partial_derivative(algebroid.anchor_at, x, j, step)
                          for j in range(n)], axis=-1)  # (n, r, n)
        lhs = np.einsum("ja,ibj->iab", rho, d_rho) - np.einsum("jb,iaj->iab", rho, d_rho)
        rhs = np.einsum("ig,gab->iab", rho, c)
        res1 = float(np.max(np.abs(lhs - rhs)))
        d_c = np.stack([partial_derivative(algebroid.structure_at, x, i, step)
                        for i in range(n)], axis=-1)  # (r, r, r, n)
        term = (np.einsum("ia,nbgi->nabg", rho, d_c)
                + np.einsum("ib,ngai->nabg", rho, d_c)
                + np.einsum("ig,nabi->nabg", rho, d_c)
                + np.einsum("mbg,nam->nabg", c, c)
                + np.einsum("mga,nbm->nabg", c, c)
                + np.einsum("mab,ngm->nabg", c, c))
        res2 = float(np.max(np.abs(term)))
        if not (np.isfinite(res1) and np.isfinite(res2)):
            raise NumericalBlowupError("non-finite structure-equation residual")
        eq1.append(res1)
        eq2.append(res2)
    return StructureReport(len(samples), float(tol), anti, tuple(eq1), tuple(eq2))


def _contract(tensor, vectors):
    out = np.asarray(tensor, dtype=float)
    for v in vectors:
        out = np.tensordot(out, v, axes=([0], [0]))
    return float(out)


def _form_on_sections(algebroid, mu, sections, x):
    if mu.degree == 0:
        return mu.at(x)
    vals = [_section_at(algebroid, s, x) for s in sections]
    return _contract(mu.at(x), vals)


def differential(algebroid, mu, sections, x):
    """The algebroid exterior derivative of mu evaluated on degree+1 sections.

    Alternating sum of anchor-directional derivatives of the contracted form
    plus the signed bracket insertions; the sign of the bracket sum is the
    standard (-1)^(i+j), which is what makes applying this twice vanish.
    """
    k = mu.degree
    if k > algebroid.fiber_rank:
        raise ValueError("form degree exceeds fiber rank")
    sections = [as_section(s) for s in sections]
    if len(sections) != k + 1:
        raise ValueError(f"degree-{k} form needs {k + 1} sections, got {len(sections)}")
    x = algebroid.point(x)
    rho = algebroid.anchor_at(x)
    vals = [_section_at(algebroid, s, x) for s in sections]
    total = 0.0
    for i in range(k + 1):
        rest = sections[:i] + sections[i + 1:]
        fn = lambda y, _rest=rest: _form_on_sections(algebroid, mu, _rest, y)
        total += (-1.0) ** i * float(directional_derivative(fn, x, rho @ vals[i], algebroid.fd_step))
    if k > 0:
        mu_x = mu.at(x)
        for i in range(k + 1):
            for j in range(i + 1, k + 1):
                br = bracket(algebroid, sections[i], sections[j], x)
                others = [vals[m] for m in range(k + 1) if m != i and m != j]
                total += (-1.0) ** (i + j) * _contract(mu_x, [br] + others)
    if not np.isfinite(total):
        raise NumericalBlowupError("non-finite differential value")
    return total


def differential_components(algebroid, mu, x):
    """Dense components of d(mu) at x, a degree+1 antisymmetric array."""
    r = algebroid.fiber_rank
    k1 = mu.degree + 1
    basis = basis_sections(algebroid)
    out = np.zeros((r,) * k1)
    for combo in itertools.combinations(range(r), k1):
        val = differential(algebroid, mu, [basis[c] for c in combo], x)
        for perm in itertools.permutations(range(k1)):
            idx = tuple(combo[p] for p in perm)
            out[idx] = _parity(perm) * val
    return out


def _interior(algebroid, mu, s, x):
    vals = mu.at(x)
    v = _section_at(algebroid, s, x)
    out = np.tensordot(vals, v, axes=([0], [0]))
    return float(out) if mu.degree == 1 else out


def lie_derivative(algebroid, s, mu, x):
    """Lie derivative of a form along a section, by the Cartan formula.

    For 0-forms this is the anchor image of the section applied to the
    function; for higher degree it is the contraction into the derivative
    plus the derivative of the contraction, returned as dense components.
    """
    s = as_section(s)
    if mu.degree == 0:
        return differential(algebroid, mu, [s], x)
    x = algebroid.point(x)
    d_mu = differential_components(algebroid, mu, x)
    term1 = np.tensordot(d_mu, _section_at(algebroid, s, x), axes=([0], [0]))
    inner = AlgebroidForm(mu.degree - 1, lambda y: _interior(algebroid, mu, s, y))
    term2 = differential_components(algebroid, inner, x)
    return term1 + term2


def dual_poisson(algebroid, f, g, z):
    """Poisson bracket of two functions on the dual bundle at z = (q, p).

    Local form: rho^i_j (df/dq_i dg/dp_j - dg/dq_i df/dp_j)
    minus C^l_jk p_l df/dp_j dg/dp_k, with central-difference gradients.
    """
    q, p = z.q, z.p
    if q.size != algebroid.base_dim or p.size != algebroid.fiber_rank:
        raise ValueError("dual coordinates do not match the algebroid dimensions")
    step = algebroid.fd_step
    fq, fp = gradient_qp(f, q, p, step)
    gq, gp = gradient_qp(g, q, p, step)
    if not (np.all(np.isfinite(fq)) and np.all(np.isfinite(fp))
            and np.all(np.isfinite(gq)) and np.all(np.isfinite(gp))):
        raise NumericalBlowupError("non-finite gradient in dual Poisson bracket")
    rho = algebroid.anchor_at(q)
    c = algebroid.structure_at(q)
    val = float(fq @ rho @ gp - gq @ rho @ fp)
    val -= float(np.einsum("ljk,l,j,k->", c, p, fp, gp))
    return val


@dataclass(frozen=True)
class DualCoordinates:
    """Point (q, p) of the dual bundle: base coordinates and dual fiber coordinates."""

    q: np.ndarray
    p: np.ndarray

    def __init__(self, q, p):
        object.__setattr__(self, "q", _freeze(np.atleast_1d(q)))
        object.__setattr__(self, "p", _freeze(np.atleast_1d(p)))

    def as_vector(self):
        return np.concatenate([self.q, self.p])

    @staticmethod
    def from_vector(y, base_dim):
        y = np.asarray(y, dtype=float)
        return DualCoordinates(y[:base_dim], y[base_dim:])


# ---------------------------------------------------------------------------
# Built-in algebroids

def levi_civita():
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    return eps


def tangent_algebroid(n, fd_step=DEFAULT_STEP):
    """Tangent algebroid of R^n: identity anchor, vanishing structure."""
    n = int(n)
    return LieAlgebroid(n, n, np.eye(n), np.zeros((n, n, n)),
                        fd_step=fd_step, name=f"tangent-R{n}")


def lie_algebra_algebroid(structure, name="lie-algebra-point", fd_step=DEFAULT_STEP):
    """Lie algebra as an algebroid over a point.

    The point base is carried as one inert coordinate with a zero anchor, so
    dual coordinates are (q1, p1..pr) with q1 fixed by the flow.
    """
    c = np.asarray(structure, dtype=float)
    r = c.shape[0]
    return LieAlgebroid(1, r, np.zeros((1, r)), c, fd_step=fd_step, name=name)


def so3_algebroid(fd_step=DEFAULT_STEP):
    """so(3) over a point: zero anchor, Levi-Civita structure constants."""
    # C[g, a, b] = eps_abg = eps_gab by cyclic symmetry.
    return lie_algebra_algebroid(levi_civita(), name="so3-point", fd_step=fd_step)


def affine_algebroid(fd_step=DEFAULT_STEP):
    """Rank-2 algebroid over the line with a nonconstant anchor.

    Anchor rho = [1, x] on sections (e1, e2) with bracket [e1, e2] = e1,
    matching the commutator of the coordinate and scaling fields on R.
    """
    c = np.zeros((2, 2, 2))
    c[0, 0, 1] = 1.0
    c[0, 1, 0] = -1.0
    return LieAlgebroid(1, 2, lambda x: np.array([[1.0, x[0]]]), c,
                        fd_step=fd_step, name="affine-line")


_TANGENT_RE = re.compile(r"^tangent-R(\d+)$")


def named_algebroid(name, fd_step=DEFAULT_STEP):
    """Resolve a catalog name to a built-in algebroid."""
    if name == "so3-point":
        return so3_algebroid(fd_step=fd_step)
    if name == "affine-line":
        return affine_algebroid(fd_step=fd_step)
    if name == "tangent-Rn":
        return tangent_algebroid(3, fd_step=fd_step)
    m = _TANGENT_RE.match(name)
    if m:
        return tangent_algebroid(int(m.group(1)), fd_step=fd_step)
    raise ValueError(f"unknown algebroid builtin {name!r}")


_ANCHOR_NAMES = ("identity", "zero")
_STRUCTURE_NAMES = ("so3", "zero")


def algebroid_from_dict(doc, fd_step=None):
    """Build an algebroid from its JSON document form.

    Required fields: base_dim, fiber_rank, anchor, structure.  The anchor is
    a constant matrix or one of "identity"/"zero"; the structure is a dense
    array or one of "so3"/"zero".  Callable fields are code-level only.
    """
    if not isinstance(doc, dict):
        raise ValueError("algebroid document must be a JSON object")
    required = {"base_dim", "fiber_rank", "anchor", "structure"}
    allowed = required | {"name", "fd_step"}
    missing = required - set(doc)
    if missing:
        raise ValueError(f"algebroid document missing fields: {sorted(missing)}")
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"algebroid document has unknown fields: {sorted(unknown)}")
    n = int(doc["base_dim"])
    r = int(doc["fiber_rank"])
    anchor = doc["anchor"]
    if isinstance(anchor, str):
        if anchor == "identity":
            if n != r:
                raise ValueError("identity anchor requires base_dim == fiber_rank")
            anchor = np.eye(n)
        elif anchor == "zero":
            anchor = np.zeros((n, r))
        else:
            raise ValueError(f"unknown anchor builtin {anchor!r}; expected one of {_ANCHOR_NAMES}")
    structure = doc["structure"]
    if isinstance(structure, str):
        if structure == "so3":
            if r != 3:
                raise ValueError("so3 structure requires fiber_rank == 3")
            structure = levi_civita()
        elif structure == "zero":
            structure = np.zeros((r, r, r))
        else:
            raise ValueError(f"unknown structure builtin {structure!r}; expected one of {_STRUCTURE_NAMES}")
    step = fd_step if fd_step is not None else float(doc.get("fd_step", DEFAULT_STEP))
    return LieAlgebroid(n, r, anchor, structure, fd_step=step, name=doc.get("name", ""))


def load_algebroid(path):
    with open(path, "r", encoding="utf-8") as fh:
        return algebroid_from_dict(json.load(fh))
