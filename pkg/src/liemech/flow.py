"""Fixed-step time integration of the algebroid Hamilton equations.

Implicit midpoint is the default method: it is symplectic on the canonical
case and preserves quadratic invariants (energy of quadratic Hamiltonians,
Casimirs like |p|^2) up to the fixed-point solve tolerance.  Classical RK4
is provided for oracle duty.  Steps are fixed so runs are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .algebroids import DualCoordinates, NumericalBlowupError, check_structure_equations
from .prolongation import anchor_vector_field

METHODS = ("implicit-midpoint", "rk4")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "implicit-midpoint"
    step: float = 1e-3
    t_final: float = 1.0
    fixed_point_tol: float = 1e-12
    max_fixed_point_iter: int = 50

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.step > 0.0:
            raise ValueError("step must be positive")
        if self.t_final < self.step:
            raise ValueError("t_final must be at least one step")


class CasimirHandle:
    """Registration handle; remove() deregisters the function."""

    def __init__(self, registry, name):
        self.registry = registry
        self.name = name

    def remove(self):
        self.registry.remove(self.name)


class CasimirRegistry:
    """Named conserved-quantity functions sampled into trajectory ledgers."""

    def __init__(self):
        self._fns = {}

    def register(self, name, f):
        if name in self._fns:
            raise ValueError(f"casimir {name!r} already registered")
        self._fns[name] = f
        return CasimirHandle(self, name)

    def remove(self, name):
        self._fns.pop(name, None)

    def items(self):
        return list(self._fns.items())

    def __len__(self):
        return len(self._fns)


DEFAULT_CASIMIRS = CasimirRegistry()


def register_casimir(name, f):
    """Register f(q, p) into the default registry used by integrate()."""
    return DEFAULT_CASIMIRS.register(name, f)


class Trajectory:
    """Time grid, states, and the ledger of conserved-quantity samples."""

    def __init__(self, times, qs, ps, ledger):
        times = np.asarray(times, dtype=float)
        qs = np.asarray(qs, dtype=float)
        ps = np.asarray(ps, dtype=float)
        if times.ndim != 1 or np.any(np.diff(times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if qs.shape[0] != times.size or ps.shape[0] != times.size:
            raise ValueError("state count must match the time grid")
        self.times = times
        self.qs = qs
        self.ps = ps
        self.ledger = {name: np.asarray(vals, dtype=float) for name, vals in ledger.items()}
        for name, vals in self.ledger.items():
            if vals.shape != times.shape:
                raise ValueError(f"ledger column {name!r} does not match the time grid")

    def __len__(self):
        return self.times.size

    def state(self, i):
        return DualCoordinates(self.qs[i], self.ps[i])

    @property
    def header(self):
        n, r = self.qs.shape[1], self.ps.shape[1]
        return (["t"] + [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(r)]
                + list(self.ledger))

    def column(self, name):
        if name == "t":
            return self.times
        if name in self.ledger:
            return self.ledger[name]
        if name.startswith("q") and name[1:].isdigit() and int(name[1:]) <= self.qs.shape[1]:
            return self.qs[:, int(name[1:]) - 1]
        if name.startswith("p") and name[1:].isdigit() and int(name[1:]) <= self.ps.shape[1]:
            return self.ps[:, int(name[1:]) - 1]
        raise KeyError(name)

    def rows(self):
        cols = [self.column(name) for name in self.header]
        for i in range(self.times.size):
            yield [col[i] for col in cols]

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(self.header) + "\n")
            for row in self.rows():
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

    def to_json(self, path):
        doc = {name: [float(v) for v in self.column(name)] for name in self.header}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _midpoint_step(f, t, y, h, tol, max_iter):
    y_new = y + h * f(t, y)
    for _ in range(max_iter):
        y_next = y + h * f(t + 0.5 * h, 0.5 * (y + y_new))
        delta = float(np.max(np.abs(y_next - y_new)))
        y_new = y_next
        if delta <= tol:
            return y_new
    raise NumericalBlowupError("implicit midpoint fixed point did not converge", time=t)


def _step_plan(step, t_final):
    n_full = int(np.floor(t_final / step + 1e-12))
    remainder = t_final - n_full * step
    sizes = [step] * n_full
    if remainder > 1e-12 * max(1.0, abs(t_final)):
        sizes.append(remainder)
    return sizes


def integrate(algebroid, hamiltonian, z0, config, casimirs=None,
              check_structure=True, structure_tol=1e-6):
    """Integrate the anchor vector field of a Hamiltonian from z0.

    The ledger records the energy at every step plus every registered
    Casimir (default registry unless one is passed).  The structure
    equations are spot-checked near the initial point unless waived with
    check_structure=False.  A non-finite state or derivative aborts the run
    with a NumericalBlowupError carrying the blow-up time and the partial
    trajectory accumulated so far.
    """
    n = algebroid.base_dim
    if z0.q.size != n or z0.p.size != algebroid.fiber_rank:
        raise ValueError("initial point does not match the algebroid dimensions")
    if check_structure:
        probes = [z0.q, z0.q + 0.05, z0.q - 0.05]
        report = check_structure_equations(algebroid, probes, structure_tol)
        if not report.passed:
            raise ValueError(
                "structure equations violated near the initial point "
                f"(max residual {max(report.max_first_equation, report.max_second_equation):.3e}); "
                "pass check_structure=False to waive")

    registry = DEFAULT_CASIMIRS if casimirs is None else casimirs
    ledger_fns = {"energy": hamiltonian}
    for name, fn in registry.items():
        if name == "energy":
            ledger_fns["energy"] = fn
        else:
            ledger_fns[name] = fn

    def rhs(t, y):
        v = anchor_vector_field(algebroid, hamiltonian, DualCoordinates.from_vector(y, n))
        if not np.all(np.isfinite(v)):
            raise NumericalBlowupError(f"non-finite derivative at t = {t:.6g}", time=t)
        return v

    sizes = _step_plan(config.step, config.t_final)
    times = [0.0]
    ys = [z0.as_vector()]
    ledger = {name: [fn(z0.q, z0.p)] for name, fn in ledger_fns.items()}
    t = 0.0
    y = ys[0]
    try:
        for h in sizes:
            if config.method == "rk4":
                y = _rk4_step(rhs, t, y, h)
            else:
                y = _midpoint_step(rhs, t, y, h, config.fixed_point_tol,
                                   config.max_fixed_point_iter)
            t = t + h
            if not np.all(np.isfinite(y)):
                raise NumericalBlowupError(f"non-finite state at t = {t:.6g}", time=t)
            z = DualCoordinates.from_vector(y, n)
            times.append(t)
            ys.append(y)
            for name, fn in ledger_fns.items():
                ledger[name].append(fn(z.q, z.p))
    except NumericalBlowupError as err:
        ys_arr = np.asarray(ys)
        err.partial = Trajectory(times, ys_arr[:, :n], ys_arr[:, n:], ledger)
        if err.time is None:
            err.time = t
        raise
    ys_arr = np.asarray(ys)
    return Trajectory(times, ys_arr[:, :n], ys_arr[:, n:], ledger)
