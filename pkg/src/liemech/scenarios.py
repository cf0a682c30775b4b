"""Scenario configs, builtin catalog, and the run pipeline behind the CLI.

A scenario is a single JSON document; complex matrices are encoded entry by
entry as [re, im] pairs.  Runs are deterministic given the config, the seed,
and hbar: CSV artifacts from two identical runs are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebroids import (DualCoordinates, NumericalBlowupError,
                         algebroid_from_dict, check_structure_equations,
                         named_algebroid)
from .flow import CasimirRegistry, IntegratorConfig, integrate
from .kahler import QuantumState
from .schrodinger import Observable, evolve, expectation
from .heisenberg import heisenberg_evolve
from .verify import (UncertaintyReport, check_equivalence, check_uncertainty,
                     geometric_uncertainty_rhs, random_hermitian, random_state)

KINDS = ("classical", "schrodinger", "heisenberg", "equivalence",
         "uncertainty", "structure-check")


class ConfigError(ValueError):
    """Invalid scenario configuration."""


# ---------------------------------------------------------------------------
# Named pieces usable from config files

_PAULI = {
    "sigma-x": np.array([[0, 1], [1, 0]], dtype=complex),
    "sigma-y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "sigma-z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_STATES = {
    "zero": np.array([1, 0], dtype=complex),
    "one": np.array([0, 1], dtype=complex),
    "plus": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "minus": np.array([1, -1], dtype=complex) / np.sqrt(2),
}


def decode_complex_matrix(obj, what="matrix"):
    """Decode nested [re, im] pairs into a complex array."""
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{what} is not a numeric array: {err}") from None
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ConfigError(f"{what} entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_complex_matrix(matrix):
    matrix = np.asarray(matrix, dtype=complex)
    return np.stack([matrix.real, matrix.imag], axis=-1).tolist()


def resolve_operator(spec, what="operator"):
    if isinstance(spec, str):
        if spec not in _PAULI:
            raise ConfigError(f"unknown {what} name {spec!r}; known: {sorted(_PAULI)}")
        return _PAULI[spec]
    m = decode_complex_matrix(spec, what)
    if m.ndim != 2:
        raise ConfigError(f"{what} must be a matrix")
    return m


def resolve_state(spec, what="state"):
    if isinstance(spec, str):
        if spec not in _STATES:
            raise ConfigError(f"unknown {what} name {spec!r}; known: {sorted(_STATES)}")
        return QuantumState(_STATES[spec])
    v = decode_complex_matrix(spec, what)
    if v.ndim != 1:
        raise ConfigError(f"{what} must be a vector")
    return QuantumState(v)


def _hamiltonian_rigid_body(inertia):
    inertia = np.asarray(inertia, dtype=float)

    def h(q, p):
        return 0.5 * float(np.sum(p * p / inertia))

    return h


_CLASSICAL_HAMILTONIANS = {
    "rigid-body": lambda params: _hamiltonian_rigid_body(params.get("inertia", [1.0, 2.0, 3.0])),
    "harmonic": lambda params: (lambda q, p: 0.5 * float(p @ p + q @ q)),
    "free": lambda params: (lambda q, p: 0.5 * float(p @ p)),
    "inverted-quartic": lambda params: (lambda q, p: 0.5 * float(p @ p) - float(np.sum(q ** 4))),
}

_CASIMIRS = {
    "p-squared": lambda q, p: float(p @ p),
}


def resolve_classical_hamiltonian(spec):
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError("classical hamiltonian must be an object with a 'type' field")
    kind = spec["type"]
    if kind not in _CLASSICAL_HAMILTONIANS:
        raise ConfigError(f"unknown hamiltonian type {kind!r}; known: {sorted(_CLASSICAL_HAMILTONIANS)}")
    return _CLASSICAL_HAMILTONIANS[kind](spec)


# ---------------------------------------------------------------------------
# Builtin scenario catalog

def _rigid_body_config():
    return {
        "name": "rigid-body",
        "kind": "classical",
        "algebroid": "so3-point",
        "hamiltonian": {"type": "rigid-body", "inertia": [1.0, 2.0, 3.0]},
        "initial": {"q": [0.0], "p": [0.1, 1.0, 0.1]},
        "integrator": {"method": "implicit-midpoint", "step": 1e-3, "t_final": 10.0},
        "casimirs": ["p-squared"],
        "tolerances": {"energy_drift": 1e-8, "casimir_drift": 1e-8},
    }


def _harmonic_config():
    return {
        "name": "harmonic-oscillator",
        "kind": "classical",
        "algebroid": "tangent-R1",
        "hamiltonian": {"type": "harmonic"},
        "initial": {"q": [1.0], "p": [0.0]},
        "integrator": {"method": "implicit-midpoint", "step": 1e-3,
                       "t_final": 6.283185307179586},
        "casimirs": [],
        "tolerances": {"energy_drift": 1e-8, "return_residual": 1e-6},
    }


def _qubit_precession_config():
    return {
        "name": "qubit-precession",
        "kind": "equivalence",
        "hamiltonian": "sigma-z",
        "observable": "sigma-x",
        "state": "plus",
        "grid": {"start": 0.0, "stop": 6.283185307179586, "step": 0.01},
        "tolerances": {"max_deviation": 1e-9},
    }


def _structure_config(name, algebroid):
    return {
        "name": name,
        "kind": "structure-check",
        "algebroid": algebroid,
        "samples": {"count": 200, "scale": 1.0},
        "tolerances": {"residual": 1e-6},
    }


BUILTIN_SCENARIOS = {
    "harmonic-oscillator": {
        "kind": "classical",
        "dims": "n=1, r=1",
        "description": "unit oscillator on the tangent algebroid of the line",
        "config": _harmonic_config,
    },
    "qubit-precession": {
        "kind": "equivalence",
        "dims": "n=2 complex",
        "description": "two-level precession compared across both pictures",
        "config": _qubit_precession_config,
    },
    "rigid-body": {
        "kind": "classical",
        "dims": "n=1, r=3",
        "description": "free rigid body on the dual of so(3) with Casimir ledger",
        "config": _rigid_body_config,
    },
    "so3-point": {
        "kind": "structure-check",
        "dims": "n=1, r=3",
        "description": "structure-equation residuals for so(3) over a point",
        "config": lambda: _structure_config("so3-point", "so3-point"),
    },
    "tangent-Rn": {
        "kind": "structure-check",
        "dims": "n=3, r=3",
        "description": "structure-equation residuals for the tangent algebroid of R^3",
        "config": lambda: _structure_config("tangent-Rn", "tangent-R3"),
    },
}


def builtin_catalog():
    """Stable-ordered catalog rows {name, kind, dims, description}."""
    rows = []
    for name in sorted(BUILTIN_SCENARIOS):
        entry = BUILTIN_SCENARIOS[name]
        rows.append({"name": name, "kind": entry["kind"], "dims": entry["dims"],
                     "description": entry["description"]})
    return rows


def builtin_config(name):
    if name not in BUILTIN_SCENARIOS:
        raise ConfigError(f"unknown builtin scenario {name!r}; known: {sorted(BUILTIN_SCENARIOS)}")
    return BUILTIN_SCENARIOS[name]["config"]()


# ---------------------------------------------------------------------------
# Config handling

def normalize_config(doc):
    """Overlay builtin presets and validate the scenario document."""
    if not isinstance(doc, dict):
        raise ConfigError("scenario config must be a JSON object")
    doc = dict(doc)
    if "builtin" in doc:
        base = builtin_config(doc.pop("builtin"))
        base.update(doc)
        doc = base
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"scenario kind must be one of {KINDS}, got {kind!r}")
    doc.setdefault("name", kind)
    doc.setdefault("tolerances", {})
    if not isinstance(doc["tolerances"], dict):
        raise ConfigError("tolerances must be an object")
    return doc


def _grid_from_config(spec):
    if not isinstance(spec, dict):
        raise ConfigError("grid must be an object with start/stop/step")
    try:
        start = float(spec["start"])
        stop = float(spec["stop"])
        step = float(spec["step"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("grid needs numeric start, stop, step") from None
    if step <= 0 or stop < start:
        raise ConfigError("grid must have positive step and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    grid = start + step * np.arange(count)
    if grid.size == 0:
        raise ConfigError("grid is empty")
    return grid


def config_hash(doc, seed, hbar):
    canon = json.dumps({"config": doc, "seed": seed, "hbar": hbar},
                       sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    scenario: str
    kind: str
    config_hash: str
    seed: int
    hbar: float
    tolerances: dict
    checks: dict
    artifacts: list
    passed: bool
    partial: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "kind": self.kind,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "hbar": self.hbar,
            "tolerances": self.tolerances,
            "checks": self.checks,
            "artifacts": self.artifacts,
            "passed": self.passed,
            "partial": self.partial,
            **self.extra,
        }

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def _check(value, tolerance, mode="max"):
    value = float(value)
    ok = value >= tolerance if mode == "min" else value <= tolerance
    return {"value": value, "tolerance": float(tolerance), "passed": bool(ok)}


def _write_csv(path, header, columns):
    columns = [np.asarray(c) for c in columns]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(columns[0].size):
            fh.write(",".join(repr(float(c[i])) for c in columns) + "\n")


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Kind runners.  Each returns (checks, artifact paths).

def _relative_drift(series):
    series = np.asarray(series, dtype=float)
    scale = max(1e-30, abs(float(series[0])))
    return float(np.max(np.abs(series - series[0]))) / scale


def _resolve_algebroid(doc):
    spec = doc.get("algebroid")
    if spec is None:
        raise ConfigError("scenario needs an 'algebroid' field")
    try:
        if isinstance(spec, str):
            return named_algebroid(spec)
        return algebroid_from_dict(spec)
    except ValueError as err:
        raise ConfigError(f"bad algebroid spec: {err}") from None


def _run_classical(doc, rng, hbar, out, name, figures):
    algebroid = _resolve_algebroid(doc)
    hamiltonian = resolve_classical_hamiltonian(doc.get("hamiltonian"))
    initial = doc.get("initial")
    if not isinstance(initial, dict) or "q" not in initial or "p" not in initial:
        raise ConfigError("classical scenario needs initial q and p")
    z0 = DualCoordinates(np.asarray(initial["q"], dtype=float),
                         np.asarray(initial["p"], dtype=float))
    if z0.q.size != algebroid.base_dim or z0.p.size != algebroid.fiber_rank:
        raise ConfigError("initial point does not match the algebroid dimensions")
    integ = doc.get("integrator", {})
    try:
        config = IntegratorConfig(method=integ.get("method", "implicit-midpoint"),
                                  step=float(integ.get("step", 1e-3)),
                                  t_final=float(integ.get("t_final", 1.0)))
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad integrator config: {err}") from None
    registry = CasimirRegistry()
    for cname in doc.get("casimirs", []):
        if cname not in _CASIMIRS:
            raise ConfigError(f"unknown casimir {cname!r}; known: {sorted(_CASIMIRS)}")
        registry.register(cname, _CASIMIRS[cname])

    try:
        trajectory = integrate(algebroid, hamiltonian, z0, config, casimirs=registry)
    except ValueError as err:
        # Structure-gate failures are a property of the configured algebroid.
        raise ConfigError(str(err)) from None

    tolerances = doc["tolerances"]
    checks = {}
    checks["energy_drift"] = _check(_relative_drift(trajectory.ledger["energy"]),
                                    tolerances.get("energy_drift", 1e-8))
    for cname in doc.get("casimirs", []):
        checks[f"{cname}_drift"] = _check(_relative_drift(trajectory.ledger[cname]),
                                          tolerances.get("casimir_drift", 1e-8))
    if "return_residual" in tolerances:
        start = trajectory.state(0).as_vector()
        end = trajectory.state(len(trajectory) - 1).as_vector()
        checks["return_residual"] = _check(np.max(np.abs(end - start)),
                                           tolerances["return_residual"])

    artifacts = []
    csv_path = out / f"{name}.csv"
    trajectory.to_csv(csv_path)
    artifacts.append(csv_path)
    json_path = out / f"{name}.json"
    trajectory.to_json(json_path)
    artifacts.append(json_path)
    if figures:
        from .figures import render_classical
        artifacts.extend(render_classical(trajectory, out, name))
    return checks, artifacts


def _run_structure_check(doc, rng, hbar, out, name, figures):
    algebroid = _resolve_algebroid(doc)
    samples_spec = doc.get("samples", {})
    count = int(samples_spec.get("count", 200))
    scale = float(samples_spec.get("scale", 1.0))
    if count < 1:
        raise ConfigError("structure-check needs at least one sample")
    tol = float(doc["tolerances"].get("residual", 1e-6))
    points = rng.normal(scale=scale, size=(count, algebroid.base_dim))
    report = check_structure_equations(algebroid, points, tol)
    checks = {
        "first_equation": _check(report.max_first_equation, tol),
        "second_equation": _check(report.max_second_equation, tol),
        "antisymmetry": _check(report.max_antisymmetry, tol),
    }
    artifacts = []
    csv_path = out / f"{name}.csv"
    idx = np.arange(count)
    _write_csv(csv_path, ["sample", "first_equation", "second_equation"],
               [idx, np.asarray(report.first_equation), np.asarray(report.second_equation)])
    artifacts.append(csv_path)
    json_path = out / f"{name}.json"
    _write_json(json_path, report.to_dict())
    artifacts.append(json_path)
    if figures:
        from .figures import render_structure
        artifacts.extend(render_structure(report, out, name))
    return checks, artifacts


def _run_equivalence(doc, rng, hbar, out, name, figures):
    H = resolve_operator(doc.get("hamiltonian"), "hamiltonian")
    A = resolve_operator(doc.get("observable"), "observable")
    psi0 = resolve_state(doc.get("state"))
    grid = _grid_from_config(doc.get("grid"))
    tol = float(doc["tolerances"].get("max_deviation", 1e-9))
    try:
        report = check_equivalence(H, A, psi0, grid, hbar=hbar, tol=tol,
                                   descriptor={"scenario": name})
    except ValueError as err:
        raise ConfigError(str(err)) from None
    checks = {"max_deviation": _check(report.max_deviation, tol)}
    artifacts = []
    csv_path = out / f"{name}.csv"
    _write_csv(csv_path, ["t", "state_picture", "operator_picture", "deviation"],
               [report.times, report.state_picture, report.operator_picture,
                report.deviations])
    artifacts.append(csv_path)
    json_path = out / f"{name}.json"
    _write_json(json_path, report.to_dict())
    artifacts.append(json_path)
    if figures:
        from .figures import render_equivalence
        artifacts.extend(render_equivalence(report, out, name))
    return checks, artifacts


def _run_schrodinger(doc, rng, hbar, out, name, figures):
    H = resolve_operator(doc.get("hamiltonian"), "hamiltonian")
    psi0 = resolve_state(doc.get("state"))
    observables = doc.get("observables", {})
    if not isinstance(observables, dict) or not observables:
        raise ConfigError("schrodinger scenario needs a non-empty observables object")
    matrices = {key: Observable(resolve_operator(spec, key)) for key, spec in observables.items()}
    grid = _grid_from_config(doc.get("grid"))
    series = {key: np.empty(grid.size) for key in matrices}
    norms = np.empty(grid.size)
    for k, t in enumerate(grid):
        psi_t = evolve(H, psi0, t, hbar=hbar)
        norms[k] = float(np.linalg.norm(psi_t.amplitudes))
        for key, obs in matrices.items():
            series[key][k] = expectation(obs, psi_t)
    tol = float(doc["tolerances"].get("norm_drift", 1e-12))
    checks = {"norm_drift": _check(np.max(np.abs(norms - 1.0)), tol)}
    artifacts = []
    csv_path = out / f"{name}.csv"
    keys = sorted(series)
    _write_csv(csv_path, ["t"] + keys + ["norm"],
               [grid] + [series[k] for k in keys] + [norms])
    artifacts.append(csv_path)
    if figures:
        from .figures import render_expectations
        artifacts.extend(render_expectations(grid, series, out, name))
    return checks, artifacts


def _run_heisenberg(doc, rng, hbar, out, name, figures):
    H = resolve_operator(doc.get("hamiltonian"), "hamiltonian")
    A = Observable(resolve_operator(doc.get("observable"), "observable"))
    psi0 = resolve_state(doc.get("state"))
    grid = _grid_from_config(doc.get("grid"))
    series = np.empty(grid.size)
    spectrum_drift = 0.0
    for k, t in enumerate(grid):
        A_t = heisenberg_evolve(H, A, t, hbar=hbar)
        series[k] = expectation(A_t, psi0)
        spectrum_drift = max(spectrum_drift,
                             float(np.max(np.abs(A_t.eigenvalues - A.eigenvalues))))
    tol = float(doc["tolerances"].get("spectrum_drift", 1e-10))
    checks = {"spectrum_drift": _check(spectrum_drift, tol)}
    artifacts = []
    csv_path = out / f"{name}.csv"
    _write_csv(csv_path, ["t", "expectation"], [grid, series])
    artifacts.append(csv_path)
    if figures:
        from .figures import render_expectations
        artifacts.extend(render_expectations(grid, {"expectation": series}, out, name))
    return checks, artifacts


def _run_uncertainty(doc, rng, hbar, out, name, figures):
    count = int(doc.get("count", 1000))
    dim = int(doc.get("dim", 2))
    if count < 1 or dim < 2:
        raise ConfigError("uncertainty scenario needs count >= 1 and dim >= 2")
    fixed_a = doc.get("observable_a")
    fixed_b = doc.get("observable_b")
    if fixed_a is not None:
        fixed_a = resolve_operator(fixed_a, "observable_a")
    if fixed_b is not None:
        fixed_b = resolve_operator(fixed_b, "observable_b")
    samples = []
    for _ in range(count):
        a = fixed_a if fixed_a is not None else random_hermitian(rng, dim)
        b = fixed_b if fixed_b is not None else random_hermitian(rng, dim)
        samples.append(check_uncertainty(a, b, random_state(rng, dim), hbar=hbar))
    tol = float(doc["tolerances"].get("min_slack", -1e-10))
    report = UncertaintyReport.from_samples(samples, tol)
    checks = {"min_slack": _check(report.min_slack, tol, mode="min")}
    artifacts = []
    csv_path = out / f"{name}.csv"
    idx = np.arange(count)
    _write_csv(csv_path, ["sample", "lhs", "rhs", "slack"],
               [idx, [s.lhs for s in samples], [s.rhs for s in samples],
                [s.slack for s in samples]])
    artifacts.append(csv_path)
    json_path = out / f"{name}.json"
    _write_json(json_path, report.to_dict())
    artifacts.append(json_path)
    if figures:
        from .figures import render_uncertainty
        artifacts.extend(render_uncertainty(report, out, name))
    return checks, artifacts


_RUNNERS = {
    "classical": _run_classical,
    "structure-check": _run_structure_check,
    "equivalence": _run_equivalence,
    "schrodinger": _run_schrodinger,
    "heisenberg": _run_heisenberg,
    "uncertainty": _run_uncertainty,
}


def run_scenario(doc, out_dir, seed=None, hbar=None, figures=True):
    """Execute a scenario config and write its artifacts and manifest.

    Raises ConfigError for invalid configs; NumericalBlowupError propagates
    with a manifest attached for partially completed classical runs.
    """
    doc = normalize_config(doc)
    seed = int(doc.get("seed", 0)) if seed is None else int(seed)
    hbar = float(doc.get("hbar", 1.0)) if hbar is None else float(hbar)
    if hbar <= 0:
        raise ConfigError("hbar must be positive")
    name = doc["name"]
    kind = doc["kind"]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    digest = config_hash(doc, seed, hbar)
    try:
        checks, artifacts = _RUNNERS[kind](doc, rng, hbar, out, name, figures)
    except NumericalBlowupError as err:
        artifacts = []
        if err.partial is not None:
            partial_path = out / f"{name}_partial.csv"
            err.partial.to_csv(partial_path)
            artifacts.append(partial_path)
        manifest = RunManifest(
            scenario=name, kind=kind, config_hash=digest, seed=seed, hbar=hbar,
            tolerances=dict(doc["tolerances"]),
            checks={"completed": {"value": float(err.time if err.time is not None else np.nan),
                                  "tolerance": float("nan"), "passed": False}},
            artifacts=[str(p.name) for p in artifacts],
            passed=False, partial=True,
            extra={"blowup_time": err.time, "error": str(err)})
        manifest.write(out / f"{name}_manifest.json")
        err.manifest = manifest
        raise
    manifest = RunManifest(
        scenario=name, kind=kind, config_hash=digest, seed=seed, hbar=hbar,
        tolerances=dict(doc["tolerances"]),
        checks=checks,
        artifacts=[str(Path(p).name) for p in artifacts],
        passed=all(c["passed"] for c in checks.values()),
        partial=False)
    manifest.write(out / f"{name}_manifest.json")
    for p in artifacts:
        if not Path(p).exists():
            raise RuntimeError(f"declared artifact missing: {p}")
    return manifest


def verification_battery(seed=0, hbar=1.0, n_equivalence=10, n_uncertainty=2000):
    """Quick standalone check suite: structure equations, picture agreement,
    and the variance inequality on random ensembles.  Returns a summary dict."""
    rng = np.random.default_rng(seed)
    results = {}

    worst = 0.0
    for builtin in ("tangent-R3", "so3-point", "affine-line"):
        algebroid = named_algebroid(builtin)
        pts = rng.normal(size=(50, algebroid.base_dim))
        rep = check_structure_equations(algebroid, pts, 1e-6)
        worst = max(worst, rep.max_first_equation, rep.max_second_equation)
    results["structure_residual"] = _check(worst, 1e-6)

    max_dev = 0.0
    grid = np.linspace(0.0, 10.0, 41)
    for _ in range(n_equivalence):
        n = int(rng.integers(2, 7))
        rep = check_equivalence(random_hermitian(rng, n), random_hermitian(rng, n),
                                random_state(rng, n), grid, hbar=hbar)
        max_dev = max(max_dev, rep.max_deviation)
    results["equivalence_deviation"] = _check(max_dev, 1e-9)

    min_slack = np.inf
    for _ in range(n_uncertainty):
        n = int(rng.choice([2, 3, 5]))
        sample = check_uncertainty(random_hermitian(rng, n), random_hermitian(rng, n),
                                   random_state(rng, n), hbar=hbar)
        min_slack = min(min_slack, sample.slack)
    results["uncertainty_min_slack"] = _check(min_slack, -1e-10, mode="min")

    geo_gap = 0.0
    for _ in range(25):
        n = int(rng.choice([2, 3]))
        a = random_hermitian(rng, n)
        b = random_hermitian(rng, n)
        psi = random_state(rng, n)
        sample = check_uncertainty(a, b, psi, hbar=hbar)
        geo_gap = max(geo_gap, abs(sample.rhs - geometric_uncertainty_rhs(a, b, psi)))
    results["geometric_rhs_gap"] = _check(geo_gap, 1e-8)

    results["passed"] = all(v["passed"] for v in results.values() if isinstance(v, dict))
    return results
