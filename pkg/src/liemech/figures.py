"""Figure rendering for scenario runs: PNGs written next to the CSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_DPI = 120


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)


def render_classical(trajectory, out_dir, stem):
    """State components over time plus a drift view of the ledger columns."""
    out_dir = Path(out_dir)
    paths = []

    fig, ax = plt.subplots(figsize=(7, 4))
    t = trajectory.times
    for i in range(trajectory.qs.shape[1]):
        ax.plot(t, trajectory.qs[:, i], label=f"q{i + 1}")
    for i in range(trajectory.ps.shape[1]):
        ax.plot(t, trajectory.ps[:, i], label=f"p{i + 1}")
    ax.set_xlabel("t")
    ax.set_ylabel("coordinate")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    paths.append(_save(fig, out_dir / f"{stem}_states.png"))

    fig, ax = plt.subplots(figsize=(7, 4))
    for name, series in trajectory.ledger.items():
        drift = np.abs(series - series[0]) + 1e-18
        ax.semilogy(t, drift, label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("|drift from start|")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    paths.append(_save(fig, out_dir / f"{stem}_ledger.png"))
    return paths


def render_equivalence(report, out_dir, stem):
    """Expectation curves from both pictures and their pointwise deviation."""
    out_dir = Path(out_dir)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(report.times, report.state_picture, label="state picture")
    ax1.plot(report.times, report.operator_picture, "--", label="operator picture")
    ax1.set_ylabel("expectation")
    ax1.legend(loc="best", fontsize=8)
    ax1.grid(alpha=0.3)
    ax2.semilogy(report.times, report.deviations + 1e-18)
    ax2.set_xlabel("t")
    ax2.set_ylabel("|deviation|")
    ax2.grid(alpha=0.3)
    return [_save(fig, out_dir / f"{stem}_equivalence.png")]


def render_expectations(times, series, out_dir, stem):
    out_dir = Path(out_dir)
    fig, ax = plt.subplots(figsize=(7, 4))
    for name in sorted(series):
        ax.plot(times, series[name], label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("expectation")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    return [_save(fig, out_dir / f"{stem}_expectations.png")]


def render_uncertainty(report, out_dir, stem):
    """Scatter of rhs against lhs and the distribution of the slack."""
    out_dir = Path(out_dir)
    lhs = np.array([s.lhs for s in report.samples])
    rhs = np.array([s.rhs for s in report.samples])
    slack = np.array([s.slack for s in report.samples])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(lhs, rhs, ".", ms=2, alpha=0.4)
    lim = max(1e-12, float(np.max(lhs)))
    ax1.plot([0, lim], [0, lim], "k--", lw=0.8)
    ax1.set_xlabel("variance product")
    ax1.set_ylabel("lower bound")
    ax1.grid(alpha=0.3)
    ax2.hist(slack, bins=50)
    ax2.set_xlabel("slack")
    ax2.set_ylabel("count")
    ax2.grid(alpha=0.3)
    return [_save(fig, out_dir / f"{stem}_uncertainty.png")]


def render_structure(report, out_dir, stem):
    out_dir = Path(out_dir)
    fig, ax = plt.subplots(figsize=(7, 4))
    idx = np.arange(report.n_samples)
    ax.semilogy(idx, np.asarray(report.first_equation) + 1e-18, ".", ms=3,
                label="first equation")
    ax.semilogy(idx, np.asarray(report.second_equation) + 1e-18, ".", ms=3,
                label="second equation")
    ax.axhline(report.tol, color="k", ls="--", lw=0.8, label="tolerance")
    ax.set_xlabel("sample")
    ax.set_ylabel("residual")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    return [_save(fig, out_dir / f"{stem}_residuals.png")]
