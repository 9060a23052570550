"""Figure builders over the experiment CSV/JSON logs.

Rendering is read-only and batch-only: figures are built with the
object-oriented matplotlib API (no pyplot, no interactivity) and written
straight to file.  Inputs are the documented CSV schemas:

  signal file:  run,theta,p,signal_mean,signal_stderr
  sweep file:   n,t,algorithm,constraint_kind,constraint_value,
                r,lambda,cnot_count,overhead

plus the corresponding JSON summaries written alongside them.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

_SIGNAL_COLUMNS = ["run", "theta", "p", "signal_mean", "signal_stderr"]
_SWEEP_COLUMNS = ["n", "t", "algorithm", "constraint_kind", "constraint_value",
                  "r", "lambda", "cnot_count", "overhead"]

_ALGO_COLORS = {
    "qdrift": "tab:gray",
    "pf1": "tab:green",
    "pf2": "tab:olive",
    "pf1_enhanced": "tab:blue",
    "pf2_enhanced": "tab:cyan",
    "cts": "tab:red",
}


@dataclass
class FigureSpec:
    """What to draw and where to put it."""

    kind: str                     # "mqc_signal" | "cnot_sweep"
    csv_path: str | Path
    summary_path: str | Path     # summary JSON (mqc) or fit JSON (sweep)
    output_path: str | Path
    title: str | None = None
    dpi: int = 150
    figsize: tuple[float, float] = (7.0, 4.5)

    def validate(self):
        if self.kind not in ("mqc_signal", "cnot_sweep"):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        for path in (self.csv_path, self.summary_path):
            if not Path(path).exists():
                raise FileNotFoundError(f"input file missing: {path}")


def _read_csv(path, expected_columns) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != expected_columns:
            raise ValueError(
                f"{path}: expected columns {expected_columns}, "
                f"found {reader.fieldnames}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def _analytic_signal(n: int, p: float, thetas: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 - p) ** (n - 1) * (1.0 + np.cos(n * thetas))


def plot_mqc(spec: FigureSpec):
    """Signal points with error bars plus the analytic curve for each p.

    Returns (figure, axis); the figure is also written to the spec's
    output path.
    """
    spec.validate()
    rows = _read_csv(spec.csv_path, _SIGNAL_COLUMNS)
    summary = json.loads(Path(spec.summary_path).read_text())
    n_by_p = {float(entry["p"]): int(entry["n"]) for entry in summary}

    # aggregate run-level rows into per-(p, theta) means
    grouped: dict[float, dict[float, list[float]]] = {}
    for row in rows:
        p = float(row["p"])
        theta = float(row["theta"])
        grouped.setdefault(p, {}).setdefault(theta, []).append(
            float(row["signal_mean"]))

    fig = Figure(figsize=spec.figsize)
    ax = fig.subplots()
    dense = np.linspace(0.0, 2.0 * math.pi, 481)
    for p in sorted(grouped):
        thetas = np.array(sorted(grouped[p]))
        means = np.array([np.mean(grouped[p][t]) for t in thetas])
        errs = np.array([
            np.std(grouped[p][t], ddof=1) / math.sqrt(len(grouped[p][t]))
            if len(grouped[p][t]) > 1 else 0.0
            for t in thetas])
        handle = ax.errorbar(thetas, means, yerr=errs, fmt="o", ms=3.5,
                             capsize=2, label=f"p = {p:g}")
        if p not in n_by_p:
            raise ValueError(f"summary file has no entry for p = {p:g}")
        color = handle.lines[0].get_color()
        ax.plot(dense, _analytic_signal(n_by_p[p], p, dense), "-", lw=1.0,
                color=color, alpha=0.8)
    ax.set_xlabel(r"rotation angle $\theta$")
    ax.set_ylabel(r"all-zero population $S_\theta$")
    ax.set_xlim(0.0, 2.0 * math.pi)
    ax.set_ylim(bottom=min(0.0, ax.get_ylim()[0]))
    ax.legend(loc="upper right", fontsize=8)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=spec.dpi)
    return fig, ax


def plot_sweep(spec: FigureSpec):
    """Log-log cost curves per algorithm: points, shaded constraint bands
    between the two endpoints, and the fitted power laws.

    Returns (figure, axis); the figure is also written to the spec's
    output path.
    """
    spec.validate()
    rows = _read_csv(spec.csv_path, _SWEEP_COLUMNS)
    fits = json.loads(Path(spec.summary_path).read_text())

    curves: dict[tuple[str, float], dict[int, float]] = {}
    for row in rows:
        cost = float(row["cnot_count"])
        if not math.isfinite(cost):
            continue
        key = (row["algorithm"], float(row["constraint_value"]))
        curves.setdefault(key, {})[int(row["n"])] = cost

    fig = Figure(figsize=spec.figsize)
    ax = fig.subplots()
    by_algorithm: dict[str, list[tuple[float, dict[int, float]]]] = {}
    for (algorithm, value), pts in sorted(curves.items()):
        by_algorithm.setdefault(algorithm, []).append((value, pts))

    for algorithm, endpoint_curves in sorted(by_algorithm.items()):
        color = _ALGO_COLORS.get(algorithm, "tab:purple")
        # shade between the two constraint endpoints where both cover n
        if len(endpoint_curves) == 2:
            (v1, c1), (v2, c2) = endpoint_curves
            shared = sorted(set(c1) & set(c2))
            if shared:
                lo = [min(c1[n], c2[n]) for n in shared]
                hi = [max(c1[n], c2[n]) for n in shared]
                ax.fill_between(shared, lo, hi, color=color, alpha=0.18, lw=0)
        for value, pts in endpoint_curves:
            ns = sorted(pts)
            costs = [pts[n] for n in ns]
            label = f"{algorithm} @ {value:g}"
            ax.plot(ns, costs, "o", ms=3.5, color=color, label=label)
            fit = _matching_fit(fits, algorithm, value)
            if fit is None or len(ns) < 2:
                if len(ns) < 2:
                    warnings.warn(f"{label}: single point, no fit drawn")
                continue
            dense = np.geomspace(min(ns), max(ns), 64)
            ax.plot(dense, fit["prefactor"] * dense ** fit["exponent"], "-",
                    lw=1.0, color=color, alpha=0.8)
            ax.annotate(f"$n^{{{fit['exponent']:.2f}}}$",
                        (ns[-1], costs[-1]), textcoords="offset points",
                        xytext=(4, -4), fontsize=7, color=color)

    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("system size n")
    ax.set_ylabel("expected CNOT count")
    ax.legend(loc="upper left", fontsize=7, ncol=2)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=spec.dpi)
    return fig, ax


def _matching_fit(fits: dict, algorithm: str, value: float):
    for fit in fits.values():
        if fit["algorithm"] == algorithm and \
                math.isclose(fit["constraint_value"], value, rel_tol=1e-9):
            return fit
    return None
