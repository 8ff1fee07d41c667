"""Figure rendering for experiment outputs.

Renders the minimum-sketch-length curves and the median error-vs-m curves
from an experiment's CSV files to PNGs living next to them. Uses the Agg
backend so it works headless.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import M_STAR_NOT_FOUND


def read_summary(path: str | Path) -> list[tuple[int, str, int]]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [(int(r["n"]), r["algorithm"], int(r["m_star"])) for r in rows]


def read_raw(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        {
            "n": int(r["n"]),
            "m": int(r["m"]),
            "algorithm": r["algorithm"],
            "relative_error": float(r["relative_error"]),
        }
        for r in rows
    ]


def save_mstar_figure(summary_rows, path: str | Path) -> Path:
    """m* against log2(N), one line per algorithm; not-found cells skipped."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    algorithms = sorted({algo for _, algo, _ in summary_rows})
    for algo in algorithms:
        pts = sorted(
            (n, star) for n, a, star in summary_rows
            if a == algo and star != M_STAR_NOT_FOUND
        )
        if pts:
            xs = [math.log2(n) for n, _ in pts]
            ys = [star for _, star in pts]
            ax.plot(xs, ys, marker="o", label=algo.upper())
    ax.set_xlabel(r"$\log_2 N$")
    ax.set_ylabel(r"minimum samples $m^*$")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_error_curves(raw_rows, path: str | Path) -> Path:
    """Median relative error against m, one panel per ambient dimension."""
    n_values = sorted({r["n"] for r in raw_rows})
    if not n_values:
        fig, ax = plt.subplots(figsize=(6.0, 4.2))
        ax.set_axis_off()
        fig.savefig(path, dpi=150)
        plt.close(fig)
        return Path(path)
    ncols = min(3, len(n_values))
    nrows = math.ceil(len(n_values) / ncols)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.2 * ncols, 3.2 * nrows), squeeze=False
    )
    for idx, n in enumerate(n_values):
        ax = axes[idx // ncols][idx % ncols]
        for algo in sorted({r["algorithm"] for r in raw_rows}):
            cells: dict[int, list[float]] = {}
            for r in raw_rows:
                if r["n"] == n and r["algorithm"] == algo:
                    cells.setdefault(r["m"], []).append(r["relative_error"])
            if not cells:
                continue
            ms = sorted(cells)
            med = [float(np.median(cells[m])) for m in ms]
            ax.semilogy(ms, [max(v, 1e-17) for v in med], label=algo.upper())
        ax.set_title(f"N = {n}")
        ax.set_xlabel("m")
        ax.set_ylabel("median rel. error")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    for idx in range(len(n_values), nrows * ncols):
        axes[idx // ncols][idx % ncols].set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def render_report(results_dir: str | Path, out_dir: str | Path | None = None) -> list[Path]:
    """Render figures for an experiment directory containing raw.csv and
    summary.csv; returns the written figure paths."""
    results = Path(results_dir)
    out = Path(out_dir) if out_dir is not None else results
    out.mkdir(parents=True, exist_ok=True)
    written = []
    summary = results / "summary.csv"
    raw = results / "raw.csv"
    if summary.exists():
        written.append(save_mstar_figure(read_summary(summary), out / "m_star.png"))
    if raw.exists():
        written.append(save_error_curves(read_raw(raw), out / "error_curves.png"))
    return written
