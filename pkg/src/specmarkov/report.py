"""Render analytic-vs-simulation sweep results to a figure.

Companion to the `report` CLI command: takes the rows a sweep produced
and draws the three metrics against the swept parameter, analytic as
lines and simulation as markers, into a single PNG next to the CSV.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .cli import ANALYTIC_COLUMNS, SIM_COLUMNS

_PANELS = (
    ("theta", "theta_sim", "throughput"),
    ("pr_collision", "pr_collision_sim", "SU-PU collision probability"),
    ("ds", "ds_sim", "handoff delay (slots)"),
)


def _clean(values):
    return [v if math.isfinite(v) else math.nan for v in values]


def render(sweep_key: str, rows: list, path: str) -> str:
    """Draw the three-metric comparison figure; returns the path written."""
    columns = ANALYTIC_COLUMNS + SIM_COLUMNS
    idx = {name: n for n, name in enumerate(columns)}
    xs = [row[idx[sweep_key]] for row in rows]

    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
    for ax, (ana_col, sim_col, label) in zip(axes, _PANELS):
        ana = _clean([float(row[idx[ana_col]]) for row in rows])
        sim = _clean([float(row[idx[sim_col]]) for row in rows])
        ax.plot(xs, ana, "-", label="analytic")
        ax.plot(xs, sim, "o", fillstyle="none", label="simulation")
        ax.set_xlabel(sweep_key)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[0].legend(loc="best")
    fig.suptitle(f"analytic vs simulation over {sweep_key}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
