"""Figure rendering for trajectories and residual sweeps.

Uses the Agg backend so files render headlessly; figures are written
next to the delimited output by the CLI's --plot flag.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .dynamics import Trajectory
from .kce import KceReport

__all__ = ["save_trajectory_plot", "save_residual_plot"]


def save_trajectory_plot(traj: Trajectory, path: Union[str, Path],
                         title: str = "") -> None:
    times = traj.times
    m = traj.states[0].m
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i in range(m):
        ax.plot(times, [d.probs[i] for d in traj.states], marker="o",
                label=f"x_{i}")
    ax.set_xlabel("t")
    ax.set_ylabel("probability")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)


def save_residual_plot(report: KceReport, path: Union[str, Path]) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    residuals = [r for _, _, _, r in report.residuals]
    if residuals:
        ax.plot(range(len(residuals)), residuals, marker=".", linestyle="none")
        ax.axhline(report.tol, color="red", linestyle="--",
                   label=f"tol = {report.tol:g}")
        ax.set_yscale("symlog", linthresh=max(report.tol * 1e-3, 1e-18))
        ax.legend()
    ax.set_xlabel("triple index (ordered sweep)")
    ax.set_ylabel("max-norm residual")
    ax.set_title(f"{report.family}: {'PASS' if report.verdict else 'FAIL'}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)
