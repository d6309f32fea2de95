"""Figure rendering for solve / verify / sweep reports.

All functions save to files and return the path; nothing is shown
interactively (the Agg backend is forced so the CLI works headless).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .model import Trajectory


def _param_label(traj: Trajectory) -> str:
    p = traj.params
    return f"n={p.n}, lam={p.lam:g}, mu1={p.mu1:g}"


def save_profile_figure(traj: Trajectory, path: str | Path) -> Path:
    """log-log plot of h together with the slope h_r on a twin axis."""
    path = Path(path)
    mask = traj.r > 0.0
    r, h, hr = traj.r[mask], traj.h[mask], traj.hr[mask]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.loglog(r, h, color="tab:blue", label="h(r)")
    ax.set_xlabel("r")
    ax.set_ylabel("h", color="tab:blue")
    ax2 = ax.twinx()
    ax2.semilogx(r, hr, color="tab:orange", alpha=0.7, label="h_r(r)")
    ax2.set_ylabel("h_r", color="tab:orange")
    ax.set_title(f"profile ({_param_label(traj)})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_diagnostics_figure(traj: Trajectory, path: str | Path) -> Path:
    """Panel of the derived quantities q, u, v, w against r."""
    path = Path(path)
    mask = traj.r > 0.0
    r = traj.r[mask]
    d = traj.diagnostics_arrays()
    fig, axes = plt.subplots(2, 2, figsize=(9.0, 6.0), sharex=True)
    for ax, key in zip(axes.flat, ("q", "u", "v", "w")):
        ax.semilogx(r, d[key][mask])
        ax.set_ylabel(key)
        ax.grid(True, alpha=0.3)
    for ax in axes[-1]:
        ax.set_xlabel("r")
    fig.suptitle(f"diagnostics ({_param_label(traj)})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_sweep_figure(results: list[dict], path: str | Path) -> Path:
    """Scatter of sweep outcomes in the (mu1, lam) plane, one marker per run,
    colored by overall pass/fail."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.5, 5.0))
    for res in results:
        p = res["params"]
        ok = res.get("all_passed")
        color = "tab:green" if ok else ("tab:red" if ok is False else "tab:gray")
        ax.scatter(p["mu1"], p["lam"], color=color, s=40)
    ax.set_xlabel("mu1")
    ax.set_ylabel("lam")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.axvline(0.0, color="k", lw=0.5)
    ax.set_title("sweep outcomes (green pass, red fail, gray error)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
