"""Figure rendering for the CLI report path.

Every renderer takes the same data that goes into the CSV/JSON report and
writes a PNG next to it.  The Agg backend is forced so rendering works in
headless environments; nothing here ever opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def _save(fig, path: str) -> None:
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)


def heatmap(xs, ys, values, title: str, path: str, symmetric: bool = False) -> None:
    """Pseudocolor plot of a field sampled on the tensor grid xs x ys."""
    vals = np.asarray(values, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    kwargs = {}
    if symmetric:
        vmax = float(np.max(np.abs(vals))) or 1.0
        kwargs = {"cmap": "RdBu_r", "vmin": -vmax, "vmax": vmax}
    else:
        kwargs = {"cmap": "viridis"}
    mesh = ax.pcolormesh(np.asarray(ys, dtype=float), np.asarray(xs, dtype=float),
                         vals, shading="nearest", **kwargs)
    fig.colorbar(mesh, ax=ax)
    ax.set_xlabel("y")
    ax.set_ylabel("x")
    ax.set_title(title)
    _save(fig, path)


def curve(xs, values, title: str, ylabel: str, path: str) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(np.asarray(xs, dtype=float), np.asarray(values, dtype=float), lw=1.5)
    ax.set_xlabel("x")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def spectrum_decay(eigenvalues, title: str, path: str) -> None:
    vals = np.asarray(eigenvalues, dtype=float)
    n = np.arange(1, len(vals) + 1)
    pos = vals > 0
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(n[pos], vals[pos], ".", ms=3)
    ax.set_xlabel("n")
    ax.set_ylabel("eigenvalue")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def residual_bars(labels, residuals, tol: float, title: str, path: str) -> None:
    res = np.asarray(residuals, dtype=float)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.28 * len(res)), 4.0))
    floor = 1e-18
    ax.bar(np.arange(len(res)), np.maximum(res, floor), width=0.8)
    ax.axhline(tol, color="crimson", lw=1.0, label=f"tolerance {tol:g}")
    ax.set_yscale("log")
    ax.set_ylabel("residual")
    ax.set_title(title)
    if len(labels) <= 40:
        ax.set_xticks(np.arange(len(res)))
        ax.set_xticklabels(labels, rotation=90, fontsize=6)
    else:
        ax.set_xlabel("check index")
    ax.legend(loc="upper right", fontsize=8)
    _save(fig, path)
