"""Rendering of matrices, step trends, and sweep curves to PNG files.

Uses the non-interactive Agg backend so the report commands work headless.
Figures are saved with fixed metadata (no timestamps) to keep reruns
byte-identical.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .lattice import enumerate_modes  # noqa: E402

_DPI = 150
_PNG_METADATA = {"Software": "biphoton-walk"}


def _save(fig, path) -> None:
    fig.savefig(path, dpi=_DPI, metadata=_PNG_METADATA)
    plt.close(fig)


def _mode_axes(ax, step: int) -> None:
    labels = enumerate_modes(step).labels()
    n = len(labels)
    stride = 1 if n <= 14 else 2 if n <= 30 else 4
    ticks = range(0, n, stride)
    ax.set_xticks(list(ticks), [labels[i] for i in ticks], rotation=90, fontsize=6)
    ax.set_yticks(list(ticks), [labels[i] for i in ticks], fontsize=6)


def _draw_matrix(ax, step: int, values, vmin, vmax, cmap: str):
    data = np.ma.masked_invalid(np.asarray(values, dtype=float))
    colors = matplotlib.colormaps[cmap].copy()
    colors.set_bad("0.85")
    im = ax.imshow(data, origin="lower", vmin=vmin, vmax=vmax, cmap=colors,
                   interpolation="nearest")
    _mode_axes(ax, step)
    return im


def save_matrix_heatmap(path, step: int, values, title: str = "",
                        cbar_label: str = "", cmap: str = "viridis") -> None:
    fig, ax = plt.subplots(figsize=(5.4, 4.6), constrained_layout=True)
    im = _draw_matrix(ax, step, values, None, None, cmap)
    if title:
        ax.set_title(title, fontsize=10)
    fig.colorbar(im, ax=ax, label=cbar_label)
    _save(fig, path)


def save_matrix_panels(path, step: int, panels, cbar_label: str = "",
                       cmap: str = "viridis") -> None:
    """Side-by-side heatmaps on a shared color scale.

    ``panels`` is a sequence of (title, matrix) pairs; NaN entries are drawn
    in gray (used for the undefined diagonal of violation matrices).
    """
    mats = [np.asarray(m, dtype=float) for _, m in panels]
    finite = np.concatenate([m[np.isfinite(m)] for m in mats])
    vmin, vmax = float(finite.min()), float(finite.max())
    fig, axes = plt.subplots(1, len(panels), figsize=(4.8 * len(panels), 4.4),
                             constrained_layout=True)
    axes = np.atleast_1d(axes)
    for ax, (title, m) in zip(axes, panels):
        im = _draw_matrix(ax, step, m, vmin, vmax, cmap)
        ax.set_title(title, fontsize=10)
    fig.colorbar(im, ax=list(axes), label=cbar_label, shrink=0.85)
    _save(fig, path)


def save_trend_figure(path, records, title: str = "",
                      points=None) -> None:
    """MAV and Total Violation against step count; ordered vs searched best.

    ``points`` optionally adds (step, value, sigma) markers with error bars
    to the MAV panel, e.g. count-based estimates next to the exact curves.
    """
    steps = [r.step for r in records]
    fig, (ax_mav, ax_tot) = plt.subplots(1, 2, figsize=(9.2, 3.8),
                                         constrained_layout=True)
    ax_mav.plot(steps, [r.ordered_mav for r in records], "o--", color="0.45",
                label="ordered")
    ax_mav.plot(steps, [r.best_mav for r in records], "s-", color="tab:red",
                label="best sampled map")
    if points:
        ps, vs, es = zip(*points)
        ax_mav.errorbar(ps, vs, yerr=es, fmt="D", color="tab:blue", capsize=3,
                        markersize=4, label="count estimate")
    ax_mav.set_xlabel("step")
    ax_mav.set_ylabel("maximal violation")
    ax_mav.legend(fontsize=8)
    ax_tot.plot(steps, [r.ordered_total for r in records], "o--", color="0.45",
                label="ordered")
    ax_tot.plot(steps, [r.best_total for r in records], "s-", color="tab:red",
                label="best sampled map")
    ax_tot.set_xlabel("step")
    ax_tot.set_ylabel("total violation")
    ax_tot.legend(fontsize=8)
    if title:
        fig.suptitle(title, fontsize=11)
    for ax in (ax_mav, ax_tot):
        ax.set_xticks(steps if len(steps) <= 16 else steps[1::2])
        ax.grid(alpha=0.25)
    _save(fig, path)


def save_sweep_figure(path, table, title: str = "") -> None:
    """Normalized Total Violation vs dilution, one error-bar curve per step.

    ``table`` rows are dicts with p, normalized_total_violation,
    normalized_std_error, and step keys (the sweep CSV schema).
    """
    fig, ax = plt.subplots(figsize=(5.4, 4.0), constrained_layout=True)
    for step in sorted({int(r["step"]) for r in table}):
        rows = sorted((r for r in table if int(r["step"]) == step),
                      key=lambda r: float(r["p"]))
        ax.errorbar([float(r["p"]) for r in rows],
                    [float(r["normalized_total_violation"]) for r in rows],
                    yerr=[float(r["normalized_std_error"]) for r in rows],
                    marker="o", capsize=3, label=f"{step} steps")
    ax.set_xlabel("dilution p")
    ax.set_ylabel("total violation (normalized to p=0)")
    ax.grid(alpha=0.25)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title, fontsize=10)
    _save(fig, path)
