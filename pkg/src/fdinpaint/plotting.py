"""Figures written next to the CSV outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib
import matplotlib.ticker

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _finish(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_energy_trend(curves: dict, path, title: str = "total energy per scan") -> Path:
    """One line per labelled run; ``curves`` maps label -> per-scan totals."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, values in curves.items():
        scans = np.arange(1, len(values) + 1)
        ax.plot(scans, values, marker="o", label=label)
    ax.set_xlabel("scan")
    ax.set_ylabel("total E_T")
    ax.set_title(title)
    ax.xaxis.get_major_locator().set_params(integer=True)
    if len(curves) > 1:
        ax.legend()
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def plot_equivalence(report, path) -> Path:
    """Tie counts (log scale) and trustability against support side."""
    fig, (ax_t, ax_c) = plt.subplots(1, 2, figsize=(9, 3.5))
    for variant in report.variants():
        rows = [r for r in report.rows if r.variant == variant]
        sides = [r.side for r in rows]
        ax_t.plot(sides, [r.ties for r in rows], marker="o", label=variant)
        ax_c.plot(sides, [r.trustability for r in rows], marker="o", label=variant)
    ax_t.set_yscale("log")
    ax_t.yaxis.set_major_locator(matplotlib.ticker.LogLocator(subs=(1.0, 2.0, 5.0)))
    ax_t.yaxis.set_major_formatter(matplotlib.ticker.FuncFormatter(lambda v, _: f"{v:g}"))
    ax_t.yaxis.set_minor_formatter(matplotlib.ticker.NullFormatter())
    ax_t.set_xlabel("support side")
    ax_t.set_ylabel("tied candidates")
    ax_c.set_xlabel("support side")
    ax_c.set_ylabel("trustability")
    ax_c.set_ylim(-0.02, 1.02)
    for ax in (ax_t, ax_c):
        ax.set_xticks(report.sides())
        ax.grid(alpha=0.3)
        ax.legend()
    return _finish(fig, path)


def plot_panels(panels: dict, path, maxval: int = 255) -> Path:
    """Side-by-side grey (or RGB) images, e.g. input with the hole and the result."""
    fig, axes = plt.subplots(1, len(panels), figsize=(3 * len(panels), 3.2))
    axes = np.atleast_1d(axes)
    for ax, (label, data) in zip(axes, panels.items()):
        data = np.asarray(data)
        if data.ndim == 3:
            ax.imshow(data.astype(np.float64) / maxval)
        else:
            ax.imshow(data, cmap="gray", vmin=0, vmax=maxval, interpolation="nearest")
        ax.set_title(label)
        ax.set_axis_off()
    return _finish(fig, path)
