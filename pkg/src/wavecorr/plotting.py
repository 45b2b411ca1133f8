"""Static figures written next to the CSV outputs.

Figures are built on :class:`matplotlib.figure.Figure` directly (no pyplot
state), so rendering is thread-safe and never touches a display.
"""

from __future__ import annotations

import matplotlib
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .windows import DynamicsResult, EppsRow, scale_label

# fixed salt and no date stamp keep SVG output byte-stable across runs
matplotlib.rcParams["svg.hashsalt"] = "wavecorr"
_SAVE_KW = {"metadata": {"Date": None}}


def _new(ncols: int = 1, nrows: int = 1, width: float = 7.0, height: float = 4.3):
    fig = Figure(figsize=(width, height))
    FigureCanvasAgg(fig)
    axes = fig.subplots(nrows, ncols, squeeze=False)
    return fig, axes


def _save(fig: Figure, path) -> None:
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)


def plot_dynamics(dyn: DynamicsResult, path, ranks=(1, 2, 3)) -> None:
    """One panel per scale; the k-th largest eigenvalue against window start."""
    n = len(dyn.scales)
    fig, axes = _new(1, n, width=7.0, height=max(2.0, 1.8 * n))
    for ax, s in zip(axes[:, 0], dyn.scales):
        for k in ranks:
            if k <= len(dyn.asset_ids):
                ax.plot(dyn.window_starts, dyn.largest(s, k), lw=1.0, label=f"rank {k}")
        ax.set_ylabel(f"{scale_label(s)}")
        ax.grid(alpha=0.3)
    axes[0, 0].set_title("largest eigenvalues by scale")
    axes[0, 0].legend(fontsize=7, loc="upper right")
    axes[-1, 0].set_xlabel("window start")
    _save(fig, path)


def plot_epps(rows: list[EppsRow], path) -> None:
    """Average correlation and leading eigenvalue across scales."""
    fig, axes = _new(2, 1, width=8.0, height=3.5)
    wavelet = [r for r in rows if r.scale != "raw"]
    x = [r.horizon for r in wavelet]
    axes[0, 0].plot(x, [r.avg_corr for r in wavelet], "o-")
    axes[0, 0].set_ylabel("average correlation")
    axes[0, 1].plot(x, [r.top_eigenvalues[0] for r in wavelet], "s-")
    axes[0, 1].set_ylabel("largest eigenvalue")
    for ax in axes[0]:
        ax.set_xscale("log", base=2)
        ax.set_xlabel("scale (base periods)")
        ax.grid(alpha=0.3)
    _save(fig, path)


def plot_frontiers(frontiers: dict, path) -> None:
    """Risk-return curve per scale, GMV marked."""
    fig, axes = _new()
    ax = axes[0, 0]
    for s, fr in frontiers.items():
        line, = ax.plot([p.stdev for p in fr.points], [p.target_return for p in fr.points],
                        lw=1.2, label=scale_label(s))
        ax.plot([fr.gmv.stdev], [fr.gmv.target_return], "o", color=line.get_color(), ms=3)
    ax.set_xlabel("portfolio standard deviation (per period)")
    ax.set_ylabel("expected return (per period)")
    ax.legend(title="scale", fontsize=7)
    ax.grid(alpha=0.3)
    _save(fig, path)
