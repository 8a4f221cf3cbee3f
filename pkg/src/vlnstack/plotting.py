"""Report figures. Uses the non-interactive Agg backend and strips PNG metadata
so reruns produce identical files."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
}

_PNG_META = {"Software": None}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_sdt_sweep(table: Mapping[str, Sequence], path: str | Path, title: str = "") -> Path:
    """SR and SPL against success distance threshold, one line per agent mode."""
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, 2, figsize=(7.0, 2.8), sharex=True)
        for mode, rows in table.items():
            xs = [r.sdt for r in rows]
            axes[0].plot(xs, [r.sr for r in rows], marker="o", label=mode)
            axes[1].plot(xs, [r.spl for r in rows], marker="o", label=mode)
        for ax, name in zip(axes, ("SR (%)", "SPL (%)")):
            ax.set_xlabel("success distance threshold (m)")
            ax.set_ylabel(name)
            ax.set_ylim(0, 100)
            ax.grid(alpha=0.3)
        axes[1].legend(loc="lower right", frameon=False)
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        return _save(fig, path)


def plot_calibration(scores: Sequence[float], tau: float, epsilon: float, path: str | Path) -> Path:
    """Histogram of calibration nonconformity scores with the fitted threshold."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.0, 2.8))
        ax.hist(scores, bins=40, range=(0.0, 1.0), color="0.6")
        ax.axvline(tau, color="C3", label=f"tau = {tau:.3f} (eps = {epsilon:g})")
        ax.set_xlabel("nonconformity 1 - p(optimal)")
        ax.set_ylabel("count")
        ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def plot_set_sizes(sizes: Mapping[str, Sequence[int]], path: str | Path) -> Path:
    """Distribution of prediction-set cardinalities per mode."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.0, 2.8))
        top = max((max(v) for v in sizes.values() if len(v)), default=1)
        bins = [b - 0.5 for b in range(1, top + 2)]
        for mode, v in sizes.items():
            if len(v):
                ax.hist(v, bins=bins, histtype="step", label=mode)
        ax.set_xlabel("|prediction set|")
        ax.set_ylabel("decisions")
        ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)
