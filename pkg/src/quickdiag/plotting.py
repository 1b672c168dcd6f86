"""Delay-versus-mean figures rendered next to the CSV reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (4.0, 2.8),
    "savefig.dpi": 150,
    "svg.hashsalt": "quickdiag",
}

MARKERS = ["o", "s", "^", "v", "D", "x"]


def plot_delays(rows, change_type: int, path) -> Path:
    """Line plot of ``delay_mean`` (with 2-SE bars) against ``phi`` per algorithm."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    algorithms = list(dict.fromkeys(r["algorithm"] for r in rows))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for n, algo in enumerate(algorithms):
            sel = [r for r in rows if r["algorithm"] == algo]
            ax.errorbar(
                [r["phi"] for r in sel],
                [r["delay_mean"] for r in sel],
                yerr=[2 * r["delay_se"] for r in sel],
                marker=MARKERS[n % len(MARKERS)],
                markersize=3,
                capsize=2,
                linewidth=1,
                label=algo,
            )
        ax.set_xlabel(r"$\varphi_1 = \varphi_2$")
        ax.set_ylabel("detection and isolation delay")
        ax.set_title(f"change type {change_type}")
        ax.grid(alpha=0.3)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None} if path.suffix == ".png" else None)
        plt.close(fig)
    return path
