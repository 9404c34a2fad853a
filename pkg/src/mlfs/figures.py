"""Report figures rendered next to the benchmark's delimited output."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .bench import METRIC_FIELDS


def render_report_figures(cells, out_dir):
    """One PNG per metric: value vs. selected feature count, a line per grid point.

    Values are averaged over repetitions. Failed cells are ignored.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    good = [c for c in cells if "metrics" in c]
    if not good:
        return []

    series = {}
    for cell in good:
        combo = (cell["alpha"], cell["beta"], cell["rho"])
        series.setdefault(combo, {}).setdefault(cell["l"], []).append(cell["metrics"])

    written = []
    for metric in METRIC_FIELDS:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for combo in sorted(series):
            by_l = series[combo]
            xs = sorted(by_l)
            ys = [sum(r[metric] for r in by_l[l]) / len(by_l[l]) for l in xs]
            alpha, beta, rho = combo
            ax.plot(xs, ys, marker="o", markersize=3, linewidth=1,
                    label=f"alpha={alpha:g}, beta={beta:g}, rho={rho:g}")
        ax.set_xlabel("selected features")
        ax.set_ylabel(metric.replace("_", " "))
        ax.grid(True, alpha=0.3)
        if len(series) <= 12:
            ax.legend(fontsize=7, loc="best")
        fig.tight_layout()
        path = out / f"{metric}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
