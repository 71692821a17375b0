"""Figure rendering for the plot-data report path.

Every plot-data kind has a renderer that draws the same series the CSV
export carries, so a report directory holds the delimited data and a
PNG side by side. Rendering is headless (Agg backend).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def render_rip_prb(prb_index, rip_positive, rip_negative, png_path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(prb_index, rip_positive, "o-", ms=3, label="interference present")
    ax.plot(prb_index, rip_negative, "s-", ms=3, label="interference absent")
    ax.set_xlabel("user-plane PRB index")
    ax.set_ylabel("RIP (dBm)")
    ax.legend()
    ax.grid(True, ls=":")
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def render_roc(rows, png_path) -> None:
    """`rows` as returned by dataio.read_roc_csv (one table, all curves)."""
    fig, ax = plt.subplots(figsize=(5, 4.5))
    by_eps: dict[float, list] = {}
    for r in rows:
        by_eps.setdefault(r["eps_linear"], []).append((r["fpr"], r["tpr"]))
    for eps_lin, pts in sorted(by_eps.items(), reverse=True):
        pts = sorted(pts)
        ax.plot(*zip(*pts), "o-", ms=4, label=f"R² threshold {eps_lin:g}")
    ax.plot([0, 1], [0, 1], "k--", lw=0.8, label="chance")
    ax.set_xlabel("false-positive rate")
    ax.set_ylabel("true-positive rate")
    ax.legend(fontsize=8)
    ax.grid(True, ls=":")
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def render_confusion(tp: int, fp: int, tn: int, fn: int, png_path) -> None:
    fig, ax = plt.subplots(figsize=(4, 3.5))
    counts = [[tp, fn], [fp, tn]]
    ax.imshow(counts, cmap="Blues")
    for i in range(2):
        for j in range(2):
            ax.text(j, i, str(counts[i][j]), ha="center", va="center")
    ax.set_xticks([0, 1], ["flagged", "not flagged"])
    ax.set_yticks([0, 1], ["positive", "negative"])
    ax.set_xlabel("prediction")
    ax.set_ylabel("label")
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def render_runtime(n_prb_values, normalized_runtime, png_path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(n_prb_values, normalized_runtime, "o-", label="measured")
    ax.set_xlabel("number of PRBs")
    ax.set_ylabel("normalized run time")
    ax.grid(True, ls=":")
    ax.legend()
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
