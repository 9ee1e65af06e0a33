"""Figure rendering for the analyze report path (written next to the CSV)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def boxplot_by_group(metric: str, grouped: dict[str, list[float]], out_path,
                     title: str = "") -> None:
    """One box per factor level for a single metric."""
    labels = list(grouped)
    data = [grouped[k] for k in labels]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(labels) + 2.0), 4.0))
    ax.boxplot(data, tick_labels=labels, showmeans=True)
    ax.set_ylabel(metric)
    ax.set_title(title or metric)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def grouped_boxplot(metric: str, nested: dict[str, dict[str, list[float]]],
                    out_path, title: str = "") -> None:
    """Boxes for factor A levels, clustered by factor B level."""
    a_levels = list(nested)
    b_levels = sorted({b for sub in nested.values() for b in sub})
    fig, ax = plt.subplots(figsize=(max(5.0, 1.0 * len(a_levels) * len(b_levels) + 2.0), 4.0))
    width = 0.8 / max(1, len(a_levels))
    colors = plt.cm.tab10.colors
    for ai, a in enumerate(a_levels):
        positions = [bi + ai * width for bi in range(len(b_levels))]
        data = [nested[a].get(b, []) for b in b_levels]
        boxes = ax.boxplot(data, positions=positions, widths=width * 0.9,
                           patch_artist=True, showmeans=True)
        for patch in boxes["boxes"]:
            patch.set_facecolor(colors[ai % len(colors)])
            patch.set_alpha(0.6)
    ax.set_xticks([bi + width * (len(a_levels) - 1) / 2 for bi in range(len(b_levels))])
    ax.set_xticklabels(b_levels)
    ax.set_ylabel(metric)
    ax.set_title(title or metric)
    handles = [plt.Line2D([], [], color=colors[ai % len(colors)], lw=6, alpha=0.6,
                          label=a) for ai, a in enumerate(a_levels)]
    ax.legend(handles=handles, fontsize=8)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
