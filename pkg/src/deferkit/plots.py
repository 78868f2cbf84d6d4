"""Figure rendering for the report path: reliability diagram and ARC plot."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_reliability(rows, path, title="Reliability diagram"):
    """Bar reliability diagram with both weighting schemes.

    rows: dicts with lower/upper/count/mean_confidence/mean_label/
    ece_weight/gamma_weight (the reliability table schema).
    """
    fig, (ax, axw) = plt.subplots(
        2, 1, figsize=(6, 7), sharex=True, gridspec_kw={"height_ratios": [3, 1]}
    )
    centers = [(r["lower"] + r["upper"]) / 2 for r in rows]
    width = rows[0]["upper"] - rows[0]["lower"] if rows else 0.1
    accs = [r["mean_label"] if r["mean_label"] is not None else 0.0 for r in rows]
    confs = [r["mean_confidence"] if r["mean_confidence"] is not None else 0.0 for r in rows]

    ax.bar(centers, accs, width=width * 0.9, label="empirical label rate", color="#4878cf")
    ax.plot([0, 1], [0, 1], "k--", lw=1, label="perfect calibration")
    ax.scatter(centers, confs, color="#d65f5f", zorder=3, s=18, label="mean confidence")
    ax.set_ylabel("label rate")
    ax.set_ylim(0, 1)
    ax.set_title(title)
    ax.legend(fontsize=8)

    axw.bar([c - width * 0.2 for c in centers], [r["ece_weight"] for r in rows],
            width=width * 0.35, label="mass weight", color="#4878cf")
    axw.bar([c + width * 0.2 for c in centers], [r["gamma_weight"] for r in rows],
            width=width * 0.35, label="blended weight", color="#6acc65")
    axw.set_xlabel("confidence")
    axw.set_ylabel("bin weight")
    axw.legend(fontsize=8)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_arc(points, path, title="Accuracy-rejection curve", label=None):
    """points: (rejection rate, accuracy) pairs, or a dict of named curves."""
    fig, ax = plt.subplots(figsize=(6, 4))
    curves = points if isinstance(points, dict) else {label or "curve": points}
    for name, pts in curves.items():
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=".", ms=3, label=name)
    ax.set_xlabel("rejection rate")
    ax.set_ylabel("retained accuracy")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
