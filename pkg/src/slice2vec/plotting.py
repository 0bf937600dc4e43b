"""Figures written to disk next to the CSV outputs.

Figures are built on a bare :class:`matplotlib.figure.Figure` so nothing
touches pyplot's global state or needs a display.  The output format follows
the file extension (``.png``, ``.svg``, ``.pdf``).
"""

import matplotlib
from matplotlib.figure import Figure

from .analysis import ChordLabel

# fixed salt + no date keeps SVG output byte-stable across runs
_RC = {
    "svg.hashsalt": "slice2vec",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
}

PALETTE = ["#2ca02c", "#1f77b4", "#222222", "#999999", "#d62728", "#9467bd",
           "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"]


def _save(fig, path):
    with matplotlib.rc_context(_RC):
        fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None,
                    bbox_inches="tight")


def _new(width=5.0, height=3.5):
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(width, height))
        return fig, fig.add_subplot(1, 1, 1)


def plot_loss(loss_logs, path, log_every=None):
    """``loss_logs``: mapping of run label -> list of (step, mean_loss)."""
    fig, ax = _new()
    for label, records in loss_logs.items():
        if not records:
            continue
        steps, losses = zip(*records)
        if log_every:
            steps = [s / log_every for s in steps]
        ax.plot(steps, losses, label=label, linewidth=1.2)
    ax.set_xlabel(f"step ({log_every} windows)" if log_every else "training windows")
    ax.set_ylabel("average loss")
    if len(loss_logs) > 1:
        ax.legend(frameon=False)
    _save(fig, path)


def plot_tsne(coords, labels, path, title=None):
    """Scatter of 2-D t-SNE coordinates, one colour per chord label name."""
    fig, ax = _new(4.5, 4.5)
    names = [lab.name if isinstance(lab, ChordLabel) else str(lab) for lab in labels]
    for i, name in enumerate(sorted(set(names), key=names.index)):
        idx = [j for j, other in enumerate(names) if other == name]
        ax.scatter(coords[idx, 0], coords[idx, 1], s=12, color=PALETTE[i % len(PALETTE)],
                   label=name, linewidths=0)
    ax.set_xticks([])
    ax.set_yticks([])
    ax.legend(frameon=False, loc="best")
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_ioi_histogram(histogram, path):
    """``histogram``: mapping of interval in ticks -> occurrences."""
    fig, ax = _new()
    intervals = sorted(histogram)
    ax.bar([str(i) for i in intervals], [histogram[i] for i in intervals], color=PALETTE[1])
    ax.set_xlabel("inter-onset interval (ticks)")
    ax.set_ylabel("count")
    for label in ax.get_xticklabels():
        label.set_rotation(90)
    _save(fig, path)


def plot_piano_roll(original, modified, path, changed=()):
    """Original and modified slice sequences stacked; changed slices shaded."""
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(8, 4.5))
        axes = fig.subplots(2, 1, sharex=True, sharey=True)
    changed = set(changed)
    for ax, score, title in zip(axes, (original, modified), ("original", "modified")):
        for k, s in enumerate(score):
            if k in changed:
                ax.axvspan(k, k + 1, color="#eeeeee", zorder=0)
            for pitch, held in zip(s.word, s.held):
                ax.broken_barh([(k, 1)], (pitch - 0.4, 0.8),
                               color=PALETTE[6] if held else PALETTE[1])
        ax.set_ylabel(f"{title}\nMIDI pitch")
    axes[-1].set_xlabel("slice")
    _save(fig, path)
