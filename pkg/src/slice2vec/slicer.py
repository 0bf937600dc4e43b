"""Cut a piece into equal-length slices of sounding pitches.

A slice's *word* is the ascending tuple of MIDI pitches sounding anywhere in
its window, registers kept distinct.  Each pitch carries a held flag: true
when the note started before the window and sustains into it.
"""

from collections import Counter
from dataclasses import dataclass

from .errors import DataError

DEFAULT_IOI_THRESHOLD = 0.05

EMPTY_WORD = ()


def make_word(pitches):
    """Normalise an iterable of pitches into a slice word (sorted, unique)."""
    word = tuple(sorted(set(int(p) for p in pitches)))
    if word and not (0 <= word[0] and word[-1] <= 127):
        raise DataError(f"pitch out of MIDI range in {word}")
    return word


@dataclass(frozen=True)
class Slice:
    word: tuple
    held: tuple
    start_tick: int
    end_tick: int

    def __post_init__(self):
        if len(self.held) != len(self.word):
            raise ValueError("held flags must align with pitches")

    @property
    def held_pitches(self):
        return tuple(p for p, h in zip(self.word, self.held) if h)


def inter_onset_intervals(piece):
    """Gaps between consecutive *distinct* onset times, across all tracks."""
    onsets = sorted({e.onset for e in piece.events})
    return [b - a for a, b in zip(onsets, onsets[1:])]


def compute_slice_duration(piece, threshold=DEFAULT_IOI_THRESHOLD):
    """Smallest inter-onset interval whose relative frequency exceeds ``threshold``.

    Falls back to the most common interval (smallest among equals) when no
    interval clears the threshold.
    """
    iois = inter_onset_intervals(piece)
    if not iois:
        raise DataError("cannot infer slice size: piece has fewer than 2 distinct onsets")
    counts = Counter(iois)
    total = len(iois)
    frequent = [d for d, n in counts.items() if n / total > threshold]
    if frequent:
        return min(frequent)
    top = max(counts.values())
    return min(d for d, n in counts.items() if n == top)


def slice_piece(piece, slice_ticks):
    """Tile ``[0, piece end)`` with windows of ``slice_ticks`` and collect sounding pitches.

    A note belongs to every window its ``[onset, onset + duration)`` interval
    touches.  If a pitch is struck inside a window it is not held there, even
    when an earlier note of the same pitch also reaches into the window.
    """
    if slice_ticks < 1:
        raise DataError("slice_ticks must be >= 1")
    end = piece.end_tick
    if end == 0:
        return []
    n_slices = -(-end // slice_ticks)
    # per window: pitch -> held flag
    windows = [dict() for _ in range(n_slices)]
    for e in piece.events:
        first = e.onset // slice_ticks
        last = (e.end - 1) // slice_ticks
        for k in range(first, last + 1):
            held = e.onset < k * slice_ticks
            members = windows[k]
            members[e.pitch] = members.get(e.pitch, True) and held
    slices = []
    for k, members in enumerate(windows):
        word = tuple(sorted(members))
        slices.append(Slice(word, tuple(members[p] for p in word),
                            k * slice_ticks, (k + 1) * slice_ticks))
    return slices
