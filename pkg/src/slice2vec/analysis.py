"""Triad labels for slices and a register-aware tonnetz distance.

The tonnetz here is a graph on absolute MIDI pitches 0-127 in which each
pitch is joined to the pitches a perfect fifth, a major third and a minor
third above and below it.  The step distance between two pitches is the
length of the shortest path, so octave equivalents are *not* identical
(C4 to C5 takes three major thirds).
"""

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DataError
from .midi import MAJOR, MINOR, parse_pitch_class, pitch_class_name

TONNETZ_MOVES = (7, -7, 4, -4, 3, -3)

TRIADS = {MAJOR: (0, 4, 7), MINOR: (0, 3, 7)}


@dataclass(frozen=True)
class ChordLabel:
    root: int = 0
    quality: str = MAJOR
    match_score: int = 0
    labeled: bool = False

    @property
    def name(self):
        if not self.labeled:
            return "N"
        return pitch_class_name(self.root) + ("m" if self.quality == MINOR else "")


def parse_chord_name(text):
    """``"Eb"`` -> (3, major); ``"Ebm"`` or ``"Eb:minor"`` -> (3, minor)."""
    text = text.strip()
    if ":" in text:
        root, _, quality = text.partition(":")
        quality = quality.strip().lower()
        if quality not in TRIADS:
            raise DataError(f"unknown chord quality in {text!r}")
        return parse_pitch_class(root), quality
    if len(text) > 1 and text.endswith("m"):
        return parse_pitch_class(text[:-1]), MINOR
    return parse_pitch_class(text), MAJOR


def label_chord(word):
    """Best-matching major or minor triad for a slice.

    Templates are scored by how many of their pitch classes occur in the
    slice.  Ties prefer fewer slice pitch classes outside the template, then
    a root equal to the bass pitch class, then the lowest root number.
    """
    if not word:
        return ChordLabel()
    classes = {p % 12 for p in word}
    bass = min(word) % 12
    best_key, best = None, None
    for root in range(12):
        for quality in (MAJOR, MINOR):
            template = {(root + i) % 12 for i in TRIADS[quality]}
            matched = len(classes & template)
            key = (-matched, len(classes - template), root != bass, root)
            if best_key is None or key < best_key:
                best_key, best = key, (root, quality, matched)
    root, quality, matched = best
    return ChordLabel(root, quality, matched, matched > 0)


def _bfs(source):
    dist = np.full(128, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        p = queue.popleft()
        for move in TONNETZ_MOVES:
            q = p + move
            if 0 <= q < 128 and dist[q] < 0:
                dist[q] = dist[p] + 1
                queue.append(q)
    return dist


@lru_cache(maxsize=1)
def step_table():
    """128 x 128 shortest-path step counts; read-only once built."""
    table = np.vstack([_bfs(p) for p in range(128)])
    table.setflags(write=False)
    return table


def pitch_steps(p, q):
    return int(step_table()[p, q])


def tonnetz_distance(a, b):
    """Mean step distance over all cross pairs (p in a, q in b)."""
    if not a or not b:
        raise DataError("tonal distance undefined for empty slice")
    table = step_table()
    return float(table[np.ix_(list(a), list(b))].mean())


def tonnetz_coordinate(pitch):
    """Lattice position ``(fifths, major_thirds, register)`` of a MIDI pitch.

    The pitch class is written as ``7 * fifths + 4 * thirds`` (mod 12) with
    ``fifths`` in 0..3 and ``thirds`` in 0..2, and the register is the MIDI
    octave.  :func:`pitch_from_coordinate` inverts it.
    """
    pc = pitch % 12
    for fifths in range(4):
        for thirds in range(3):
            if (7 * fifths + 4 * thirds) % 12 == pc:
                return fifths, thirds, pitch // 12
    raise AssertionError("unreachable: fifths and thirds generate all 12 classes")


def pitch_from_coordinate(coord):
    fifths, thirds, register = coord
    return register * 12 + (7 * fifths + 4 * thirds) % 12
