"""Swap slices of a piece for their nearest embedding neighbours and render MIDI."""

import logging
from dataclasses import dataclass

from .analysis import tonnetz_distance
from .embedding import nearest_neighbors
from .errors import DataError, VocabularyError
from .midi import NoteEvent, write_smf
from .slicer import Slice

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReplacementRow:
    position: int
    original: tuple
    replacement: tuple
    cosine: float
    tonnetz_distance: float  # None when either slice is empty
    held_conflicts: tuple


def replace_slices(score, model, positions):
    """Replace each slice at ``positions`` by the top-1 cosine neighbour of its word.

    A replacement pitch keeps its held flag only if the original slice held
    it and the (possibly modified) preceding slice still sounds it.  Pitches
    held in the original whose sustain is broken that way, or which the
    replacement drops, are reported as held conflicts.

    Returns ``(new_score, rows)``; slices outside ``positions`` are the same
    objects as in ``score``.
    """
    vocab = model.vocabulary
    out = list(score)
    rows = []
    for pos in sorted(set(positions)):
        if not 0 <= pos < len(score):
            raise DataError(f"position {pos} outside score of {len(score)} slices")
        original = score[pos]
        if not original.word:
            log.warning("position %d is an empty slice; skipped", pos)
            continue
        if original.word not in vocab:
            raise VocabularyError(f"slice at position {pos} {list(original.word)} is not in the vocabulary")
        hits = nearest_neighbors(model, vocab.lookup(original.word), top_n=1)
        if not hits:
            raise DataError(f"no neighbour with a non-zero vector for position {pos}")
        best = hits[0]
        previous = set(out[pos - 1].word) if pos > 0 else set()
        originally_held = set(original.held_pitches)
        held = tuple(p in originally_held and p in previous for p in best.word)
        conflicts = tuple(sorted(p for p in originally_held
                                 if p not in previous or p not in best.word))
        out[pos] = Slice(best.word, held, original.start_tick, original.end_tick)
        distance = tonnetz_distance(original.word, best.word) if best.word else None
        rows.append(ReplacementRow(pos, original.word, best.word, best.score, distance, conflicts))
    return out, rows


def score_to_notes(score, slice_ticks, velocity=80):
    """Merge held continuations into sustained notes; every other pitch lasts one slice."""
    notes = []
    active = {}
    for k, s in enumerate(score):
        start = k * slice_ticks
        sounding = dict(zip(s.word, s.held))
        for pitch in list(active):
            if pitch not in sounding or not sounding[pitch]:
                onset = active.pop(pitch)
                notes.append(NoteEvent(onset, pitch, start - onset, 0, velocity))
        for pitch, held in sounding.items():
            if pitch not in active:
                active[pitch] = start
    end = len(score) * slice_ticks
    for pitch, onset in active.items():
        notes.append(NoteEvent(onset, pitch, end - onset, 0, velocity))
    return sorted(notes)


def render_midi(score, slice_ticks, path=None, ticks_per_quarter=480, key_signature=None):
    """Render a slice sequence as a format-0 SMF; writes ``path`` when given."""
    if slice_ticks < 1:
        raise DataError("slice_ticks must be >= 1")
    data = write_smf([score_to_notes(score, slice_ticks)], ticks_per_quarter, key_signature)
    if path is not None:
        with open(path, "wb") as fh:
            fh.write(data)
    return data
