"""File-level pipeline stages shared by the CLI and the tests."""

import logging
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .corpus import CorpusPiece
from .errors import DataError
from .midi import read_midi, transpose_to_reference, with_detected_key
from .slicer import DEFAULT_IOI_THRESHOLD, compute_slice_duration, slice_piece
from .vocabulary import build_vocabulary

log = logging.getLogger(__name__)

MIDI_SUFFIXES = (".mid", ".midi", ".smf")


def find_midi_files(paths):
    found = []
    for path in paths:
        if os.path.isdir(path):
            for root, _, names in os.walk(path):
                found.extend(os.path.join(root, n) for n in names
                             if n.lower().endswith(MIDI_SUFFIXES))
        elif os.path.exists(path):
            found.append(path)
        else:
            raise DataError(f"no such file or directory: {path}")
    return sorted(found)


def prepare_piece(path, key_override=None, ioi_threshold=DEFAULT_IOI_THRESHOLD):
    """Parse, key-normalise and slice one MIDI file.

    Returns ``(piece, slice_ticks, slices)`` with ``piece`` already in C major
    or A minor.
    """
    piece = transpose_to_reference(with_detected_key(read_midi(path), key_override))
    slice_ticks = compute_slice_duration(piece, ioi_threshold)
    return piece, slice_ticks, slice_piece(piece, slice_ticks)


def _ingest_one(args):
    path, key_override, ioi_threshold = args
    _, slice_ticks, slices = prepare_piece(path, key_override, ioi_threshold)
    return CorpusPiece(path, slice_ticks, slices)


def ingest(paths, key_override=None, ioi_threshold=DEFAULT_IOI_THRESHOLD, jobs=1):
    files = find_midi_files(paths)
    if not files:
        raise DataError("no MIDI files found")
    work = [(f, key_override, ioi_threshold) for f in files]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_ingest_one, work))
    return [_ingest_one(w) for w in work]


@dataclass
class CorpusStats:
    total_tokens: int
    vocabulary_size: int
    slice_ticks: dict = field(default_factory=dict)
    ioi_histogram: dict = field(default_factory=dict)

    def rows(self):
        yield "total_tokens", "", self.total_tokens
        yield "vocabulary_size", "", self.vocabulary_size
        for path, ticks in self.slice_ticks.items():
            yield "slice_ticks", path, ticks
        for ioi in sorted(self.ioi_histogram):
            yield "ioi_ticks", ioi, self.ioi_histogram[ioi]


def onset_intervals(piece):
    """Gaps between slices containing at least one freshly struck pitch, in ticks.

    The corpus file keeps onsets only to slice resolution, so this is the
    IOI histogram as the model sees it.
    """
    onset_slices = [k for k, s in enumerate(piece.slices) if s.word and not all(s.held)]
    return [(b - a) * piece.slice_ticks for a, b in zip(onset_slices, onset_slices[1:])]


def corpus_stats(pieces):
    if not pieces:
        raise DataError("empty corpus")
    vocab, _ = build_vocabulary([p.words for p in pieces])
    hist = Counter()
    for p in pieces:
        hist.update(onset_intervals(p))
    return CorpusStats(vocab.total_tokens, len(vocab),
                       {p.path: p.slice_ticks for p in pieces}, dict(hist))
