"""Token ids for slice words and skip-gram pair enumeration."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, VocabularyError


@dataclass
class Vocabulary:
    """Dense id <-> slice word bijection with corpus counts.

    Ids are ordered by descending count; equal counts keep first-appearance
    order.
    """

    words: list
    counts: list
    id_of: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.words = [tuple(w) for w in self.words]
        self.counts = [int(c) for c in self.counts]
        if len(self.words) != len(self.counts):
            raise ValueError("words and counts differ in length")
        self.id_of = {w: i for i, w in enumerate(self.words)}
        if len(self.id_of) != len(self.words):
            raise ValueError("duplicate word in vocabulary")

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return tuple(word) in self.id_of

    @property
    def total_tokens(self):
        return sum(self.counts)

    def lookup(self, word):
        try:
            return self.id_of[tuple(word)]
        except KeyError:
            raise VocabularyError(f"slice {list(word)} is not in the vocabulary") from None

    def encode(self, words):
        return np.array([self.lookup(w) for w in words], dtype=np.int64)

    def decode(self, ids):
        return [self.words[i] for i in ids]


def build_vocabulary(corpus, min_count=1):
    """Build a vocabulary from a list of word sequences (one per piece).

    Returns ``(vocab, sequences)`` with each sequence re-encoded as an int64
    array.  With ``min_count > 1`` rarer words are removed from the sequences
    entirely, which shortens them.
    """
    if not corpus:
        raise DataError("cannot build a vocabulary from an empty corpus")
    counts = {}
    for seq in corpus:
        for word in seq:
            word = tuple(word)
            counts[word] = counts.get(word, 0) + 1
    # dict preserves first appearance; sort is stable
    kept = [w for w, n in counts.items() if n >= min_count]
    kept.sort(key=lambda w: -counts[w])
    vocab = Vocabulary(kept, [counts[w] for w in kept])
    sequences = [
        np.array([vocab.id_of[tuple(w)] for w in seq if tuple(w) in vocab.id_of], dtype=np.int64)
        for seq in corpus
    ]
    return vocab, sequences


def generate_training_pairs(seq, window):
    """Yield ``(center, context)`` for every offset ``-window..window`` except 0.

    Pairs never run past either end of ``seq``; ordering is by position, then
    by offset.
    """
    if window < 1:
        raise DataError("window must be >= 1")
    n = len(seq)
    for t in range(n):
        for i in range(-window, window + 1):
            if i and 0 <= t + i < n:
                yield seq[t], seq[t + i]


def count_training_pairs(length, window):
    return sum(min(window, t) + min(window, length - 1 - t) for t in range(length))


def pair_arrays(seq, window):
    """Same pairs as :func:`generate_training_pairs`, as two int64 arrays."""
    seq = np.asarray(seq, dtype=np.int64)
    n = len(seq)
    if n < 2:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    positions = np.arange(n)
    offsets = np.array([i for i in range(-window, window + 1) if i])
    grid_t = np.repeat(positions, len(offsets))
    grid_c = grid_t + np.tile(offsets, n)
    valid = (grid_c >= 0) & (grid_c < n)
    return seq[grid_t[valid]], seq[grid_c[valid]]
