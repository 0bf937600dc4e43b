"""Cosine queries over trained input vectors and the ``.s2v`` model file.

Model file layout (all little-endian)::

    b"S2V1"
    u32 V, u32 n, u32 window, u32 negatives, u64 seed, f32 initial_lr
    V x { u16 pitch_count, pitch_count x u8 pitch, u64 corpus_count }
    V*n f32 input vectors, row-major
    V*n f32 output vectors, row-major
    optional trailer: b"CFGJ", u32 length, UTF-8 JSON of the full TrainingConfig

Readers that only know the core layout can stop after the output matrix.
"""

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ModelFormatError, TruncatedModelError
from .sgns import EmbeddingModel, TrainingConfig
from .vocabulary import Vocabulary

MAGIC = b"S2V1"
CONFIG_MAGIC = b"CFGJ"
_HEADER = struct.Struct("<IIIIQf")


@dataclass(frozen=True)
class QueryResult:
    token_id: int
    word: tuple
    score: float
    count: int


def cosine_similarity(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise DataError("undefined similarity: zero-norm vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def cosine_scores(matrix, query):
    """Cosine of every row of ``matrix`` with ``query``; NaN where a row has zero norm."""
    matrix = np.asarray(matrix, dtype=np.float64)
    query = np.asarray(query, dtype=np.float64)
    qn = np.linalg.norm(query)
    if qn == 0:
        raise DataError("undefined similarity: zero-norm query vector")
    norms = np.linalg.norm(matrix, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        scores = (matrix @ query) / (norms * qn)
    scores[norms == 0] = np.nan
    return np.clip(scores, -1.0, 1.0)


def nearest_neighbors(model, query, top_n=10, exclude_self=True):
    """Exhaustive cosine scan of the input vectors.

    Results are ordered by descending score, ties by ascending token id.
    Zero-norm vectors never appear.
    """
    vocab = model.vocabulary
    if not 0 <= query < len(vocab):
        raise DataError(f"token id {query} outside vocabulary of size {len(vocab)}")
    if top_n < 1:
        raise DataError("top_n must be >= 1")
    scores = cosine_scores(model.input_vectors, model.input_vectors[query])
    candidates = np.flatnonzero(~np.isnan(scores))
    if exclude_self:
        candidates = candidates[candidates != query]
    order = candidates[np.lexsort((candidates, -scores[candidates]))][:top_n]
    return [QueryResult(int(i), vocab.words[i], float(scores[i]), vocab.counts[i]) for i in order]


def overlap_hints(vocab, word, limit=5):
    """Vocabulary words sharing the most pitches with ``word`` (Jaccard), best first."""
    target = set(word)

    def jaccard(w):
        union = target | set(w)
        return len(target & set(w)) / len(union) if union else 1.0

    ranked = sorted(range(len(vocab)), key=lambda i: (-jaccard(vocab.words[i]), i))
    return [vocab.words[i] for i in ranked[:limit]]


def dump_model(model):
    vocab, cfg = model.vocabulary, model.config
    v, n = model.input_vectors.shape
    parts = [MAGIC, _HEADER.pack(v, n, cfg.window, cfg.negatives, cfg.seed, cfg.initial_lr)]
    for word, count in zip(vocab.words, vocab.counts):
        parts.append(struct.pack("<H", len(word)) + bytes(word) + struct.pack("<Q", count))
    for matrix in (model.input_vectors, model.output_vectors):
        parts.append(np.ascontiguousarray(matrix, dtype="<f4").tobytes())
    blob = json.dumps(cfg.to_dict(), sort_keys=True).encode("utf-8")
    parts.append(CONFIG_MAGIC + struct.pack("<I", len(blob)) + blob)
    return b"".join(parts)


def save_model(model, path):
    with open(path, "wb") as fh:
        fh.write(dump_model(model))


class _Cursor:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise TruncatedModelError(len(self.data))
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))


def parse_model(data):
    cur = _Cursor(bytes(data))
    if len(data) < len(MAGIC) or cur.take(len(MAGIC)) != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    v, n, window, negatives, seed, initial_lr = cur.unpack("<IIIIQf")
    words, counts = [], []
    for _ in range(v):
        (m,) = cur.unpack("<H")
        words.append(tuple(cur.take(m)))
        counts.append(cur.unpack("<Q")[0])
    matrices = []
    for _ in range(2):
        raw = cur.take(4 * v * n)
        matrices.append(np.frombuffer(raw, dtype="<f4").astype(np.float32).reshape(v, n))
    config_fields = dict(dims=n, window=window, negatives=negatives, seed=seed,
                         initial_lr=float(initial_lr))
    if cur.pos < len(cur.data):
        if cur.take(4) != CONFIG_MAGIC:
            raise ModelFormatError(f"unknown trailer at offset {cur.pos - 4}")
        (length,) = cur.unpack("<I")
        config_fields.update(json.loads(cur.take(length).decode("utf-8")))
        if cur.pos != len(cur.data):
            raise ModelFormatError(f"trailing bytes after offset {cur.pos}")
    config_fields["lr_floor"] = min(config_fields.get("lr_floor", 1e-4), config_fields["initial_lr"])
    return EmbeddingModel(matrices[0], matrices[1], Vocabulary(words, counts),
                          TrainingConfig.from_dict(config_fields))


def load_model(path):
    with open(path, "rb") as fh:
        return parse_model(fh.read())
