import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from slice2vec.embedding import (
    cosine_similarity,
    dump_model,
    load_model,
    nearest_neighbors,
    overlap_hints,
    parse_model,
    save_model,
)
from slice2vec.errors import DataError, ModelFormatError, TruncatedModelError
from slice2vec.sgns import EmbeddingModel, TrainingConfig, init_model, train
from slice2vec.vocabulary import Vocabulary, build_vocabulary

from oracles import cosine
from synthetic import community_corpus


def model_from_vectors(vectors):
    vectors = np.asarray(vectors, dtype=np.float32)
    vocab = Vocabulary([(i,) for i in range(len(vectors))], [1] * len(vectors))
    cfg = TrainingConfig(dims=vectors.shape[1])
    return EmbeddingModel(vectors, np.zeros_like(vectors), vocab, cfg)


class TestCosine:
    def test_identical(self):
        a = [0.3, -2.0, 5.5]
        assert abs(cosine_similarity(a, a) - 1.0) < 1e-12

    def test_orthogonal(self):
        assert cosine_similarity([1, 0], [0, 1]) == 0.0

    def test_diagonal(self):
        assert cosine_similarity([1, 0], [1, 1]) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert cosine_similarity([1, 0], [1, 1]) == pytest.approx(0.70710678, abs=1e-8)

    def test_zero_norm(self):
        with pytest.raises(DataError, match="undefined similarity"):
            cosine_similarity([0, 0], [1, 0])

    vec = arrays(np.float64, 5, elements=st.floats(-10, 10)).filter(lambda v: np.linalg.norm(v) > 1e-3)

    @settings(max_examples=100)
    @given(vec, vec, st.floats(1e-3, 1e3))
    def test_properties(self, a, b, scale):
        c = cosine_similarity(a, b)
        assert c == cosine_similarity(b, a)
        assert abs(c) <= 1 + 1e-9
        assert abs(cosine_similarity(scale * a, b) - c) < 1e-9


class TestNearest:
    def test_duplicate_vector_wins(self):
        model = model_from_vectors([[1, 0], [1, 0], [0, 1]])
        (hit,) = nearest_neighbors(model, 0, top_n=1)
        assert hit.token_id == 1 and hit.score == pytest.approx(1.0)

    def test_include_self_first(self, rng):
        model = model_from_vectors(rng.normal(size=(20, 4)))
        for q in (0, 7, 19):
            first = nearest_neighbors(model, q, top_n=3, exclude_self=False)[0]
            assert first.token_id == q and first.score == pytest.approx(1.0)

    def test_ties_by_ascending_id(self):
        model = model_from_vectors([[1, 0], [0, 1], [0, 2], [0, 3]])
        hits = nearest_neighbors(model, 1, top_n=3)
        assert [h.token_id for h in hits] == [2, 3, 0]

    def test_zero_vectors_skipped(self):
        model = model_from_vectors([[1, 0], [0, 0], [0, 0]])
        assert nearest_neighbors(model, 0, top_n=5) == []

    def test_matches_brute_force(self, rng):
        vectors = rng.normal(size=(50, 6))
        model = model_from_vectors(vectors)
        w = model.input_vectors.astype(np.float64)
        for q in range(0, 50, 7):
            brute = sorted(((-cosine(w[q], w[j]), j) for j in range(50) if j != q))
            got = nearest_neighbors(model, q, top_n=49)
            assert [h.token_id for h in got] == [j for _, j in brute]
            assert np.allclose([h.score for h in got], [-s for s, _ in brute], atol=1e-12)

    def test_top_v_minus_one_returns_everyone_once(self, rng):
        model = model_from_vectors(rng.normal(size=(12, 3)))
        hits = nearest_neighbors(model, 4, top_n=11)
        assert sorted(h.token_id for h in hits) == [i for i in range(12) if i != 4]

    def test_bad_query(self):
        with pytest.raises(DataError):
            nearest_neighbors(model_from_vectors([[1, 0], [0, 1]]), 5)


def trained_model():
    vocab, seqs = community_corpus(seed=2, n_pieces=4, length=40)
    vocab = Vocabulary([(60 + i % 12, 40 + i) for i in range(len(vocab))], vocab.counts)
    cfg = TrainingConfig(dims=8, epochs=1, seed=123456789012345)
    return train(init_model(vocab, cfg), seqs, cfg)[0]


class TestPersistence:
    def test_round_trip_bit_exact(self, tmp_path):
        model = trained_model()
        path = tmp_path / "m.s2v"
        save_model(model, path)
        back = load_model(path)
        assert back.input_vectors.tobytes() == model.input_vectors.tobytes()
        assert back.output_vectors.tobytes() == model.output_vectors.tobytes()
        assert back.vocabulary.words == model.vocabulary.words
        assert back.vocabulary.counts == model.vocabulary.counts
        assert back.config == model.config
        assert dump_model(back) == path.read_bytes()

    def test_core_layout(self):
        model = model_from_vectors([[1.5, -2.0], [0.25, 4.0]])
        model.vocabulary = Vocabulary([(60, 64), ()], [3, 1])
        data = dump_model(model)
        assert data[:4] == b"S2V1"
        v, n = np.frombuffer(data[4:12], "<u4")
        assert (v, n) == (2, 2)
        # vocab block starts after the 32-byte header
        assert data[32:34] == b"\x02\x00" and data[34:36] == bytes([60, 64])
        matrix_start = 32 + (2 + 2 + 8) + (2 + 0 + 8)
        assert np.frombuffer(data[matrix_start:matrix_start + 16], "<f4").tolist() == [1.5, -2.0, 0.25, 4.0]

    def test_without_trailer(self):
        model = model_from_vectors([[1.0, 0.0], [0.0, 1.0]])
        data = dump_model(model)
        core = data[:data.index(b"CFGJ")]
        back = parse_model(core)
        assert back.config.dims == 2 and back.config.window == model.config.window
        assert back.input_vectors.tobytes() == model.input_vectors.tobytes()

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.s2v"
        path.write_bytes(b"NOPE" + b"\x00" * 40)
        with pytest.raises(ModelFormatError, match="not a model file"):
            load_model(path)

    def test_truncated(self):
        data = dump_model(trained_model())
        with pytest.raises(TruncatedModelError, match="unexpected end of file at offset"):
            parse_model(data[:len(data) // 2])


def test_overlap_hints():
    vocab = Vocabulary([(60, 64, 67), (62,), (60, 64)], [1, 1, 1])
    assert overlap_hints(vocab, (60, 64, 69), limit=2) == [(60, 64), (60, 64, 67)]
