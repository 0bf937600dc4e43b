"""Acceptance checks; each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line."""

import itertools
import os
import time
from pathlib import Path

import numpy as np
import pytest

from slice2vec.analysis import label_chord, pitch_steps, tonnetz_distance
from slice2vec.cli import run
from slice2vec.embedding import dump_model, load_model, parse_model, save_model
from slice2vec.midi import parse_midi
from slice2vec.pipeline import prepare_piece
from slice2vec.remix import render_midi
from slice2vec.sgns import TrainingConfig, init_model, sgns_loss_and_grads, train
from slice2vec.slicer import slice_piece
from slice2vec.tsne import TsneConfig, conditional_affinities, tsne_embed

from conftest import MIDI_DIR, make_piece
from oracles import all_triads, central_difference, per_tick_slices
from synthetic import community_corpus, community_gap, markov_corpus


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return emit


def test_1_gradient_check(report):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n, k = int(rng.integers(1, 9)), int(rng.integers(1, 4))
        v, u_pos, u_neg = rng.normal(size=n), rng.normal(size=n), rng.normal(size=(k, n))
        flat = np.concatenate([v, u_pos, u_neg.ravel()])

        def loss(x):
            x = np.asarray(x)
            return sgns_loss_and_grads(x[:n], x[n:2 * n], x[2 * n:].reshape(k, n))[0]

        _, gv, gp, gn = sgns_loss_and_grads(v, u_pos, u_neg)
        analytic = np.concatenate([gv, gp, gn.ravel()])
        numeric = np.array(central_difference(loss, flat.tolist()))
        err = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
        worst = max(worst, err)
    elapsed = time.perf_counter() - start
    report(1, worst < 1e-4 and elapsed < 10, f"max relative error {worst:.2e}, {elapsed:.2f}s")


def test_2_two_community_separation(report):
    vocab, seqs = community_corpus(seed=0)
    config = TrainingConfig(dims=16, epochs=1, initial_lr=0.1, seed=1)
    start = time.perf_counter()
    model, log = train(init_model(vocab, config), seqs, config)
    elapsed = time.perf_counter() - start
    gap = community_gap(model)
    report(2, log[-1][0] == 10_000 and gap >= 0.3 and elapsed < 30,
           f"windows {log[-1][0]}, cosine gap {gap:.3f}, {elapsed:.2f}s")


def test_3_more_dimensions_fit_better(report):
    vocab, seqs = markov_corpus(seed=0)
    finals = {}
    for dims in (8, 64):
        config = TrainingConfig(dims=dims, epochs=30, initial_lr=0.05, seed=1)
        _, log = train(init_model(vocab, config), seqs, config)
        finals[dims] = float(np.mean([loss for _, loss in log[-3:]]))
    report(3, finals[64] <= finals[8], f"final loss n=8 {finals[8]:.4f}, n=64 {finals[64]:.4f}")


def test_4_slicing_oracle(report):
    rng = np.random.default_rng(77)
    mismatches = 0
    for _ in range(200):
        count = int(rng.integers(1, 21))
        notes = [(int(rng.integers(55, 67)), int(rng.integers(0, 40)), int(rng.integers(1, 12)))
                 for _ in range(count)]
        ticks = int(rng.integers(1, 9))
        got = [(s.word, s.held) for s in slice_piece(make_piece(notes), ticks)]
        mismatches += got != per_tick_slices(notes, ticks)
    report(4, mismatches == 0, f"{mismatches} of 200 random pieces differ from the per-tick simulation")


def test_5_triad_labels(report):
    failures, cases = 0, 0
    for root, quality, pcs in all_triads():
        for rotation in range(3):
            order = pcs[rotation:] + pcs[:rotation]
            base = [48 + pc for pc in order]
            # force ascending voicing so the rotation really is the bass
            voiced = [base[0]] + [p + 12 * (p < base[0]) for p in base[1:]]
            for doubled in itertools.product((False, True), repeat=3):
                word = set(voiced) | {p + 12 for p, d in zip(voiced, doubled) if d}
                label = label_chord(sorted(word))
                cases += 1
                failures += (label.root, label.quality, label.match_score) != (root, quality, 3)
    report(5, failures == 0, f"{failures} of {cases} voicings mislabeled")


def test_6_tonnetz_metric(report):
    rng = np.random.default_rng(6)
    bad = []
    for _ in range(1000):
        p, q, r = (int(x) for x in rng.integers(24, 97, size=3))
        if pitch_steps(p, q) != pitch_steps(q, p):
            bad.append(("symmetry", p, q))
        if pitch_steps(p, r) > pitch_steps(p, q) + pitch_steps(q, r):
            bad.append(("triangle", p, q, r))
        a = sorted({int(x) for x in rng.integers(24, 97, size=int(rng.integers(1, 4)))})
        b = sorted({int(x) for x in rng.integers(24, 97, size=int(rng.integers(1, 4)))})
        d = tonnetz_distance(a, b)
        if d != tonnetz_distance(b, a):
            bad.append(("set symmetry", a, b))
        if d != tonnetz_distance([x + 7 for x in a], [x + 7 for x in b]):
            bad.append(("transposition", a, b))
    fifth = tonnetz_distance([60], [67])
    report(6, not bad and fifth == 1.0, f"{len(bad)} violations, d({{60}},{{67}}) = {fifth}")


def _two_clusters(seed=3, per_cluster=30, dims=10):
    rng = np.random.default_rng(seed)
    offset = np.zeros(dims)
    offset[0] = 10.0
    x = np.vstack([rng.normal(size=(per_cluster, dims)), rng.normal(size=(per_cluster, dims)) + offset])
    return x, np.repeat([0, 1], per_cluster)


def test_7_tsne(report):
    x, labels = _two_clusters()
    perplexity = 15.0
    _, _, entropies = conditional_affinities(x, perplexity)
    entropy_err = float(np.abs(entropies - np.log2(perplexity)).max())

    config = TsneConfig(perplexity=perplexity, iterations=1000, seed=0)
    y, trace = tsne_embed(x, config)
    checkpoints = trace[config.exaggeration_iterations - 1::50]
    rise = float(np.max(np.diff(checkpoints)))

    centroid = np.array([y[labels == c].mean(axis=0) for c in (0, 1)])
    nearest = np.argmin(((y[:, None, :] - centroid[None]) ** 2).sum(axis=2), axis=1)
    spread = max(np.linalg.norm(y[labels == c] - centroid[c], axis=1).max() for c in (0, 1))
    gap = np.linalg.norm(centroid[0] - centroid[1])
    separated = bool((nearest == labels).all() and gap > spread)
    report(7, entropy_err < 1e-4 and rise <= 1e-3 and separated,
           f"entropy error {entropy_err:.1e}, largest KL rise per 50 iterations {rise:.1e}, "
           f"clusters separated {separated}")


def test_8_round_trips(report, tmp_path):
    vocab, seqs = markov_corpus(seed=1, n_tokens=30, n_pieces=4, length=40)
    config = TrainingConfig(dims=12, epochs=2, seed=4)
    model, _ = train(init_model(vocab, config), seqs, config)
    path = tmp_path / "m.s2v"
    save_model(model, path)
    data = path.read_bytes()
    reloaded = load_model(path)
    model_ok = (dump_model(reloaded) == data and dump_model(parse_model(data)) == data
                and np.array_equal(reloaded.input_vectors, model.input_vectors))

    differing = []
    for midi in sorted(MIDI_DIR.glob("*.mid")):
        piece, ticks, slices = prepare_piece(midi)
        back = slice_piece(parse_midi(render_midi(slices, ticks, None, piece.ticks_per_quarter)), ticks)
        if [s.word for s in back] != [s.word for s in slices]:
            differing.append(midi.name)
    report(8, model_ok and not differing,
           f"model bytes identical {model_ok}, MIDI round trip mismatches {differing or 'none'}")


def test_9_end_to_end(report, tmp_path):
    corpus, model = tmp_path / "corpus.slc", tmp_path / "model.s2v"
    fixture = sorted(MIDI_DIR.glob("*.mid"))[0]
    start = time.perf_counter()
    codes = [
        run(["ingest", str(MIDI_DIR), "--out", str(corpus)]),
        run(["stats", "--corpus", str(corpus), "--csv", str(tmp_path / "stats.csv")]),
        run(["train", "--corpus", str(corpus), "--out", str(model), "--dims", "32", "--epochs", "5"]),
        run(["nearest", "--model", str(model), "--slice", "48,60,64,67,72", "--top", "5"]),
        run(["remix", "--model", str(model), "--in", str(fixture), "--positions", "1,5,9",
             "--out", str(tmp_path / "remix.mid"), "--report", str(tmp_path / "remix.csv")]),
    ]
    elapsed = time.perf_counter() - start
    report(9, codes == [0] * 5 and elapsed < 60, f"exit codes {codes}, {elapsed:.1f}s")


BEETHOVEN = os.environ.get("SLICE2VEC_BEETHOVEN_DIR")


@pytest.mark.skipif(not BEETHOVEN, reason="set SLICE2VEC_BEETHOVEN_DIR to the 32 sonata MIDI files")
def test_9_optional_beethoven_scale(report, tmp_path):
    from slice2vec.corpus import read_corpus
    from slice2vec.pipeline import corpus_stats

    corpus = tmp_path / "beethoven.slc"
    assert run(["ingest", BEETHOVEN, "--out", str(corpus)]) == 0
    stats = corpus_stats(read_corpus(corpus))
    same_order = (abs(np.log10(stats.total_tokens) - np.log10(70_305)) < 1
                  and abs(np.log10(stats.vocabulary_size) - np.log10(14_315)) < 1)
    report("9b", same_order, f"T {stats.total_tokens}, V {stats.vocabulary_size}")
