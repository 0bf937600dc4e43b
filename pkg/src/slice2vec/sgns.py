"""Skip-gram with negative sampling, trained by plain SGD.

Each (center, context) pair is one training *window*.  The center word's
input vector ``v`` is pushed towards the context word's output vector
``u_ctx`` and away from ``k`` output vectors drawn from the smoothed unigram
noise distribution::

    loss = -log sigmoid(u_ctx . v) - sum_j log sigmoid(-u_j . v)
"""

import logging
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import DataError, NumericalError
from .vocabulary import pair_arrays

log = logging.getLogger(__name__)

DOT_CLAMP = 30.0


@dataclass
class TrainingConfig:
    dims: int = 128
    window: int = 1
    negatives: int = 5
    initial_lr: float = 0.025
    lr_floor: float = 1e-4
    epochs: int = 5
    seed: int = 1
    noise_exponent: float = 0.75
    log_every: int = 2000
    min_count: int = 1
    subsample: float = 0.0

    def __post_init__(self):
        if self.dims < 1 or self.window < 1 or self.negatives < 1:
            raise DataError("dims, window and negatives must all be >= 1")
        if not 0 < self.lr_floor <= self.initial_lr:
            raise DataError("need 0 < lr_floor <= initial_lr")
        if self.epochs < 0 or self.log_every < 1:
            raise DataError("epochs must be >= 0 and log_every >= 1")
        if not 0 <= self.seed < 2**64:
            raise DataError("seed must fit in an unsigned 64-bit integer")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


@dataclass
class EmbeddingModel:
    input_vectors: np.ndarray
    output_vectors: np.ndarray
    vocabulary: object
    config: TrainingConfig

    @property
    def dims(self):
        return self.input_vectors.shape[1]

    def vector(self, token_id):
        return self.input_vectors[token_id]

    def copy(self):
        return EmbeddingModel(self.input_vectors.copy(), self.output_vectors.copy(),
                              self.vocabulary, TrainingConfig(**self.config.to_dict()))


def init_model(vocab, config=None):
    """Seeded uniform(-0.5/n, 0.5/n) input vectors, all-zero output vectors."""
    config = config or TrainingConfig()
    if len(vocab) < 2:
        raise DataError(f"cannot sample negatives: vocabulary has {len(vocab)} word(s), need >= 2")
    n = config.dims
    rng = np.random.default_rng(config.seed)
    w_in = rng.uniform(-0.5 / n, 0.5 / n, size=(len(vocab), n)).astype(np.float32)
    w_out = np.zeros((len(vocab), n), dtype=np.float32)
    return EmbeddingModel(w_in, w_out, vocab, config)


class NoiseSampler:
    """Draws token ids with probability proportional to ``count ** exponent``."""

    def __init__(self, counts, exponent=0.75):
        weights = np.asarray(counts, dtype=np.float64) ** exponent
        if len(weights) < 2:
            raise DataError("cannot sample negatives from fewer than 2 words")
        self.probabilities = weights / weights.sum()
        self._cdf = np.cumsum(self.probabilities)
        self._cdf[-1] = 1.0

    def draw(self, rng, shape):
        return np.searchsorted(self._cdf, rng.random(shape), side="right")

    def sample(self, rng, k, exclude=None):
        """``k`` i.i.d. draws; any draw equal to ``exclude`` is redrawn."""
        out = self.draw(rng, k)
        if exclude is not None:
            self._redraw(rng, out, np.full(out.shape, exclude))
        return out

    def _redraw(self, rng, out, exclude):
        bad = out == exclude
        while bad.any():
            out[bad] = self.draw(rng, int(bad.sum()))
            bad = out == exclude
        return out

    def sample_batch(self, rng, exclude, k):
        """One row of ``k`` negatives per entry of ``exclude``."""
        exclude = np.asarray(exclude)
        out = self.draw(rng, (len(exclude), k))
        return self._redraw(rng, out, exclude[:, None])


def sample_negatives(vocab, rng, k, exclude=None, exponent=0.75):
    return NoiseSampler(vocab.counts, exponent).sample(rng, k, exclude)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def sgns_loss_and_grads(v, u_pos, u_neg):
    """Loss of one window and its gradients w.r.t. ``v``, ``u_pos`` and each ``u_neg`` row.

    Dot products are clamped to +/-30 before the sigmoid.
    """
    v = np.asarray(v, dtype=np.float64)
    u_pos = np.asarray(u_pos, dtype=np.float64)
    u_neg = np.atleast_2d(np.asarray(u_neg, dtype=np.float64))
    s_pos = np.clip(u_pos @ v, -DOT_CLAMP, DOT_CLAMP)
    s_neg = np.clip(u_neg @ v, -DOT_CLAMP, DOT_CLAMP)
    loss = float(np.logaddexp(0.0, -s_pos) + np.logaddexp(0.0, s_neg).sum())
    g_pos = _sigmoid(s_pos) - 1.0
    g_neg = _sigmoid(s_neg)
    grad_v = g_pos * u_pos + g_neg @ u_neg
    return loss, grad_v, g_pos * v, np.outer(g_neg, v)


def sgns_step(model, center, context, negatives, lr):
    """One SGD update for a (center, context) window; returns the pre-update loss.

    All gradients are taken at the current parameters and then applied, so a
    row appearing several times among the outputs receives the summed update.
    """
    w_in, w_out = model.input_vectors, model.output_vectors
    negatives = np.asarray(negatives, dtype=np.int64)
    v = w_in[center].astype(np.float64)
    loss, grad_v, grad_pos, grad_neg = sgns_loss_and_grads(v, w_out[context], w_out[negatives])
    rows = np.concatenate(([context], negatives))
    delta = np.vstack((grad_pos, grad_neg)) * -lr
    np.add.at(w_out, rows, delta.astype(np.float32))
    w_in[center] = (v - lr * grad_v).astype(np.float32)
    return loss


def learning_rate(step, total, config):
    """Linear decay from ``initial_lr`` at step 0 to ``lr_floor`` at step ``total - 1``."""
    frac = step / (total - 1) if total > 1 else 1.0
    return config.initial_lr - (config.initial_lr - config.lr_floor) * frac


def _subsample(seq, counts, threshold, rng):
    freq = counts[seq] / counts.sum()
    keep_prob = np.minimum(1.0, (np.sqrt(freq / threshold) + 1.0) * threshold / freq)
    return seq[rng.random(len(seq)) < keep_prob]


def _epoch_pairs(sequences, config, counts, rng):
    centers, contexts = [], []
    for seq in sequences:
        if config.subsample > 0:
            seq = _subsample(np.asarray(seq), counts, config.subsample, rng)
        c, x = pair_arrays(seq, config.window)
        centers.append(c)
        contexts.append(x)
    if not centers:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(centers), np.concatenate(contexts)


def train(model, sequences, config=None, progress=None):
    """Run SGD over all skip-gram windows for ``config.epochs`` epochs.

    ``model`` is updated in place and also returned, together with the loss
    log: a list of ``(step, mean loss over the preceding log_every windows)``
    with a final, possibly shorter, record at the last step.  ``progress``
    is called with each record as it is produced.
    """
    config = config or model.config
    vocab_size = len(model.vocabulary)
    for seq in sequences:
        if len(seq) and (np.min(seq) < 0 or np.max(seq) >= vocab_size):
            raise DataError("token id outside vocabulary")
    rng = np.random.default_rng((config.seed, 1))
    counts = np.asarray(model.vocabulary.counts, dtype=np.float64)
    sampler = NoiseSampler(counts, config.noise_exponent)

    # all epochs are laid out first so the lr schedule knows the real total
    epochs = [_epoch_pairs(sequences, config, counts, rng) for _ in range(config.epochs)]
    total = sum(len(c) for c, _ in epochs)
    loss_log = []
    if total == 0:
        return model, loss_log

    w_in, w_out = model.input_vectors, model.output_vectors
    step = 0
    running = 0.0
    in_block = 0
    for centers, contexts in epochs:
        negatives = sampler.sample_batch(rng, contexts, config.negatives)
        for center, context, negs in zip(centers.tolist(), contexts.tolist(), negatives):
            lr = learning_rate(step, total, config)
            running += sgns_step(model, center, context, negs, lr)
            step += 1
            in_block += 1
            if not (np.isfinite(w_in[center]).all() and np.isfinite(w_out[context]).all()
                    and np.isfinite(w_out[negs]).all()):
                raise NumericalError(f"non-finite embedding values after training step {step}")
            if in_block == config.log_every or step == total:
                record = (step, running / in_block)
                loss_log.append(record)
                log.debug("step=%d mean_loss=%.6f lr=%.6g", step, record[1], lr)
                if progress is not None:
                    progress(*record)
                running = 0.0
                in_block = 0
    return model, loss_log
