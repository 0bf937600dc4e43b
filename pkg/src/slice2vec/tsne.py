"""Exact O(N^2) t-SNE for small point sets.

Optimiser settings follow van der Maaten's reference implementation: early
exaggeration 12 for the first 250 iterations, momentum 0.5 switching to 0.8
at the same point, and per-coordinate adaptive gains.  The learning rate
defaults to ``"auto"``, i.e. ``max(N / (4 * exaggeration), 50)``; a fixed 200
overshoots badly on sets of a few dozen points.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError

ENTROPY_TOL = 1e-5
MAX_BISECTION_STEPS = 50
_LOG_BETA_RANGE = (-50.0, 50.0)
_MIN_GAIN = 0.01


@dataclass
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: object = "auto"
    early_exaggeration: float = 12.0
    exaggeration_iterations: int = 250
    initial_momentum: float = 0.5
    final_momentum: float = 0.8
    seed: int = 0
    pca_dims: int = None

    def __post_init__(self):
        if self.perplexity < 2:
            raise DataError("perplexity must be >= 2")
        if self.iterations < 1:
            raise DataError("iterations must be >= 1")
        if self.learning_rate != "auto" and not float(self.learning_rate) > 0:
            raise DataError("learning_rate must be positive or 'auto'")

    def step_size(self, n_points):
        if self.learning_rate == "auto":
            return max(n_points / (4.0 * self.early_exaggeration), 50.0)
        return float(self.learning_rate)

    def effective_perplexity(self, n_points):
        """Perplexity clamped to (N-1)/3, but never below min(2, N-1)."""
        return max(min(self.perplexity, (n_points - 1) / 3.0), min(2.0, n_points - 1.0))


def squared_distances(points):
    x = np.asarray(points, dtype=np.float64)
    sq = (x * x).sum(axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * x @ x.T
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def _row_distribution(dist_row, beta):
    # shift by the minimum so exp never underflows to an all-zero row
    w = np.exp(-(dist_row - dist_row.min()) * beta)
    p = w / w.sum()
    nz = p > 0
    entropy = -(p[nz] * np.log2(p[nz])).sum()
    return p, entropy


def conditional_affinities(points, perplexity):
    """Row-stochastic P(j|i) with each row's entropy (bits) tuned to log2(perplexity).

    Returns ``(P_cond, betas, entropies)``; beta is the Gaussian precision
    1 / (2 sigma^2), found by bisection on log(beta).
    """
    dist = squared_distances(points)
    n = dist.shape[0]
    if n < 3:
        raise DataError(f"t-SNE needs at least 3 points, got {n}")
    if not 1 < perplexity < n:
        raise DataError(f"perplexity must lie in (1, {n}), got {perplexity}")
    target = np.log2(perplexity)
    cond = np.zeros((n, n))
    betas = np.empty(n)
    entropies = np.empty(n)
    for i in range(n):
        row = np.delete(dist[i], i)
        lo, hi = _LOG_BETA_RANGE
        log_beta = 0.0
        p, h = _row_distribution(row, 1.0)
        for _ in range(MAX_BISECTION_STEPS):
            if abs(h - target) < ENTROPY_TOL:
                break
            # entropy falls as beta grows
            if h > target:
                lo = log_beta
            else:
                hi = log_beta
            log_beta = 0.5 * (lo + hi)
            p, h = _row_distribution(row, np.exp(log_beta))
        cond[i, np.arange(n) != i] = p
        betas[i] = np.exp(log_beta)
        entropies[i] = h
    return cond, betas, entropies


def compute_affinities(points, perplexity):
    """Symmetric joint affinities (P + P^T) / 2N with a zero diagonal."""
    cond, _, _ = conditional_affinities(points, perplexity)
    return (cond + cond.T) / (2.0 * cond.shape[0])


def student_t_affinities(y):
    """Low-dimensional joint Q with one-degree-of-freedom Student-t kernel.

    Returns ``(Q, kernel)`` where ``kernel[i, j] = 1 / (1 + |y_i - y_j|^2)``.
    """
    kernel = 1.0 / (1.0 + squared_distances(y))
    np.fill_diagonal(kernel, 0.0)
    return kernel / kernel.sum(), kernel


def kl_divergence(p, q):
    mask = p > 0
    return float((p[mask] * np.log(p[mask] / np.maximum(q[mask], 1e-300))).sum())


def kl_gradient(p, y):
    """dKL(P||Q)/dY = 4 sum_j (p_ij - q_ij)(y_i - y_j) / (1 + |y_i - y_j|^2)."""
    q, kernel = student_t_affinities(y)
    w = (p - q) * kernel
    return 4.0 * (np.diag(w.sum(axis=1)) - w) @ y


def pca_reduce(points, dims):
    x = np.asarray(points, dtype=np.float64)
    x = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(x, full_matrices=False)
    return x @ vt[:dims].T


def tsne_embed(points, config=None):
    """Embed ``points`` (N x n) into 2-D.

    Returns ``(Y, kl_trace)``: the final N x 2 layout and KL(P||Q) after each
    iteration, always measured against the unexaggerated P.
    """
    config = config or TsneConfig()
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 3:
        raise DataError("t-SNE needs an N x n array with N >= 3")
    if config.pca_dims and config.pca_dims < x.shape[1]:
        x = pca_reduce(x, config.pca_dims)
    n = x.shape[0]
    p = compute_affinities(x, config.effective_perplexity(n))
    p = np.maximum(p, 1e-12)
    np.fill_diagonal(p, 0.0)
    p /= p.sum()

    eta = config.step_size(n)
    rng = np.random.default_rng(config.seed)
    y = rng.normal(0.0, 1e-4, size=(n, 2))
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    trace = []
    for it in range(config.iterations):
        early = it < config.exaggeration_iterations
        p_eff = p * config.early_exaggeration if early else p
        momentum = config.initial_momentum if early else config.final_momentum
        grad = kl_gradient(p_eff, y)
        same_sign = (grad > 0) == (velocity > 0)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, _MIN_GAIN, out=gains)
        velocity = momentum * velocity - eta * gains * grad
        y = y + velocity
        y -= y.mean(axis=0)
        if not np.isfinite(y).all():
            raise NumericalError(f"t-SNE diverged at iteration {it}")
        trace.append(kl_divergence(p, student_t_affinities(y)[0]))
    return y, np.array(trace)
