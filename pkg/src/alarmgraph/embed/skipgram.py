"""Skip-gram with negative sampling, trained from scratch on a walk corpus."""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from ..errors import EmptyCorpus, IndexOutOfVocabulary
from .walks import WalkCorpus

_U64 = (1 << 64) - 1
_INIT_STREAM, _EPOCH_STREAM = 0x1417, 0xE90C


@dataclass(frozen=True)
class SkipGramParams:
    dims: int = 128
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    noise_exponent: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if self.dims < 2:
            raise ValueError("dims must be >= 2")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")


@dataclass
class EmbeddingMatrix:
    """Rows are vectors for ``node_ids`` (vocabulary indices); ``tags`` gives their names."""

    vectors: np.ndarray
    node_ids: np.ndarray
    tags: list[str] | None = None
    loss_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("embedding contains non-finite entries")

    @property
    def labels(self) -> list[str]:
        if self.tags is not None:
            return list(self.tags)
        return [str(i) for i in self.node_ids]


def context_pairs(walks: list[list[int]], window: int) -> tuple[np.ndarray, np.ndarray]:
    """All (center, context) pairs within ``window`` positions, in corpus order."""
    centers, contexts = [], []
    for walk in walks:
        n = len(walk)
        for i, c in enumerate(walk):
            for j in range(max(0, i - window), min(n, i + window + 1)):
                if j != i:
                    centers.append(c)
                    contexts.append(walk[j])
    return np.array(centers, dtype=np.int64), np.array(contexts, dtype=np.int64)


def noise_distribution(counts: np.ndarray, exponent: float = 0.75) -> np.ndarray:
    w = np.asarray(counts, dtype=float) ** exponent
    w[np.asarray(counts) == 0] = 0.0
    return w / w.sum()


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def _sigmoid(x):
    return np.exp(_log_sigmoid(x))


def sgns_loss_and_grad(center: np.ndarray, context: np.ndarray, negatives: np.ndarray):
    """Loss ``-log s(u_o.v) - sum_k log s(-u_k.v)`` and its gradients.

    ``center`` is the input vector v, ``context`` the output vector u_o and
    ``negatives`` a (k, d) stack of output vectors. Returns
    ``(loss, d_center, d_context, d_negatives)``.
    """
    pos = context @ center
    neg = negatives @ center
    loss = -_log_sigmoid(pos) - np.sum(_log_sigmoid(-neg))
    g_pos = _sigmoid(pos) - 1.0
    g_neg = _sigmoid(neg)
    d_center = g_pos * context + g_neg @ negatives
    d_context = g_pos * center
    d_negatives = np.outer(g_neg, center)
    return float(loss), d_center, d_context, d_negatives


@numba.njit(cache=True)
def _nb_log_sigmoid(x):
    if x >= 0:
        return -np.log1p(np.exp(-x))
    return x - np.log1p(np.exp(x))


@numba.njit(cache=True)
def _sgd_pass(w_in, w_out, centers, contexts, order, negs, lr0, lr1, step0, total_steps):
    """Sequential SGD over ``order``; returns summed pre-update loss."""
    d = w_in.shape[1]
    k = negs.shape[1]
    grad_in = np.empty(d)
    loss = 0.0
    denom = max(total_steps - 1, 1)
    for n in range(order.shape[0]):
        lr = lr0 + (lr1 - lr0) * (step0 + n) / denom
        pair = order[n]
        c = centers[pair]
        o = contexts[pair]
        for j in range(d):
            grad_in[j] = 0.0
        for s in range(k + 1):
            if s == 0:
                target = o
                label = 1.0
            else:
                target = negs[pair, s - 1]
                if target == o:
                    continue
                label = 0.0
            f = 0.0
            for j in range(d):
                f += w_in[c, j] * w_out[target, j]
            if label == 1.0:
                loss -= _nb_log_sigmoid(f)
            else:
                loss -= _nb_log_sigmoid(-f)
            sig = np.exp(_nb_log_sigmoid(f))
            g = sig - label  # dL/df
            for j in range(d):
                grad_in[j] += g * w_out[target, j]
                w_out[target, j] -= lr * g * w_in[c, j]
        for j in range(d):
            w_in[c, j] -= lr * grad_in[j]
    return loss


def sgd_step(w_in, w_out, center, context, negatives, lr):
    """One in-place update through the training kernel (exposed for testing)."""
    negs = np.asarray(negatives, dtype=np.int64).reshape(1, -1)
    return _sgd_pass(
        w_in, w_out, np.array([center]), np.array([context]), np.array([0]), negs, lr, lr, 0, 1
    )


def initial_vectors(num_nodes: int, params: SkipGramParams) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng([params.seed & _U64, _INIT_STREAM])
    d = params.dims
    w_in = rng.uniform(-0.5 / d, 0.5 / d, size=(num_nodes, d))
    # output vectors start at zero; the jitter only keeps them away from zero norm
    w_out = rng.uniform(-1e-8, 1e-8, size=(num_nodes, d))
    return w_in, w_out


def train_skipgram(corpus: WalkCorpus, params: SkipGramParams) -> EmbeddingMatrix:
    """Train input vectors for every node that occurs in ``corpus``.

    Per epoch the (center, context) pairs are visited in a seed-determined
    permutation and each pair draws ``negatives`` noise nodes from the
    unigram^0.75 distribution. The learning rate decays linearly over all
    updates. Updates are sequential, so a fixed seed reproduces the matrix
    bit for bit.
    """
    if not corpus.walks or not any(corpus.walks):
        raise EmptyCorpus("walk corpus is empty")
    n = corpus.num_nodes
    flat = np.concatenate([np.asarray(w, dtype=np.int64) for w in corpus.walks])
    if flat.min() < 0 or flat.max() >= n:
        raise IndexOutOfVocabulary(f"corpus node index outside 0..{n - 1}")
    counts = np.bincount(flat, minlength=n)
    noise_cdf = np.cumsum(noise_distribution(counts, params.noise_exponent))
    noise_cdf[-1] = 1.0

    centers, contexts = context_pairs(corpus.walks, params.window)
    w_in, w_out = initial_vectors(n, params)
    P = len(centers)
    total = P * params.epochs
    history = []
    for epoch in range(params.epochs):
        rng = np.random.default_rng([params.seed & _U64, _EPOCH_STREAM, epoch])
        order = rng.permutation(P).astype(np.int64)
        negs = np.searchsorted(noise_cdf, rng.random((P, params.negatives)), side="right").astype(np.int64)
        loss = _sgd_pass(
            w_in, w_out, centers, contexts, order, negs,
            params.learning_rate, params.min_learning_rate, epoch * P, total,
        )
        history.append(loss / max(P, 1))

    present = np.flatnonzero(counts)
    tags = [corpus.tags[i] for i in present] if corpus.tags is not None else None
    return EmbeddingMatrix(w_in[present].copy(), present, tags, history)
