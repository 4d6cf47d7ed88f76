"""Consensus clustering: K-means ensembles, co-association dissimilarity and agglomerative merging."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidTarget, TooFewPoints

logger = logging.getLogger(__name__)

_U64 = (1 << 64) - 1
LINKAGES = ("single", "complete", "average")


@dataclass
class KMeansRun:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iter: int
    inertia_history: list[float] = field(default_factory=list)


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - C[None, :, :]
    return np.einsum("hkd,hkd->hk", diff, diff)


def _init_centers(X: np.ndarray, k: int, rng: np.random.Generator, init) -> np.ndarray:
    H = len(X)
    if isinstance(init, np.ndarray):
        if init.shape != (k, X.shape[1]):
            raise DimensionMismatch(f"initial centers have shape {init.shape}, expected {(k, X.shape[1])}")
        return init.astype(float).copy()
    if init == "random":
        return X[rng.choice(H, size=k, replace=False)].copy()
    if init == "k-means++":
        idx = [int(rng.integers(H))]
        d2 = _sq_dists(X, X[idx])[:, 0]
        for _ in range(1, k):
            total = d2.sum()
            if total == 0:
                nxt = int(rng.choice(np.setdiff1d(np.arange(H), idx)))
            else:
                nxt = int(rng.choice(H, p=d2 / total))
            idx.append(nxt)
            d2 = np.minimum(d2, _sq_dists(X, X[[nxt]])[:, 0])
        return X[idx].copy()
    raise ValueError(f"unknown init {init!r}")


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-6,
    init: str | np.ndarray = "random",
) -> KMeansRun:
    """Lloyd's algorithm started from ``k`` distinct data points chosen by ``seed``.

    ``init`` may also be "k-means++" or an explicit (k, d) array of centers.

    An emptied cluster is re-seeded at the point farthest from its current
    center. Iteration stops once no center moves by ``tol`` or more.
    """
    X = np.asarray(points, dtype=float)
    H = len(X)
    if k < 1:
        raise ValueError("k must be >= 1")
    if H < k:
        raise TooFewPoints(f"{H} points cannot form {k} clusters")
    rng = np.random.default_rng(seed & _U64)
    centers = _init_centers(X, k, rng, init)
    history = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = _sq_dists(X, centers)
        labels = np.argmin(d2, axis=1)
        point_cost = d2[np.arange(H), labels]
        history.append(float(point_cost.sum()))
        new = centers.copy()
        taken = set()
        for h in range(k):
            members = labels == h
            if members.any():
                new[h] = X[members].mean(axis=0)
        for h in range(k):
            if not (labels == h).any():
                order = np.argsort(-point_cost, kind="stable")
                far = next(int(i) for i in order if int(i) not in taken)
                taken.add(far)
                new[h] = X[far]
                point_cost[far] = 0.0
        shift = float(np.max(np.linalg.norm(new - centers, axis=1)))
        centers = new
        if shift < tol:
            break
    d2 = _sq_dists(X, centers)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(H), labels].sum())
    history.append(inertia)
    return KMeansRun(labels, centers, inertia, n_iter, history)


@dataclass
class IndicatorMatrix:
    """Horizontally stacked one-hot blocks, one (H, k_r) block per K-means run."""

    R: np.ndarray
    block_sizes: list[int]

    @property
    def n_runs(self) -> int:
        return len(self.block_sizes)

    @classmethod
    def from_labels(cls, label_runs: Sequence[np.ndarray], ks: Sequence[int]) -> "IndicatorMatrix":
        blocks = []
        for labels, k in zip(label_runs, ks):
            block = np.zeros((len(labels), k), dtype=np.uint8)
            block[np.arange(len(labels)), labels] = 1
            blocks.append(block)
        return cls(np.hstack(blocks), list(ks))

    @classmethod
    def concat(cls, parts: Sequence["IndicatorMatrix"]) -> "IndicatorMatrix":
        return cls(np.hstack([p.R for p in parts]), [k for p in parts for k in p.block_sizes])


def run_seed(seed: int, k: int, run: int) -> int:
    return int(np.random.SeedSequence([seed & _U64, k, run]).generate_state(1, np.uint64)[0])


def ensemble(points: np.ndarray, k: int, n_runs: int, seed: int = 0, **kmeans_kw) -> IndicatorMatrix:
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    labels = [kmeans(points, k, run_seed(seed, k, r), **kmeans_kw).labels for r in range(n_runs)]
    return IndicatorMatrix.from_labels(labels, [k] * n_runs)


def co_counts(R: IndicatorMatrix | np.ndarray) -> np.ndarray:
    """Integer number of runs placing each pair in the same cluster, ``R R^T``."""
    A = R.R if isinstance(R, IndicatorMatrix) else np.asarray(R)
    A = A.astype(np.int64)
    return A @ A.T


def consensus(R: IndicatorMatrix | np.ndarray, n_runs: int | None = None) -> np.ndarray:
    """Aggregated dissimilarity ``D = 1 - R R^T / M``."""
    if n_runs is None:
        if not isinstance(R, IndicatorMatrix):
            raise ValueError("n_runs is required for a bare matrix")
        n_runs = R.n_runs
    if isinstance(R, IndicatorMatrix) and R.n_runs != n_runs:
        raise DimensionMismatch(f"indicator matrix holds {R.n_runs} runs, expected {n_runs}")
    C = co_counts(R)
    if np.any(np.diag(C) != n_runs):
        raise DimensionMismatch(f"indicator rows do not sum to {n_runs} runs")
    return 1.0 - C / n_runs


def epsilon(D_next: np.ndarray, D_curr: np.ndarray) -> float:
    """Sum of squared changes over the strict upper triangle."""
    D_next, D_curr = np.asarray(D_next), np.asarray(D_curr)
    if D_next.shape != D_curr.shape:
        raise DimensionMismatch(f"shapes {D_next.shape} and {D_curr.shape} differ")
    iu = np.triu_indices(len(D_curr), k=1)
    return float(np.sum((D_next[iu] - D_curr[iu]) ** 2))


@dataclass
class KSelection:
    k_max: int
    D: np.ndarray
    n_pooled: int
    eps_curve: list[tuple[int, float]]
    converged: bool


def select_kmax(
    points: np.ndarray,
    k_min: int = 2,
    n_runs: int = 100,
    eps_tol: float = 1e-3,
    k_cap: int = 10,
    seed: int = 0,
    **kmeans_kw,
) -> KSelection:
    """Grow the pooled ensemble one k at a time until the dissimilarity settles.

    ``D(k')`` pools ``n_runs`` runs for every k in ``k_min..k'``. The change
    ``eps(k') = sum_{i<j} (D(k'+1) - D(k'))^2`` is compared against
    ``eps_tol * H(H-1)/2``; ``k_max`` is the first k' that starts two
    consecutive sub-threshold values (one suffices when it is the last value
    computable before ``k_cap``). Without convergence, ``k_cap`` is returned
    with ``converged=False``.
    """
    X = np.asarray(points, dtype=float)
    H = len(X)
    if k_cap < k_min + 1:
        raise ValueError("k_cap must be >= k_min + 1")
    threshold = eps_tol * H * (H - 1) / 2

    counts = np.zeros((H, H), dtype=np.int64)
    Ds: dict[int, np.ndarray] = {}
    curve: list[tuple[int, float]] = []

    def pooled(kp: int) -> np.ndarray:
        if kp not in Ds:
            counts[...] += co_counts(ensemble(X, kp, n_runs, seed, **kmeans_kw))
            Ds[kp] = 1.0 - counts / (n_runs * (kp - k_min + 1))
        return Ds[kp]

    below = []
    for kp in range(k_min, k_cap):
        d_curr = pooled(kp)
        eps = epsilon(pooled(kp + 1), d_curr)
        curve.append((kp, eps))
        below.append(eps < threshold)
        last_possible = kp == k_cap - 1
        if len(below) >= 2 and below[-2] and below[-1]:
            k_max = kp - 1
            return KSelection(k_max, Ds[k_max], n_runs * (k_max - k_min + 1), curve, True)
        if last_possible and below[-1]:
            return KSelection(kp, Ds[kp], n_runs * (kp - k_min + 1), curve, True)
    logger.warning("epsilon did not converge before k_cap=%d", k_cap)
    return KSelection(k_cap, Ds[k_cap], n_runs * (k_cap - k_min + 1), curve, False)


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass
class Dendrogram:
    """Merge tree over ``n_leaves`` leaves; merge ``i`` creates node ``n_leaves + i``."""

    n_leaves: int
    merges: list[Merge]

    def children(self) -> dict[int, tuple[int, int]]:
        return {self.n_leaves + i: (m.left, m.right) for i, m in enumerate(self.merges)}


def _validate_dissimilarity(D: np.ndarray) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise DimensionMismatch("dissimilarity must be square")
    if len(D) < 2:
        raise TooFewPoints("need at least 2 items to cluster")
    if not np.allclose(D, D.T, rtol=0, atol=1e-12) or np.any(np.diag(D) != 0):
        raise ValueError("dissimilarity must be symmetric with zero diagonal")
    return D


def ahc(D: np.ndarray, linkage: str = "average") -> Dendrogram:
    """Agglomerative clustering by Lance-Williams updates.

    Each step merges the closest pair of active clusters; equal distances
    are resolved by the smallest (left id, right id) with left < right.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"linkage must be one of {LINKAGES}")
    D = _validate_dissimilarity(D)
    H = len(D)
    dist = D.copy()
    np.fill_diagonal(dist, np.inf)
    active = np.ones(H, dtype=bool)
    ids = np.arange(H)
    sizes = np.ones(H, dtype=np.int64)
    merges = []
    for step in range(H - 1):
        masked = np.where(active[:, None] & active[None, :], dist, np.inf)
        m = masked.min()
        ii, jj = np.nonzero(np.triu(masked == m, k=1))
        cand = sorted(
            (min(ids[i], ids[j]), max(ids[i], ids[j]), i, j) for i, j in zip(ii, jj)
        )
        left, right, i, j = cand[0]
        merges.append(Merge(int(left), int(right), float(m), int(sizes[i] + sizes[j])))
        ni, nj = sizes[i], sizes[j]
        if linkage == "single":
            row = np.minimum(dist[i], dist[j])
        elif linkage == "complete":
            row = np.maximum(dist[i], dist[j])
        else:
            row = (ni * dist[i] + nj * dist[j]) / (ni + nj)
        dist[i, :] = row
        dist[:, i] = row
        dist[i, i] = np.inf
        active[j] = False
        sizes[i] = ni + nj
        ids[i] = H + step
    return Dendrogram(H, merges)


def cut(dendrogram: Dendrogram, k: int | None = None, height: float | None = None) -> np.ndarray:
    """Flat cluster labels from a dendrogram, by cluster count or by merge height.

    Labels are numbered by the smallest leaf in each cluster.
    """
    H = dendrogram.n_leaves
    if (k is None) == (height is None):
        raise InvalidTarget("give exactly one of k or height")
    if k is not None:
        if not 1 <= k <= H:
            raise InvalidTarget(f"k={k} outside 1..{H}")
        applied = list(enumerate(dendrogram.merges[: H - k]))
    else:
        if height < 0:
            raise InvalidTarget("height must be >= 0")
        applied = [(i, m) for i, m in enumerate(dendrogram.merges) if m.height <= height]

    parent = list(range(2 * H - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, m in applied:
        node = H + i
        parent[find(m.left)] = node
        parent[find(m.right)] = node
    roots = [find(leaf) for leaf in range(H)]
    relabel: dict[int, int] = {}
    return np.array([relabel.setdefault(r, len(relabel)) for r in roots], dtype=np.int64)


def cophenetic(dendrogram: Dendrogram) -> np.ndarray:
    """Height at which each pair of leaves first shares a cluster."""
    H = dendrogram.n_leaves
    members = {i: [i] for i in range(H)}
    C = np.zeros((H, H))
    for step, m in enumerate(dendrogram.merges):
        a, b = members.pop(m.left), members.pop(m.right)
        C[np.ix_(a, b)] = m.height
        C[np.ix_(b, a)] = m.height
        members[H + step] = a + b
    return C


def _grow_centers(X: np.ndarray, centers: np.ndarray, k: int) -> np.ndarray:
    """Extend ``centers`` to ``k`` rows by repeatedly adding the farthest point."""
    C = centers.copy()
    while len(C) < k:
        far = int(np.argmax(_sq_dists(X, C).min(axis=1)))
        C = np.vstack([C, X[far]])
    return C


@dataclass
class ElbowResult:
    ks: list[int]
    inertia: list[float]
    suggested_k: int | None


def elbow(
    points: np.ndarray, k_range: Sequence[int], seed: int = 0, restarts: int = 3, init: str = "k-means++"
) -> ElbowResult:
    """Best-of-``restarts`` inertia per k; suggests the k with the largest second difference.

    The curve should track the optimal inertia, so restarts are seeded with
    k-means++ by default; the consensus ensemble keeps uniform random starts.
    One extra candidate per k starts from the previous k's best centers plus
    the points farthest from them, which keeps the curve non-increasing.
    """
    X = np.asarray(points, dtype=float)
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise ValueError("k_range is empty")
    if ks[-1] > len(X):
        raise TooFewPoints(f"k={ks[-1]} exceeds {len(X)} points")
    inertia, prev = [], None
    for k in ks:
        runs = [kmeans(X, k, run_seed(seed, k, r), init=init) for r in range(restarts)]
        if prev is not None:
            runs.append(kmeans(X, k, init=_grow_centers(X, prev, k)))
        best_run = min(runs, key=lambda r: r.inertia)
        inertia.append(best_run.inertia)
        prev = best_run.centers
    if len(ks) < 3:
        return ElbowResult(ks, inertia, None)
    second = [inertia[i - 1] - 2 * inertia[i] + inertia[i + 1] for i in range(1, len(ks) - 1)]
    best = int(np.argmax(second))  # first maximum -> smallest k on ties
    return ElbowResult(ks, inertia, ks[best + 1])


def _newick_label(label: str) -> str:
    if label and not any(c in label for c in " ():;,[]'\t\n"):
        return label
    return "'" + label.replace("'", "''") + "'"


def to_newick(dendrogram: Dendrogram, labels: Sequence[str]) -> str:
    """Newick tree whose branch lengths make each internal node sit at its merge height."""
    H = dendrogram.n_leaves
    text = {i: _newick_label(labels[i]) for i in range(H)}
    height = {i: 0.0 for i in range(H)}
    for step, m in enumerate(dendrogram.merges):
        node = H + step
        parts = [f"{text.pop(c)}:{repr(m.height - height[c])}" for c in (m.left, m.right)]
        text[node] = "(" + ",".join(parts) + ")"
        height[node] = m.height
    (root,) = text.values()
    return root + ";\n"


def format_merges(dendrogram: Dendrogram) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["left", "right", "height", "size"])
    for m in dendrogram.merges:
        w.writerow([m.left, m.right, repr(m.height), m.size])
    return buf.getvalue()


def parse_merges(text: str) -> Dendrogram:
    rows = list(csv.reader(io.StringIO(text)))[1:]
    merges = [Merge(int(l), int(r), float(h), int(s)) for l, r, h, s in rows]
    return Dendrogram(len(merges) + 1, merges)


def format_assignments(labels: Sequence[str], clusters: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tag", "cluster"])
    for t, c in zip(labels, clusters):
        w.writerow([t, int(c)])
    return buf.getvalue()


def parse_assignments(text: str) -> dict[str, int]:
    return {t: int(c) for t, c in list(csv.reader(io.StringIO(text)))[1:]}


def adjusted_rand_index(a: Sequence[int], b: Sequence[int]) -> float:
    """Chance-corrected agreement between two flat labelings."""
    a, b = np.asarray(a), np.asarray(b)
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    comb2 = lambda x: x * (x - 1) / 2  # noqa: E731
    sum_ij = comb2(table).sum()
    sum_a = comb2(table.sum(axis=1)).sum()
    sum_b = comb2(table.sum(axis=0)).sum()
    expected = sum_a * sum_b / comb2(len(a)) if len(a) > 1 else 0.0
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:
        return 1.0
    return float((sum_ij - expected) / (max_index - expected))


__all__ = [
    "Dendrogram",
    "ElbowResult",
    "IndicatorMatrix",
    "KMeansRun",
    "KSelection",
    "Merge",
    "adjusted_rand_index",
    "ahc",
    "consensus",
    "cophenetic",
    "cut",
    "elbow",
    "ensemble",
    "epsilon",
    "kmeans",
    "select_kmax",
    "to_newick",
]
