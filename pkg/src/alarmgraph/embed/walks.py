"""Second-order (node2vec) biased random walks over the weighted co-occurrence graph."""

from __future__ import annotations

from dataclasses import dataclass
from urllib.parse import quote, unquote

import numpy as np

from ..errors import DeadEnd, EmptyGraph
from ..graph import CooccurrenceGraph

_U64 = (1 << 64) - 1
_ORDER_STREAM = 0xA1A2  # salt separating node-order shuffles from walk streams


@dataclass(frozen=True)
class WalkParams:
    num_walks: int = 10
    walk_length: int = 40
    p: float = 1.0
    q: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_walks < 1:
            raise ValueError("num_walks must be >= 1")
        if self.walk_length < 2:
            raise ValueError("walk_length must be >= 2")
        if not self.p > 0:
            raise ValueError("p must be > 0")
        if not self.q > 0:
            raise ValueError("q must be > 0")


@dataclass
class WalkCorpus:
    walks: list[list[int]]
    num_nodes: int
    tags: list[str] | None = None

    def __len__(self) -> int:
        return len(self.walks)


def biased_step_weights(
    prev: int | None, curr: int, graph: CooccurrenceGraph, p: float, q: float
) -> tuple[np.ndarray, np.ndarray]:
    """Neighbours of ``curr`` and their unnormalised transition weights ``alpha * e_{curr,x}``.

    alpha is 1/p for stepping back to ``prev``, 1 for neighbours shared with
    ``prev`` and 1/q for everything further away. With no ``prev`` (first
    step) alpha is 1 everywhere.
    """
    nbrs = graph.neighbors(curr)
    if len(nbrs) == 0:
        raise DeadEnd(f"node {curr} has no neighbours")
    w = graph.neighbor_weights(curr).copy()
    if prev is None:
        return nbrs, w
    prev_nbrs = graph.neighbors(prev)
    for i, x in enumerate(nbrs):
        if x == prev:
            w[i] /= p
        elif _contains(prev_nbrs, x):
            pass
        else:
            w[i] /= q
    return nbrs, w


def _contains(sorted_arr: np.ndarray, x: int) -> bool:
    j = np.searchsorted(sorted_arr, x)
    return j < len(sorted_arr) and sorted_arr[j] == x


class TransitionTable:
    """Lazily cached cumulative transition weights keyed by (prev, curr)."""

    def __init__(self, graph: CooccurrenceGraph, p: float, q: float):
        self.graph, self.p, self.q = graph, p, q
        self._cache: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}

    def cumulative(self, prev: int | None, curr: int) -> tuple[np.ndarray, np.ndarray]:
        key = (-1 if prev is None else prev, curr)
        hit = self._cache.get(key)
        if hit is None:
            nbrs, w = biased_step_weights(prev, curr, self.graph, self.p, self.q)
            hit = self._cache[key] = (nbrs, np.cumsum(w))
        return hit

    def sample(self, prev: int | None, curr: int, u: np.ndarray | float):
        """Map uniform draw(s) ``u`` in [0, 1) to next node(s)."""
        nbrs, cum = self.cumulative(prev, curr)
        idx = np.searchsorted(cum, np.asarray(u) * cum[-1], side="right")
        return nbrs[np.minimum(idx, len(nbrs) - 1)]


def walk_rng(seed: int, node: int, walk_index: int) -> np.random.Generator:
    return np.random.default_rng([seed & _U64, node, walk_index])


def generate_walk(
    graph: CooccurrenceGraph,
    start: int,
    params: WalkParams,
    rng: np.random.Generator,
    table: TransitionTable | None = None,
) -> list[int]:
    table = table or TransitionTable(graph, params.p, params.q)
    walk = [start]
    draws = rng.random(params.walk_length - 1)
    for u in draws:
        curr = walk[-1]
        if len(graph.neighbors(curr)) == 0:
            break
        prev = walk[-2] if len(walk) > 1 else None
        walk.append(int(table.sample(prev, curr, u)))
    return walk


def generate_corpus(graph: CooccurrenceGraph, params: WalkParams) -> WalkCorpus:
    """``num_walks`` walks from every non-isolated node.

    Each round visits nodes in a seed-determined shuffled order; walk ``r``
    from node ``v`` draws from its own stream keyed by (seed, v, r), so the
    corpus does not depend on how generation is scheduled.
    """
    nodes = graph.non_isolated_nodes()
    if not nodes:
        raise EmptyGraph("graph has no edges")
    table = TransitionTable(graph, params.p, params.q)
    walks = []
    for r in range(params.num_walks):
        order = list(nodes)
        np.random.default_rng([params.seed & _U64, _ORDER_STREAM, r]).shuffle(order)
        for v in order:
            walks.append(generate_walk(graph, v, params, walk_rng(params.seed, v, r), table))
    return WalkCorpus(walks, graph.n_nodes, graph.tags)


def sample_next_steps(
    graph: CooccurrenceGraph, prev: int | None, curr: int, p: float, q: float, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``n`` independent next steps from (prev, curr); same sampler as the walk generator."""
    return TransitionTable(graph, p, q).sample(prev, curr, rng.random(n))


def _token(tag: str) -> str:
    return quote(tag, safe="!\"#$&'()*+,-./:;<=>?@[\\]^_`{|}~")


def format_corpus(corpus: WalkCorpus) -> str:
    """One walk per line, space-separated tag names (spaces inside a tag are %-escaped)."""
    label = (lambda v: _token(corpus.tags[v])) if corpus.tags is not None else str
    return "".join(" ".join(label(v) for v in walk) + "\n" for walk in corpus.walks)


def parse_corpus(text: str, tags: list[str]) -> WalkCorpus:
    index = {t: i for i, t in enumerate(tags)}
    walks = [[index[unquote(tok)] for tok in line.split()] for line in text.splitlines() if line.strip()]
    return WalkCorpus(walks, len(tags), list(tags))
