"""Presence matrix and weighted alarm co-occurrence graph."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyPresence, IndexOutOfVocabulary
from .ingest import TagVocabulary
from .preprocess import AlarmSequence


@dataclass(frozen=True)
class PresenceMatrix:
    W: np.ndarray  # (M, N) uint8

    @property
    def n_sequences(self) -> int:
        return self.W.shape[0]

    @property
    def n_tags(self) -> int:
        return self.W.shape[1]


@dataclass
class CooccurrenceGraph:
    """Undirected weighted graph; ``edges`` maps (p, q) with p < q to a weight in (0, 1]."""

    n_nodes: int
    edges: dict[tuple[int, int], float]
    support: np.ndarray
    tags: list[str] | None = None
    _adj: list[tuple[np.ndarray, np.ndarray]] = field(init=False, repr=False)

    def __post_init__(self):
        nbrs: list[list[tuple[int, float]]] = [[] for _ in range(self.n_nodes)]
        for (p, q), w in self.edges.items():
            if not p < q:
                raise ValueError(f"edge key {(p, q)} must have p < q")
            nbrs[p].append((q, w))
            nbrs[q].append((p, w))
        self._adj = []
        for lst in nbrs:
            lst.sort()
            self._adj.append(
                (np.array([x for x, _ in lst], dtype=np.int64), np.array([w for _, w in lst], dtype=float))
            )

    def neighbors(self, v: int) -> np.ndarray:
        return self._adj[v][0]

    def neighbor_weights(self, v: int) -> np.ndarray:
        return self._adj[v][1]

    def weight(self, p: int, q: int) -> float:
        if p == q:
            return 0.0
        return self.edges.get((min(p, q), max(p, q)), 0.0)

    def has_edge(self, p: int, q: int) -> bool:
        return p != q and (min(p, q), max(p, q)) in self.edges

    @property
    def isolated(self) -> np.ndarray:
        return np.array([len(self._adj[v][0]) == 0 for v in range(self.n_nodes)], dtype=bool)

    def non_isolated_nodes(self) -> list[int]:
        return [v for v in range(self.n_nodes) if len(self._adj[v][0])]


def presence_matrix(sequences: Sequence[AlarmSequence], vocab: TagVocabulary | int) -> PresenceMatrix:
    n = vocab if isinstance(vocab, int) else len(vocab)
    W = np.zeros((len(sequences), n), dtype=np.uint8)
    for i, seq in enumerate(sequences):
        for p in seq.tag_indices:
            if not 0 <= p < n:
                raise IndexOutOfVocabulary(f"tag index {p} in sequence {seq.id} outside vocabulary of size {n}")
            W[i, p] = 1
    return PresenceMatrix(W)


def build_graph(presence: PresenceMatrix | np.ndarray, tags: Iterable[str] | None = None) -> CooccurrenceGraph:
    """Edge weight = fraction of sequences containing both alarms."""
    W = presence.W if isinstance(presence, PresenceMatrix) else np.asarray(presence)
    M, N = W.shape
    if M == 0:
        raise EmptyPresence("presence matrix has no sequences")
    Wi = W.astype(np.int64)
    counts = Wi.T @ Wi  # exact integer co-occurrence counts
    ps, qs = np.nonzero(np.triu(counts, k=1))
    edges = {(int(p), int(q)): int(counts[p, q]) / M for p, q in zip(ps, qs)}
    support = np.diag(counts) / M
    return CooccurrenceGraph(N, edges, support, list(tags) if tags is not None else None)


def _label(graph: CooccurrenceGraph, v: int) -> str:
    return graph.tags[v] if graph.tags is not None else str(v)


def format_edges(graph: CooccurrenceGraph) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tag_p", "tag_q", "weight"])
    for (p, q), wt in sorted(graph.edges.items()):
        w.writerow([_label(graph, p), _label(graph, q), repr(wt)])
    return buf.getvalue()


def format_nodes(graph: CooccurrenceGraph) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tag", "support", "isolated"])
    iso = graph.isolated
    for v in range(graph.n_nodes):
        w.writerow([_label(graph, v), repr(float(graph.support[v])), int(iso[v])])
    return buf.getvalue()


def parse_graph(nodes_text: str, edges_text: str) -> CooccurrenceGraph:
    """Rebuild a graph from the node and edge tables written by :func:`format_nodes` / :func:`format_edges`."""
    node_rows = list(csv.reader(io.StringIO(nodes_text)))[1:]
    tags = [r[0] for r in node_rows]
    index = {t: i for i, t in enumerate(tags)}
    support = np.array([float(r[1]) for r in node_rows])
    edges = {}
    for tp, tq, wt in list(csv.reader(io.StringIO(edges_text)))[1:]:
        p, q = index[tp], index[tq]
        edges[(min(p, q), max(p, q))] = float(wt)
    return CooccurrenceGraph(len(tags), edges, support, tags)
