"""Cosine similarity between embedding rows and the labelled-table formats for embeddings."""

from __future__ import annotations

import csv
import io

import numpy as np

from ..errors import ZeroNormRow
from .skipgram import EmbeddingMatrix


def cosine_similarity_matrix(E: EmbeddingMatrix | np.ndarray) -> np.ndarray:
    X = E.vectors if isinstance(E, EmbeddingMatrix) else np.asarray(E, dtype=float)
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0):
        raise ZeroNormRow(f"rows {np.flatnonzero(norms == 0).tolist()} have zero norm")
    U = X / norms[:, None]
    S = U @ U.T
    S = (S + S.T) / 2
    np.fill_diagonal(S, 1.0)
    return S


def format_embeddings(E: EmbeddingMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tag"] + [f"v_{j}" for j in range(E.vectors.shape[1])])
    for label, row in zip(E.labels, E.vectors):
        w.writerow([label] + [repr(float(x)) for x in row])
    return buf.getvalue()


def parse_embeddings(text: str, vocab_tags: list[str] | None = None) -> EmbeddingMatrix:
    rows = list(csv.reader(io.StringIO(text)))[1:]
    tags = [r[0] for r in rows]
    vectors = np.array([[float(x) for x in r[1:]] for r in rows], dtype=float).reshape(len(rows), -1)
    if vocab_tags is not None:
        index = {t: i for i, t in enumerate(vocab_tags)}
        ids = np.array([index[t] for t in tags], dtype=np.int64)
    else:
        ids = np.arange(len(rows), dtype=np.int64)
    return EmbeddingMatrix(vectors, ids, tags)


def format_square(matrix: np.ndarray, labels: list[str]) -> str:
    """Square table with tag labels on both axes; full repr precision."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([""] + list(labels))
    for label, row in zip(labels, matrix):
        w.writerow([label] + [repr(float(x)) for x in row])
    return buf.getvalue()


def parse_square(text: str) -> tuple[np.ndarray, list[str]]:
    rows = list(csv.reader(io.StringIO(text)))
    labels = rows[0][1:]
    if [r[0] for r in rows[1:]] != labels:
        raise ValueError("row labels do not match column labels")
    M = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=float).reshape(len(labels), len(labels))
    return M, labels
