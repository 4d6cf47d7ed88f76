"""Principal component projection of embedding vectors."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInput, DimensionMismatch


@dataclass
class PcaModel:
    mean: np.ndarray  # (d,)
    components: np.ndarray  # (d, k); columns are eigenvectors
    eigenvalues: np.ndarray  # (k,), descending
    covariance: np.ndarray  # (d, d), population form

    @property
    def n_components(self) -> int:
        return self.components.shape[1]


def covariance(X: np.ndarray) -> np.ndarray:
    """Population covariance (divides by m) of the mean-centred rows of ``X``."""
    Xc = X - X.mean(axis=0)
    return Xc.T @ Xc / len(X)


def pca_fit(X: np.ndarray, k: int) -> PcaModel:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) < 2:
        raise DegenerateInput("PCA needs at least 2 samples")
    d = X.shape[1]
    if not 1 <= k <= d:
        raise ValueError(f"k={k} outside 1..{d}")
    mean = X.mean(axis=0)
    cov = covariance(X)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals, kind="stable")[::-1][:k]
    vals, vecs = vals[order], vecs[:, order]
    # sign convention: largest-magnitude entry of each component is positive
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(k)])
    signs[signs == 0] = 1.0
    return PcaModel(mean, vecs * signs, vals, cov)


def pca_transform(model: PcaModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(model.mean):
        raise DimensionMismatch(f"expected {len(model.mean)} columns, got shape {X.shape}")
    return (X - model.mean) @ model.components


def format_projection(labels: Sequence[str], Y: np.ndarray, clusters: Sequence[int] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tag"] + [f"pc{j + 1}" for j in range(Y.shape[1])] + ["cluster"])
    for i, (t, row) in enumerate(zip(labels, Y)):
        c = "" if clusters is None else int(clusters[i])
        w.writerow([t] + [repr(float(x)) for x in row] + [c])
    return buf.getvalue()


def parse_projection(text: str) -> tuple[list[str], np.ndarray, list[int | None]]:
    rows = list(csv.reader(io.StringIO(text)))
    body = rows[1:]
    labels = [r[0] for r in body]
    Y = np.array([[float(x) for x in r[1:-1]] for r in body]).reshape(len(body), len(rows[0]) - 2)
    clusters = [int(r[-1]) if r[-1] != "" else None for r in body]
    return labels, Y, clusters
