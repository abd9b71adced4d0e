"""Embedding quality measures: Shepard data, cluster proximity, variance, crowding."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.stats import rankdata

from .dataset import Dataset
from .exceptions import ContractError, UndefinedCorrelationError
from .metricspace import DistanceMatrix

__all__ = [
    "ShepardData",
    "ProximityMatrix",
    "shepard_pairs",
    "spearman_rank_correlation",
    "cluster_variances",
    "inter_cluster_distances",
    "proximity_matrix",
    "proximity_error_curve",
    "crowding_overlap_score",
    "write_shepard_csv",
    "write_proximity_csv",
    "write_variance_csv",
    "write_trajectory_csv",
]


class NoNeighboursWarning(UserWarning):
    """The percentile selects zero neighbouring clusters."""


def _points(x):
    if isinstance(x, Dataset):
        return x.points
    if hasattr(x, "coords"):
        return x.coords
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ShepardData:
    """Unordered pairs ``(original distance, embedded distance)``, shape ``(M, 2)``."""

    pairs: np.ndarray

    @property
    def original(self):
        return self.pairs[:, 0]

    @property
    def embedded(self):
        return self.pairs[:, 1]

    def __len__(self):
        return self.pairs.shape[0]


@dataclass(frozen=True)
class ProximityMatrix:
    entries: np.ndarray
    percentile: float


def shepard_pairs(orig: DistanceMatrix, emb) -> ShepardData:
    """Original vs. embedded (Euclidean) distance for every pair ``i < j``."""
    Y = _points(emb)
    if Y.shape[0] != orig.N:
        raise ContractError(f"embedding has {Y.shape[0]} points, distances have {orig.N}")
    return ShepardData(np.column_stack([orig.condensed(), pdist(Y)]))


def spearman_rank_correlation(data: ShepardData) -> float:
    """Pearson correlation of average ranks."""
    if len(data) < 2:
        raise ContractError("need at least two pairs")
    a, b = rankdata(data.original), rankdata(data.embedded)
    a = a - a.mean()
    b = b - b.mean()
    na, nb = math.sqrt(float(a @ a)), math.sqrt(float(b @ b))
    if na == 0 or nb == 0:
        raise UndefinedCorrelationError("rank correlation undefined for a constant column")
    return float(np.clip((a @ b) / (na * nb), -1.0, 1.0))


def cluster_variances(data, labels, normalize: bool = False):
    """Mean squared distance to the cluster mean, per label.

    Returns
    -------
    (labels, variances) : tuple of ndarray
        Sorted unique labels and their variances (divided by the largest
        one when ``normalize`` is set).
    """
    X = _points(data)
    labels = np.asarray(labels)
    if labels.shape[0] != X.shape[0]:
        raise ContractError("labels length does not match number of points")
    uniq = np.unique(labels)
    if uniq.size == 0:
        raise ContractError("no clusters")
    V = np.empty(uniq.size)
    for k, lab in enumerate(uniq):
        members = X[labels == lab]
        V[k] = np.mean(np.sum((members - members.mean(axis=0)) ** 2, axis=1))
    if normalize:
        top = V.max()
        V = V / top if top > 0 else V
    return uniq, V


def inter_cluster_distances(data, labels):
    """Average distance between members of each pair of clusters.

    ``data`` may be points or a :class:`DistanceMatrix`.  Returns
    ``(labels, K x K matrix)`` with a zero diagonal.
    """
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    if isinstance(data, DistanceMatrix):
        full = data.values
    else:
        full = squareform(pdist(_points(data)))
    if labels.shape[0] != full.shape[0]:
        raise ContractError("labels length does not match number of points")
    K = uniq.size
    out = np.zeros((K, K))
    idx = [np.flatnonzero(labels == lab) for lab in uniq]
    for a in range(K):
        for b in range(a + 1, K):
            out[a, b] = out[b, a] = full[np.ix_(idx[a], idx[b])].mean()
    return uniq, out


def proximity_matrix(dist_between_clusters, p: float) -> ProximityMatrix:
    """Mark, for each cluster, its ``floor(p (K-1))`` nearest other clusters.

    Ties in distance go to the smaller cluster index.
    """
    M = np.asarray(dist_between_clusters, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractError("cluster distance matrix must be square")
    if not np.array_equal(M, M.T) or np.any(np.diag(M) != 0):
        raise ContractError("cluster distance matrix must be symmetric with zero diagonal")
    if not 0 < p <= 0.5:
        raise ContractError(f"percentile must lie in (0, 0.5], got {p}")
    K = M.shape[0]
    count = int(math.floor(p * (K - 1) + 1e-9))
    C = np.zeros((K, K), dtype=np.int64)
    if count == 0:
        warnings.warn(f"p={p} selects no neighbours among {K} clusters",
                      NoNeighboursWarning, stacklevel=2)
        return ProximityMatrix(C, p)
    masked = M.copy()
    np.fill_diagonal(masked, np.inf)
    order = np.argsort(masked, axis=1, kind="stable")[:, :count]
    C[np.repeat(np.arange(K), count), order.ravel()] = 1
    return ProximityMatrix(C, p)


def _miss_fraction(C_orig, C_emb):
    total = int(C_orig.sum())
    if total == 0:
        return 0.0
    return float(np.sum((C_orig == 1) & (C_emb == 0)) / total)


def proximity_error_curve(orig_data, emb, labels, p_grid):
    """Fraction of neighbouring-cluster relations lost by the embedding, per ``p``.

    A percentile that yields no neighbours in the original data has no
    relations to lose and scores 0.
    """
    labels = np.asarray(labels)
    if np.unique(labels).size < 2:
        raise ContractError("need at least two clusters")
    p_grid = list(p_grid)
    if not p_grid:
        raise ContractError("p_grid is empty")
    Y = _points(emb)
    if Y.shape[0] != labels.shape[0]:
        raise ContractError("embedding size does not match labels")
    _, D_orig = inter_cluster_distances(orig_data, labels)
    _, D_emb = inter_cluster_distances(Y, labels)
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoNeighboursWarning)
        for p in p_grid:
            C_o = proximity_matrix(D_orig, p).entries
            C_e = proximity_matrix(D_emb, p).entries
            out.append((float(p), _miss_fraction(C_o, C_e)))
    return out


def crowding_overlap_score(emb, labels) -> float:
    """Share of class-2 points farther from the class-1 centroid than the median class-1 point.

    1.0 means the outer class lies entirely outside the inner one; about
    0.5 means the two are mixed.
    """
    Y = _points(emb)
    labels = np.asarray(labels)
    if labels.shape[0] != Y.shape[0]:
        raise ContractError("labels length does not match number of points")
    inner, outer = Y[labels == 1], Y[labels == 2]
    if inner.shape[0] == 0 or outer.shape[0] == 0:
        raise ContractError("crowding score needs classes 1 (inner) and 2 (outer)")
    center = inner.mean(axis=0)
    r_inner = np.linalg.norm(inner - center, axis=1)
    r_outer = np.linalg.norm(outer - center, axis=1)
    return float(np.mean(r_outer > np.median(r_inner)))


def _write_rows(path, header, rows):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(x):
    return format(float(x), ".17g")


def write_shepard_csv(data: ShepardData, path) -> None:
    _write_rows(path, ["orig", "emb"], ([_fmt(a), _fmt(b)] for a, b in data.pairs))


def write_proximity_csv(curve, path) -> None:
    _write_rows(path, ["p", "error"], ([_fmt(p), _fmt(e)] for p, e in curve))


def write_variance_csv(labels, variances, path) -> None:
    top = np.max(variances) if len(variances) else 1.0
    top = top if top > 0 else 1.0
    _write_rows(path, ["label", "variance", "normalized"],
                ([str(int(l)), _fmt(v), _fmt(v / top)] for l, v in zip(labels, variances)))


def write_trajectory_csv(emb, labels, path) -> None:
    """Embedded points grouped by label, in source-row order (for folded-loop inspection)."""
    Y = _points(emb)
    labels = np.asarray(labels)
    rows = []
    for lab in np.unique(labels):
        for step, i in enumerate(np.flatnonzero(labels == lab)):
            rows.append([str(int(lab)), str(step), str(int(i))] + [_fmt(v) for v in Y[i]])
    header = ["label", "order", "row"] + [f"y{k + 1}" for k in range(Y.shape[1])]
    _write_rows(path, header, rows)
