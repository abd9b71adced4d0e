"""Dense pairwise distance matrices: Euclidean and k-NN graph geodesic."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial.distance import pdist, squareform

from .dataset import Dataset
from .exceptions import CPMError, ContractError, InvalidParameterError

__all__ = [
    "MetricKind",
    "DistanceMatrix",
    "KnnGraph",
    "BridgedGraphWarning",
    "euclidean_distance_matrix",
    "knn_graph",
    "geodesic_distance_matrix",
]


class MetricKind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    GEODESIC = "geodesic"
    ADJUSTED = "adjusted"


class BridgedGraphWarning(UserWarning):
    """The k-NN graph was disconnected and had to be joined with extra edges."""


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric, non-negative ``N x N`` matrix with zero diagonal.

    ``scale`` records the factor the values were divided by, if any
    (see :func:`cpm.dimest.normalize_distances`).
    """

    values: np.ndarray
    kind: MetricKind = MetricKind.EUCLIDEAN
    scale: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ContractError(f"distance matrix must be square, got shape {v.shape}")
        if v.shape[0] < 2:
            raise ContractError("distance matrix needs at least 2 points")
        if not np.all(np.isfinite(v)):
            raise ContractError("distance matrix has non-finite entries")
        if np.any(v < 0):
            raise ContractError("distance matrix has negative entries")
        if np.any(np.diag(v) != 0):
            raise ContractError("distance matrix diagonal must be zero")
        if not np.array_equal(v, v.T):
            raise ContractError("distance matrix must be exactly symmetric")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kind", MetricKind(self.kind))

    @property
    def N(self) -> int:
        return self.values.shape[0]

    def condensed(self) -> np.ndarray:
        """Upper-triangle entries (``i < j``) in row-major order."""
        iu = np.triu_indices(self.N, k=1)
        return self.values[iu]

    def to_csv(self, path) -> None:
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g")


def euclidean_distance_matrix(data) -> DistanceMatrix:
    """All-pairs l2 distances between the rows of ``data``."""
    points = data.points if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    return DistanceMatrix(squareform(pdist(points, "euclidean")), MetricKind.EUCLIDEAN)


@dataclass(frozen=True)
class KnnGraph:
    """Undirected weighted graph stored as unique ``i < j`` edge arrays."""

    N: int
    k: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    bridged: bool = False
    bridges: tuple = field(default=())

    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric CSR adjacency.  Zero-weight edges are kept explicitly."""
        r = np.concatenate([self.rows, self.cols])
        c = np.concatenate([self.cols, self.rows])
        w = np.concatenate([self.weights, self.weights])
        return sparse.csr_matrix((w, (r, c)), shape=(self.N, self.N))

    def n_components(self) -> int:
        return connected_components(self.adjacency(), directed=False)[0]


def knn_graph(data, k: int = 10) -> KnnGraph:
    """Union-symmetrized k-nearest-neighbour graph with Euclidean weights.

    Neighbour ties are broken toward the smaller index.  If the result is
    disconnected, the globally shortest edge between two different
    components is added repeatedly until one component remains, and a
    :class:`BridgedGraphWarning` is issued.
    """
    if isinstance(data, DistanceMatrix):
        dist = data.values
    else:
        dist = euclidean_distance_matrix(data).values
    N = dist.shape[0]
    if not 1 <= k < N:
        raise InvalidParameterError(f"k must satisfy 1 <= k < N={N}, got {k}")

    masked = dist.copy()
    np.fill_diagonal(masked, np.inf)
    order = np.argsort(masked, axis=1, kind="stable")[:, :k]
    src = np.repeat(np.arange(N), k)
    dst = order.ravel()
    lo, hi = np.minimum(src, dst), np.maximum(src, dst)
    pairs = np.unique(np.stack([lo, hi], axis=1), axis=0)
    rows, cols = pairs[:, 0], pairs[:, 1]

    bridges = []
    n_comp, comp = _components(N, rows, cols)
    while n_comp > 1:
        cross = comp[:, None] != comp[None, :]
        cand = np.where(cross, dist, np.inf)
        flat = int(np.argmin(cand))  # first occurrence: smallest (i, j)
        i, j = divmod(flat, N)
        i, j = min(i, j), max(i, j)
        bridges.append((i, j))
        rows = np.append(rows, i)
        cols = np.append(cols, j)
        n_comp, comp = _components(N, rows, cols)

    if bridges:
        warnings.warn(
            f"k-NN graph (k={k}) was disconnected; added {len(bridges)} bridging edge(s). "
            "Long-range geodesic distances may be distorted.",
            BridgedGraphWarning, stacklevel=2)

    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    return KnnGraph(N=N, k=k, rows=rows, cols=cols, weights=dist[rows, cols].copy(),
                    bridged=bool(bridges), bridges=tuple(bridges))


def _components(N, rows, cols):
    adj = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(N, N))
    return connected_components(adj, directed=False)


def geodesic_distance_matrix(graph: KnnGraph) -> DistanceMatrix:
    """All-pairs shortest path lengths over ``graph`` (Dijkstra from every source)."""
    lengths = dijkstra(graph.adjacency(), directed=False)
    if not np.all(np.isfinite(lengths)):
        raise CPMError("geodesic distances undefined: graph is disconnected")
    # each source run is independent; enforce bitwise symmetry
    lengths = np.minimum(lengths, lengths.T)
    np.fill_diagonal(lengths, 0.0)
    return DistanceMatrix(lengths, MetricKind.GEODESIC)
