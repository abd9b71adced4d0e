"""End-to-end capacity preserving mapping.

distances -> dimension curve -> adjusted distances -> affinities -> KL descent
"""

from __future__ import annotations

import dataclasses
import json
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .baseline import classical_mds
from .cad import adjusted_distance_matrix
from .dataset import Dataset
from .dimest import DimensionCurve, dimension_curve
from .embed import Embedding, high_affinities, optimize_embedding
from .exceptions import DegenerateDataError, InvalidParameterError
from .metricspace import (BridgedGraphWarning, DistanceMatrix, euclidean_distance_matrix,
                          geodesic_distance_matrix, knn_graph)

__all__ = ["RunConfig", "CPMResult", "compute_distances", "median_distance", "run_cpm",
           "run_mds"]


@dataclass(frozen=True)
class RunConfig:
    metric: str = "euclidean"
    knn: int = 10
    target_dim: int = 2
    num_scales: int = 50
    smoothing_width: int = 3
    epsilon_factor: float = 1e-6
    max_iters: int = 1000
    tol: float = 1e-7
    init: str = "mds"
    seed: int = 0
    optimizer: str = "momentum"

    def __post_init__(self):
        if self.metric not in ("euclidean", "geodesic"):
            raise InvalidParameterError(f"metric must be euclidean or geodesic, got {self.metric!r}")
        if self.target_dim not in (2, 3):
            raise InvalidParameterError("target_dim must be 2 or 3")
        if self.knn < 1:
            raise InvalidParameterError("knn must be >= 1")
        if self.num_scales < 4:
            raise InvalidParameterError("num_scales must be >= 4")
        if self.smoothing_width < 1:
            raise InvalidParameterError("smoothing_width must be >= 1")
        if not self.epsilon_factor > 0:
            raise InvalidParameterError("epsilon_factor must be positive")
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be >= 1")
        if self.init not in ("mds", "random"):
            raise InvalidParameterError("init must be mds or random")
        if self.optimizer not in ("momentum", "lbfgs"):
            raise InvalidParameterError("optimizer must be momentum or lbfgs")
        if self.seed < 0:
            raise InvalidParameterError("seed must be non-negative")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


@dataclass
class CPMResult:
    embedding: Embedding
    curve: DimensionCurve
    kl_history: List[float]
    distances: DistanceMatrix
    adjusted: DistanceMatrix
    warnings: List[str] = field(default_factory=list)


def compute_distances(data: Dataset, metric: str = "euclidean", knn: int = 10):
    """Distance matrix for ``metric``, plus any bridging warnings raised on the way."""
    notes = []
    if metric == "euclidean":
        return euclidean_distance_matrix(data), notes
    if metric == "geodesic":
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", BridgedGraphWarning)
            graph = knn_graph(data, knn)
        notes.extend(str(w.message) for w in caught if issubclass(w.category, BridgedGraphWarning))
        return geodesic_distance_matrix(graph), notes
    raise InvalidParameterError(f"unknown metric {metric!r}")


def median_distance(dist: DistanceMatrix) -> float:
    """Median of the nonzero pair distances."""
    pairs = dist.condensed()
    pairs = pairs[pairs > 0]
    if pairs.size == 0:
        raise DegenerateDataError("all pairwise distances are zero")
    return float(np.median(pairs))


def run_cpm(data: Dataset, config: Optional[RunConfig] = None,
            distances: Optional[DistanceMatrix] = None) -> CPMResult:
    """Embed ``data`` with the capacity preserving mapping."""
    config = config or RunConfig()
    notes = []
    if distances is None:
        distances, notes = compute_distances(data, config.metric, config.knn)
    curve = dimension_curve(distances, config.num_scales, config.smoothing_width,
                            ambient_dim=data.n)
    # n(r) is estimated in units of the smallest distance; the adjustment pivots on the median
    adjusted = adjusted_distance_matrix(distances, curve.rescaled(median_distance(distances)),
                                        config.target_dim)
    P = high_affinities(adjusted, config.epsilon_factor)
    emb, history = optimize_embedding(P, config.target_dim, init=config.init,
                                      dist_for_init=adjusted, rng=config.seed,
                                      max_iters=config.max_iters, tol=config.tol,
                                      method=config.optimizer)
    emb = Embedding(emb.coords, data.labels)
    return CPMResult(emb, curve, history, distances, adjusted, notes)


def run_mds(data: Dataset, config: Optional[RunConfig] = None,
            distances: Optional[DistanceMatrix] = None):
    """Classical MDS baseline on the configured metric."""
    config = config or RunConfig()
    notes = []
    if distances is None:
        distances, notes = compute_distances(data, config.metric, config.knn)
    emb = classical_mds(distances, config.target_dim)
    return Embedding(emb.coords, data.labels), notes
