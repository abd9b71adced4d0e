"""Capacity adjusted distances.

A pair at normalized distance ``s`` is moved to ``s ** (n(s) / d)`` where
``n(s)`` is the estimated intrinsic dimension at that scale and ``d`` the
target dimension.  If the data capacity grows like ``c s**n``, the adjusted
distances grow like ``c t**d``: the same rate as a uniform sample in
``R^d``.  Because ``n`` varies with ``s`` the raw map need not be
monotone; a running maximum over the sorted distances restores ranking
while only ever giving pairs more room, never less.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dimest import DimensionCurve, n_m_at
from .exceptions import ContractError, InvalidParameterError
from .metricspace import DistanceMatrix, MetricKind

__all__ = ["CadTransform", "cad", "monotone_envelope", "build_transform",
           "adjusted_distance_matrix"]


def _check_dim(d):
    if d not in (2, 3):
        raise InvalidParameterError(f"target dimension must be 2 or 3, got {d}")


def cad(sigma, curve: DimensionCurve, d: int):
    """``sigma ** (n(sigma) / d)`` with ``cad(0) = 0``; ``sigma`` already normalized."""
    _check_dim(d)
    s = np.asarray(sigma, dtype=float)
    if np.any(s < 0):
        raise InvalidParameterError("distances must be non-negative")
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(n_m_at(curve, s[pos]) / d * np.log(s[pos]))
    return float(out) if out.ndim == 0 else out


def monotone_envelope(sorted_sigmas, cad_values) -> np.ndarray:
    """Running maximum of ``cad_values`` along strictly increasing ``sorted_sigmas``."""
    sig = np.asarray(sorted_sigmas, dtype=float)
    vals = np.asarray(cad_values, dtype=float)
    if sig.shape != vals.shape or sig.ndim != 1:
        raise ContractError("sigmas and values must be 1-D arrays of equal length")
    if np.any(np.diff(sig) <= 0):
        raise ContractError("sigmas must be strictly increasing (collapse duplicates first)")
    return np.maximum.accumulate(vals)


@dataclass(frozen=True)
class CadTransform:
    """Lookup table from unique normalized distances to envelope values."""

    dim_curve: DimensionCurve
    target_dim: int
    sorted_distances: np.ndarray
    envelope_values: np.ndarray

    def __call__(self, sigma):
        """Map normalized distances that were present when the table was built."""
        s = np.asarray(sigma, dtype=float)
        idx = np.searchsorted(self.sorted_distances, s)
        idx = np.clip(idx, 0, self.sorted_distances.size - 1)
        if not np.array_equal(self.sorted_distances[idx], s):
            raise ContractError("distance not in the transform's table")
        return self.envelope_values[idx]


def build_transform(sigmas, curve: DimensionCurve, d: int) -> CadTransform:
    """Adjusted values for each distinct entry of ``sigmas`` (normalized units)."""
    _check_dim(d)
    uniq = np.unique(np.asarray(sigmas, dtype=float))
    return CadTransform(curve, d, uniq, monotone_envelope(uniq, cad(uniq, curve, d)))


def adjusted_distance_matrix(dist: DistanceMatrix, curve: DimensionCurve,
                             d: int) -> DistanceMatrix:
    """Apply the monotone adjusted distance to every entry of ``dist``.

    ``dist`` is given in raw units; it is divided by ``curve.scale`` first.
    """
    _check_dim(d)
    if dist.kind == MetricKind.ADJUSTED:
        raise ContractError("input is already an adjusted distance matrix")
    N = dist.N
    iu = np.triu_indices(N, k=1)
    sigma = dist.values[iu] / curve.scale
    uniq, inverse = np.unique(sigma, return_inverse=True)
    env = monotone_envelope(uniq, cad(uniq, curve, d))
    out = np.zeros((N, N))
    out[iu] = env[inverse]
    out = out + out.T
    return DistanceMatrix(out, MetricKind.ADJUSTED, scale=curve.scale)
