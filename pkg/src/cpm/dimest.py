"""Multi-scale intrinsic dimension from pair counts.

The pair-count capacity ``C(r)`` is the fraction of ordered pairs within
distance ``r``.  Its finite-difference derivative is the pair density
``rho(r)``, modelled as ``c * n(r) * r**(n(r) - 1)`` with a slowly varying
dimension ``n(r)``.  The constant ``c`` and the small-scale (correlation)
dimension ``n0`` come from a log-log line fit of ``C`` near ``r = 0``; the
per-scale dimension is then found by a one-dimensional grid search.

All distances are first divided by the smallest nonzero pair distance.
Every bin center then satisfies ``r >= 1``, where ``n * r**(n - 1)`` is
increasing in ``n`` and the grid search has a single minimizer.  The same
unit is used by :mod:`cpm.cad`, so ``C(r) ~ c r**n`` and the adjusted
distance ``r**(n / d)`` are expressed on one scale.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DegenerateDataError, InsufficientDataError, InvalidParameterError
from .metricspace import DistanceMatrix

__all__ = [
    "CapacityCurve",
    "DensityCurve",
    "DimensionCurve",
    "normalize_distances",
    "empirical_capacity",
    "empirical_density",
    "initial_dimension_guess",
    "fit_c_and_n0",
    "refine_dimension_at_scale",
    "dimension_curve",
    "n_m_at",
    "N_MIN_CLAMP",
    "GRID_STEP",
]

N_MIN_CLAMP = 0.1
GRID_STEP = 0.01
DEFAULT_SMALL_SCALE_FRACTION = 0.05
MIN_FIT_POINTS = 5


class SmallSampleWarning(UserWarning):
    """Fewer pairs than recommended for the requested number of scales."""


@dataclass(frozen=True)
class CapacityCurve:
    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape:
            raise InvalidParameterError("radii and values must be 1-D of equal length")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class DensityCurve:
    radii: np.ndarray
    values: np.ndarray
    bin_widths: np.ndarray


@dataclass(frozen=True)
class DimensionCurve:
    """Estimated dimension per scale bin, on normalized distances.

    Attributes
    ----------
    radii : ndarray
        Bin centers (normalized units).
    n_of_r : ndarray
        Smoothed dimension estimate per bin.
    c, n0 : float
        Small-scale fit ``C(r) ~ c * r**n0``.
    scale : float
        Distance unit the input was divided by (see :func:`normalize_distances`).
    n_raw : ndarray
        Per-bin estimates before smoothing.
    edges : ndarray
        Bin edges (normalized units), ``len(radii) + 1`` values.
    """

    radii: np.ndarray
    n_of_r: np.ndarray
    c: float
    n0: float
    scale: float = 1.0
    n_raw: Optional[np.ndarray] = None
    edges: Optional[np.ndarray] = None
    n_min: float = N_MIN_CLAMP
    n_max: float = math.inf

    def to_dict(self) -> dict:
        return {
            "radii": [float(x) for x in self.radii],
            "n": [float(x) for x in self.n_of_r],
            "c": float(self.c),
            "n0": float(self.n0),
            "scale": float(self.scale),
        }

    def rescaled(self, new_scale: float) -> "DimensionCurve":
        """Same curve with radii expressed in units of ``new_scale`` (raw distance)."""
        if not new_scale > 0:
            raise InvalidParameterError("new_scale must be positive")
        k = self.scale / new_scale
        return dataclasses.replace(
            self, radii=self.radii * k, c=self.c * k ** (-self.n0), scale=float(new_scale),
            edges=None if self.edges is None else self.edges * k)

    @classmethod
    def constant(cls, n: float, scale: float = 1.0) -> "DimensionCurve":
        """A flat curve, handy for testing the adjusted distance."""
        return cls(radii=np.array([1.0]), n_of_r=np.array([float(n)]), c=1.0,
                   n0=float(n), scale=scale)


def normalize_distances(dist: DistanceMatrix, pivot: float = 0.0) -> DistanceMatrix:
    """Divide by the ``pivot`` quantile of nonzero pair distances; record the factor.

    ``pivot=0`` (default) uses the smallest nonzero distance, ``0.5`` the median.
    """
    pairs = dist.condensed()
    nonzero = np.sort(pairs[pairs > 0])
    if nonzero.size == 0:
        raise DegenerateDataError("all pairwise distances are zero")
    s = float(nonzero[int(round(pivot * (nonzero.size - 1)))])
    return DistanceMatrix(dist.values / s, dist.kind, scale=dist.scale * s)


def _sorted_pairs(dist) -> np.ndarray:
    if isinstance(dist, DistanceMatrix):
        return np.sort(dist.condensed())
    return np.sort(np.asarray(dist, dtype=float))


def empirical_capacity(dist, radii) -> CapacityCurve:
    """Fraction of ordered pairs ``i != j`` with ``dist[i, j] <= r``.

    ``dist`` may be a :class:`DistanceMatrix` or a 1-D array of the
    ``N(N-1)/2`` unordered pair distances.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0:
        raise InvalidParameterError("radius grid must be a non-empty 1-D array")
    if np.any(radii < 0) or np.any(np.diff(radii) <= 0):
        raise InvalidParameterError("radii must be non-negative and strictly increasing")
    pairs = _sorted_pairs(dist)
    # each unordered pair appears twice in the ordered sum and twice in N(N-1)
    counts = np.searchsorted(pairs, radii, side="right")
    return CapacityCurve(radii, counts / pairs.size)


def empirical_density(capacity: CapacityCurve) -> DensityCurve:
    """Forward differences of the capacity, reported at bin midpoints."""
    r, C = capacity.radii, capacity.values
    if r.size < 2:
        raise InvalidParameterError("need at least two radii for a finite difference")
    widths = np.diff(r)
    return DensityCurve(radii=(r[:-1] + r[1:]) / 2, values=np.diff(C) / widths,
                        bin_widths=widths)


def initial_dimension_guess(density: DensityCurve, bin: int) -> Optional[float]:
    """Log-log slope of the density between ``bin`` and ``bin + 1``, plus one.

    Returns ``None`` if either density value is zero.  The result is not
    clamped and may be negative.
    """
    if not 0 <= bin < len(density.values) - 1:
        raise InvalidParameterError(f"bin {bin} has no right neighbour")
    rho0, rho1 = density.values[bin], density.values[bin + 1]
    r0, r1 = density.radii[bin], density.radii[bin + 1]
    if rho0 <= 0 or rho1 <= 0 or r0 <= 0 or r1 <= 0:
        return None
    return 1.0 + (math.log(rho1) - math.log(rho0)) / (math.log(r1) - math.log(r0))


def fit_c_and_n0(capacity: CapacityCurve,
                 small_scale_fraction: float = DEFAULT_SMALL_SCALE_FRACTION):
    """Least-squares fit of ``log C = log c + n0 log r`` at small scales.

    Uses grid points with ``0 < C(r) <= small_scale_fraction``; since ``C``
    is the distribution function of pair distances this is the radius at
    that quantile.

    Returns
    -------
    (c, n0) : tuple of float
    """
    r, C = capacity.radii, capacity.values
    use = (C > 0) & (C <= small_scale_fraction) & (r > 0)
    if use.sum() < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"only {int(use.sum())} radii with 0 < C(r) <= {small_scale_fraction}; "
            f"need {MIN_FIT_POINTS}. Use a larger sample or a larger small-scale fraction.")
    slope, intercept = np.polyfit(np.log(r[use]), np.log(C[use]), 1)
    return float(math.exp(intercept)), float(slope)


def _search_grid(n_min, n_max, step):
    count = int(math.floor((n_max - n_min) / step + 1e-9)) + 1
    return n_min + step * np.arange(count)


def refine_dimension_at_scale(density_value: float, r0: float, c: float,
                              initial_guess: Optional[float], *,
                              fallback: Optional[float] = None,
                              n_min: float = N_MIN_CLAMP, n_max: float = 30.0,
                              step: float = GRID_STEP) -> float:
    """Brute-force ``argmin_n (density_value - c n r0**(n-1))**2`` on a grid.

    For ``r0 < 1`` the model is not monotone in ``n`` and the residual can
    vanish at two dimensions.  Every grid point that brackets a sign change
    of the residual is an exact minimizer at grid resolution; those ties go
    to the one nearest ``initial_guess`` (or ``fallback`` when the guess is
    unavailable).  Without a bracketed root the plain argmin is used, with
    exact ties resolved the same way.
    """
    if c <= 0 or r0 <= 0:
        raise InvalidParameterError("c and r0 must be positive")
    grid = _search_grid(n_min, n_max, step)
    model = c * grid * np.exp((grid - 1.0) * math.log(r0))
    diff = density_value - model
    resid = diff * diff

    sign_change = np.flatnonzero(diff[:-1] * diff[1:] <= 0)
    if sign_change.size:
        left, right = sign_change, sign_change + 1
        candidates = np.unique(np.where(resid[left] <= resid[right], left, right))
    else:
        candidates = np.flatnonzero(resid == resid.min())

    reference = initial_guess if initial_guess is not None else fallback
    if reference is None or not math.isfinite(reference) or candidates.size == 1:
        best = candidates[np.argmin(resid[candidates])]
    else:
        # nearest to the reference; equal distance goes to the smaller residual
        key = np.lexsort((resid[candidates], np.abs(grid[candidates] - reference)))
        best = candidates[key[0]]
    return float(min(max(grid[best], n_min), n_max))


def _moving_average(values, width):
    if width <= 1:
        return values.copy()
    half_lo = (width - 1) // 2
    half_hi = width - 1 - half_lo
    padded = np.pad(values, (half_lo, half_hi), mode="edge")
    kernel = np.ones(width) / width
    return np.convolve(padded, kernel, mode="valid")


def _quantile_edges(sorted_nonzero, num_scales):
    L = sorted_nonzero.size
    idx = np.rint(np.linspace(0, L - 1, num_scales + 1)).astype(np.int64)
    return np.unique(sorted_nonzero[idx])


def _small_scale_grid(sorted_nonzero, total_pairs, fraction, points=24):
    # from the ~10th smallest pair up to the fraction quantile, log-spaced
    hi_rank = max(int(math.floor(fraction * total_pairs)) - 1, 0)
    hi_rank = min(hi_rank, sorted_nonzero.size - 1)
    lo_rank = min(max(9, hi_rank // 1000), hi_rank)
    r_lo, r_hi = sorted_nonzero[lo_rank], sorted_nonzero[hi_rank]
    if not r_hi > r_lo:
        return sorted_nonzero[: hi_rank + 1]
    return np.geomspace(r_lo, r_hi, points)


def dimension_curve(dist: DistanceMatrix, num_scales: int = 50, smoothing_width: int = 3,
                    *, small_scale_fraction: float = DEFAULT_SMALL_SCALE_FRACTION,
                    ambient_dim: Optional[int] = None, pivot: float = 0.0) -> DimensionCurve:
    """Estimate ``n(r)`` on ``num_scales`` equal-pair-count bins.

    Parameters
    ----------
    dist : DistanceMatrix
        Raw (unnormalized) distances; normalization is applied here.
    num_scales : int
        Number of quantile bins ``M`` (>= 4).
    smoothing_width : int
        Width of the centered moving average applied to the per-bin
        estimates; edge values are repeated at the boundaries.
    ambient_dim : int, optional
        Upper search bound is ``3 * ambient_dim``.  When unknown, the bound
        is ``max(3, 3 * ceil(n0))``.
    pivot : float
        Quantile of nonzero distances used as the unit, see
        :func:`normalize_distances`.
    """
    if num_scales < 4:
        raise InvalidParameterError(f"num_scales must be >= 4, got {num_scales}")
    if smoothing_width < 1:
        raise InvalidParameterError("smoothing_width must be >= 1")
    norm = normalize_distances(dist, pivot)
    pairs = np.sort(norm.condensed())
    total = pairs.size
    if total < 10 * num_scales:
        warnings.warn(
            f"{total} pairs for {num_scales} scales; at least {10 * num_scales} recommended",
            SmallSampleWarning, stacklevel=2)
    nonzero = pairs[pairs > 0]

    edges = _quantile_edges(nonzero, num_scales)
    if edges.size < 3:
        raise DegenerateDataError("pairwise distances take fewer than 3 distinct values")
    density = empirical_density(empirical_capacity(pairs, edges))

    try:
        fit_grid = _small_scale_grid(nonzero, total, small_scale_fraction)
        c, n0 = fit_c_and_n0(empirical_capacity(pairs, fit_grid), small_scale_fraction)
    except InsufficientDataError:
        # tiny samples: fall back to the first few quantile edges
        c, n0 = fit_c_and_n0(empirical_capacity(pairs, edges),
                             max(small_scale_fraction, 6.0 / (edges.size - 1)))

    n_max = 3.0 * ambient_dim if ambient_dim else max(3.0, 3.0 * math.ceil(max(n0, 1.0)))
    n_min = N_MIN_CLAMP
    fallback = min(max(n0, n_min), n_max)

    nbins = density.values.size
    raw = np.empty(nbins)
    for k in range(nbins):
        j = k if k < nbins - 1 else k - 1
        guess = initial_dimension_guess(density, j) if nbins > 1 else None
        raw[k] = refine_dimension_at_scale(
            density.values[k], density.radii[k], c, guess,
            fallback=fallback, n_min=n_min, n_max=n_max)

    smooth = np.clip(_moving_average(raw, smoothing_width), n_min, n_max)
    return DimensionCurve(radii=density.radii, n_of_r=smooth, c=c, n0=n0,
                          scale=norm.scale, n_raw=raw, edges=edges,
                          n_min=n_min, n_max=n_max)


def n_m_at(curve: DimensionCurve, r):
    """Piecewise-linear ``n(r)``, constant beyond the first and last bin centers."""
    out = np.interp(np.asarray(r, dtype=float), curve.radii, curve.n_of_r)
    return float(out) if np.ndim(out) == 0 else out
