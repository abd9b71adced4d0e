"""Heavy-tailed pair affinities and KL-divergence embedding.

High-dimensional affinities are ``p_ij ~ 1 / (eps + D_ij**2)`` on the
adjusted distances, low-dimensional ones ``q_ij ~ 1 / (1 + |y_i - y_j|**2)``.
Both are normalized once over all ordered pairs ``i != j`` (not per row),
so row sums keep the relative isolation of each point.

Gradient of ``KL(P || Q)`` with respect to ``y_i``::

    4 * sum_j (p_ij - q_ij) * (1 + |y_i - y_j|**2)**-1 * (y_i - y_j)

(the usual symmetric heavy-tailed derivation: ``log q_ij`` contributes
``-2 w_ij (y_i - y_j)`` per ordered pair and the normalizer contributes
``+2 q_ij w_ij (y_i - y_j)``; each unordered pair appears twice.)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import optimize
from scipy.spatial.distance import pdist, squareform

from .dataset import SeedLike, make_rng
from .exceptions import (ContractError, DegenerateDataError, InvalidParameterError,
                         OptimizationDivergedError)
from .metricspace import DistanceMatrix, MetricKind

__all__ = [
    "AffinityMatrix",
    "Embedding",
    "OptimizerState",
    "high_affinities",
    "low_affinities",
    "kl_divergence",
    "kl_gradient",
    "optimize_embedding",
]

log = logging.getLogger(__name__)

DEFAULT_EPSILON_FACTOR = 1e-6
MOMENTUM = 0.8
INITIAL_LEARNING_RATE = 10.0
LR_GROWTH = 1.05
MAX_HALVINGS = 30
RANDOM_INIT_SCALE = 1e-2


@dataclass(frozen=True)
class Embedding:
    """``N x d`` low-dimensional coordinates."""

    coords: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.array(self.coords, dtype=float, copy=True)
        if c.ndim != 2 or c.shape[0] < 2 or c.shape[1] < 1:
            raise InvalidParameterError(f"coords must be N x d with N >= 2, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidParameterError("embedding coordinates must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def N(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class AffinityMatrix:
    """Globally normalized pair affinities with zero diagonal."""

    values: np.ndarray
    epsilon: float = 0.0
    epsilon_factor: Optional[float] = None

    @property
    def N(self) -> int:
        return self.values.shape[0]


@dataclass
class OptimizerState:
    coords: np.ndarray
    velocity: np.ndarray
    learning_rate: float = INITIAL_LEARNING_RATE
    momentum: float = MOMENTUM
    iteration: int = 0
    kl_history: List[float] = field(default_factory=list)


def high_affinities(adjusted: DistanceMatrix,
                    epsilon_factor: float = DEFAULT_EPSILON_FACTOR) -> AffinityMatrix:
    """``p_ij`` from adjusted distances; ``eps = epsilon_factor * median(D**2)``."""
    if adjusted.kind != MetricKind.ADJUSTED:
        raise ContractError(f"expected an adjusted distance matrix, got kind={adjusted.kind.value}")
    if not epsilon_factor > 0:
        raise InvalidParameterError("epsilon_factor must be positive")
    sq = adjusted.condensed() ** 2
    if not np.any(sq > 0):
        raise DegenerateDataError("all adjusted distances are zero")
    med = float(np.median(sq))
    if med == 0.0:
        # more than half the pairs coincide; fall back to the nonzero ones
        med = float(np.median(sq[sq > 0]))
    eps = epsilon_factor * med
    kernel = 1.0 / (eps + adjusted.values ** 2)
    np.fill_diagonal(kernel, 0.0)
    return AffinityMatrix(kernel / kernel.sum(), epsilon=eps, epsilon_factor=epsilon_factor)


def _coords(emb):
    return emb.coords if isinstance(emb, Embedding) else np.asarray(emb, dtype=float)


def _kernel(Y):
    W = 1.0 / (1.0 + squareform(pdist(Y, "sqeuclidean")))
    np.fill_diagonal(W, 0.0)
    return W


def low_affinities(emb) -> AffinityMatrix:
    """``q_ij`` from embedding coordinates (Student-t kernel, one degree of freedom)."""
    W = _kernel(_coords(emb))
    return AffinityMatrix(W / W.sum())


def kl_divergence(P: AffinityMatrix, Q: AffinityMatrix) -> float:
    """``sum_{i != j} p_ij log(p_ij / q_ij)``."""
    p, q = P.values, Q.values
    if p.shape != q.shape:
        raise ContractError(f"shape mismatch {p.shape} vs {q.shape}")
    mask = ~np.eye(p.shape[0], dtype=bool)
    pm, qm = p[mask], q[mask]
    pos = pm > 0
    return float(np.sum(pm[pos] * (np.log(pm[pos]) - np.log(qm[pos]))))


def _kl_and_kernel(p, Y):
    W = _kernel(Y)
    Z = W.sum()
    mask = p > 0
    # sum p log p - sum p log(w / Z); sum(p) == 1
    kl = float(np.sum(p[mask] * (np.log(p[mask]) - np.log(W[mask]))) + math.log(Z))
    return kl, W, Z


def _gradient(p, Y, W, Z):
    M = (p - W / Z) * W
    return 4.0 * (M.sum(axis=1)[:, None] * Y - M @ Y)


def kl_gradient(P: AffinityMatrix, emb) -> np.ndarray:
    """Analytic gradient of ``KL(P || Q(Y))`` with respect to the coordinates."""
    Y = _coords(emb)
    W = _kernel(Y)
    return _gradient(P.values, Y, W, W.sum())


def _initial_coords(P, d, init, dist_for_init, rng):
    if init == "mds":
        if dist_for_init is None:
            raise ContractError("init='mds' requires dist_for_init")
        from .baseline import classical_mds
        Y0 = np.array(classical_mds(dist_for_init, d).coords)
        if dist_for_init.kind == MetricKind.ADJUSTED and P.epsilon > 0:
            # makes 1/(1 + |y|^2) coincide with 1/(eps + D^2) up to a constant
            Y0 = Y0 / math.sqrt(P.epsilon)
        return Y0
    if init == "random":
        return make_rng(rng).standard_normal((P.N, d)) * RANDOM_INIT_SCALE
    raise InvalidParameterError(f"unknown init {init!r}; use 'mds' or 'random'")


def optimize_embedding(P: AffinityMatrix, d: int = 2, init: str = "mds",
                       dist_for_init: Optional[DistanceMatrix] = None,
                       rng: SeedLike = 0, max_iters: int = 1000, tol: float = 1e-7,
                       learning_rate: float = INITIAL_LEARNING_RATE,
                       momentum: float = MOMENTUM, method: str = "momentum"):
    """Minimize ``KL(P || Q(Y))`` by momentum descent with step rejection.

    A trial step that raises the objective is discarded, the velocity is
    reset and the learning rate halved (at most ``MAX_HALVINGS`` times);
    each accepted step multiplies the rate by ``LR_GROWTH``.  The objective
    is therefore nonincreasing along the returned history.  Steps are taken
    in units of the initial median pair distance so that the learning rate
    does not depend on the overall scale of the initial configuration.

    ``method="lbfgs"`` runs limited-memory BFGS (scipy) on the same
    objective instead.  Its line search only accepts decreasing steps, so
    the history is nonincreasing as well, and it reaches the minimum in far
    fewer iterations on large, badly conditioned problems.

    Returns
    -------
    (Embedding, list of float)
        Final coordinates and the objective after every accepted step
        (the first entry is the initial value).
    """
    if d not in (2, 3):
        raise InvalidParameterError(f"target dimension must be 2 or 3, got {d}")
    if max_iters < 1:
        raise InvalidParameterError("max_iters must be >= 1")
    if method not in ("momentum", "lbfgs"):
        raise InvalidParameterError(f"unknown method {method!r}; use 'momentum' or 'lbfgs'")
    if not 0 <= momentum < 1:
        raise InvalidParameterError("momentum must lie in [0, 1)")
    p = P.values
    Y = _initial_coords(P, d, init, dist_for_init, rng)

    unit = float(np.median(pdist(Y))) if Y.shape[0] > 1 else 1.0
    if not unit > 0:
        unit = 1.0

    if method == "lbfgs":
        return _optimize_lbfgs(p, Y, unit, max_iters, tol)

    state = OptimizerState(coords=Y, velocity=np.zeros_like(Y),
                           learning_rate=learning_rate, momentum=momentum)
    kl, W, Z = _kl_and_kernel(p, Y)
    if not math.isfinite(kl):
        raise OptimizationDivergedError("objective is not finite", 0)
    state.kl_history.append(kl)

    for it in range(1, max_iters + 1):
        state.iteration = it
        grad = _gradient(p, state.coords, W, Z)
        if not np.all(np.isfinite(grad)):
            raise OptimizationDivergedError("gradient is not finite", it)
        # gradient in scaled coordinates is unit * grad; step back in raw units
        direction = -(unit * unit) * grad
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            v = state.momentum * state.velocity + state.learning_rate * direction
            Y_new = state.coords + v
            kl_new, W_new, Z_new = _kl_and_kernel(p, Y_new)
            if math.isfinite(kl_new) and kl_new <= kl:
                accepted = True
                break
            state.velocity = np.zeros_like(Y)
            state.learning_rate *= 0.5
        if not accepted:
            log.debug("no descent step after %d halvings at iteration %d", MAX_HALVINGS, it)
            break
        state.coords, state.velocity = Y_new, v
        state.learning_rate *= LR_GROWTH
        W, Z = W_new, Z_new
        change = kl - kl_new
        kl = kl_new
        state.kl_history.append(kl)
        if change <= tol * max(abs(kl), 1e-300):
            break

    if not np.all(np.isfinite(state.coords)):
        raise OptimizationDivergedError("coordinates are not finite", state.iteration)
    return Embedding(state.coords), state.kl_history


def _optimize_lbfgs(p, Y0, unit, max_iters, tol):
    shape = Y0.shape
    history = []

    def fun(x):
        Y = x.reshape(shape) * unit
        kl, W, Z = _kl_and_kernel(p, Y)
        if not math.isfinite(kl):
            # a non-finite trial point makes the line search back off
            return math.inf, np.zeros_like(x)
        g = _gradient(p, Y, W, Z) * unit
        return kl, g.ravel()

    kl0, g0 = fun(Y0.ravel() / unit)
    if not math.isfinite(kl0):
        raise OptimizationDivergedError("objective is not finite", 0)
    if not np.all(np.isfinite(g0)):
        raise OptimizationDivergedError("gradient is not finite", 0)
    history.append(kl0)

    def callback(intermediate_result):
        kl = float(intermediate_result.fun)
        prev = history[-1]
        history.append(kl)
        if prev - kl <= tol * max(abs(kl), 1e-300):
            raise StopIteration

    res = optimize.minimize(fun, Y0.ravel() / unit, jac=True, method="L-BFGS-B",
                            callback=callback,
                            options={"maxiter": max_iters, "gtol": 0.0, "ftol": 0.0})
    Y = res.x.reshape(shape) * unit
    if not np.all(np.isfinite(Y)):
        raise OptimizationDivergedError("coordinates are not finite", len(history) - 1)
    return Embedding(Y), history
