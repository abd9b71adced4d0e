"""Classical (Torgerson) multidimensional scaling."""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .exceptions import CPMError, InvalidParameterError
from .metricspace import DistanceMatrix

__all__ = ["classical_mds"]


def classical_mds(dist, d: int = 2):
    """Embed a distance matrix by the top eigenpairs of its double-centered Gram matrix.

    Parameters
    ----------
    dist : DistanceMatrix or (N, N) array
    d : int
        Output dimension, ``d < N``.

    Returns
    -------
    Embedding
        ``N x d`` coordinates, column-centered.  Negative eigenvalues (from
        non-Euclidean inputs) are clamped to zero.  Each eigenvector is
        signed so that its largest-magnitude entry is positive.
    """
    from .embed import Embedding

    D = dist.values if isinstance(dist, DistanceMatrix) else np.asarray(dist, dtype=float)
    N = D.shape[0]
    if not 1 <= d < N:
        raise InvalidParameterError(f"need 1 <= d < N={N}, got d={d}")

    D2 = D * D
    # -1/2 J D^2 J without forming J
    B = D2 - D2.mean(axis=0, keepdims=True) - D2.mean(axis=1, keepdims=True) + D2.mean()
    B = -0.5 * (B + B.T) / 2
    try:
        evals, evecs = linalg.eigh(B, subset_by_index=[N - d, N - 1])
    except linalg.LinAlgError as exc:
        raise CPMError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]

    for k in range(d):
        j = np.argmax(np.abs(evecs[:, k]))
        if evecs[j, k] < 0:
            evecs[:, k] = -evecs[:, k]
    coords = evecs * np.sqrt(np.clip(evals, 0.0, None))
    coords -= coords.mean(axis=0)
    return Embedding(coords)
