"""Point clouds, synthetic generators and CSV interchange.

All generators draw from :func:`make_rng`, a PCG64 bit generator wrapped in
:class:`numpy.random.Generator`.  Given the same parameters and seed they
produce bit-identical arrays.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .exceptions import InvalidGeometryError, InvalidParameterError, ParseError

__all__ = [
    "Dataset",
    "make_rng",
    "load_csv",
    "save_csv",
    "generate_ball_shell",
    "generate_augmented_swiss_roll",
    "generate_gaussian_cloud",
    "generate_gaussian_clusters",
]

SeedLike = Union[int, np.random.Generator, None]


@dataclass(frozen=True)
class Dataset:
    """An immutable sample ``X_1..X_N`` in ``R^n`` with optional integer labels."""

    points: np.ndarray
    labels: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        points = np.array(self.points, dtype=float, copy=True)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2:
            raise InvalidParameterError(f"points must be 2-D, got shape {points.shape}")
        if points.shape[0] < 2:
            raise InvalidParameterError(f"need at least 2 points, got {points.shape[0]}")
        if points.shape[1] < 1:
            raise InvalidParameterError("points must have at least one column")
        if not np.all(np.isfinite(points)):
            bad = np.argwhere(~np.isfinite(points))[0]
            raise InvalidParameterError(
                f"non-finite coordinate at row {bad[0]}, column {bad[1]}")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.ndim != 1 or labels.shape[0] != points.shape[0]:
                raise InvalidParameterError(
                    f"labels must have length {points.shape[0]}, got shape {labels.shape}")
            as_int = labels.astype(np.int64)
            if not np.array_equal(as_int, labels):
                raise InvalidParameterError("labels must be integers")
            as_int.setflags(write=False)
            object.__setattr__(self, "labels", as_int)

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.N


def make_rng(seed: SeedLike = 0) -> np.random.Generator:
    """Return a PCG64-backed generator; pass-through if given a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        seed = 0
    if int(seed) < 0 or int(seed) >= 2**64:
        raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(int(seed)))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def load_csv(path, has_header: bool = False, label_column: Optional[int] = None) -> Dataset:
    """Read a comma-separated numeric table.

    Parameters
    ----------
    path : path-like
        UTF-8 file, one point per row.
    has_header : bool
        Skip the first row.
    label_column : int, optional
        Index (negative allowed) of an integer class column to split off.

    Raises
    ------
    ParseError
        On empty files, ragged rows, or cells that are not finite reals.
        Row and column numbers in the message are 1-based file coordinates.
    """
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as fh:
            rows = [row for row in csv.reader(fh)]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc

    start = 1 if has_header else 0
    body = [(i + 1, r) for i, r in enumerate(rows[start:], start=start)
            if r and any(c.strip() for c in r)]
    if not body:
        raise ParseError(f"{path} contains no data rows")

    width = len(body[0][1])
    if label_column is not None:
        lc = label_column + width if label_column < 0 else label_column
        if not 0 <= lc < width:
            raise ParseError(f"label column {label_column} out of range for width {width}")
    else:
        lc = None

    values = np.empty((len(body), width if lc is None else width - 1))
    labels = np.empty(len(body), dtype=np.int64) if lc is not None else None
    for k, (lineno, row) in enumerate(body):
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", row=lineno)
        col_out = 0
        for j, cell in enumerate(row):
            text = cell.strip()
            if j == lc:
                try:
                    labels[k] = int(text)
                except ValueError:
                    try:
                        f = float(text)
                    except ValueError:
                        f = math.nan
                    if not math.isfinite(f) or f != int(f):
                        raise ParseError(f"label {text!r} is not an integer",
                                         row=lineno, column=j + 1) from None
                    labels[k] = int(f)
                continue
            try:
                x = float(text)
            except ValueError:
                raise ParseError(f"cell {text!r} is not a number",
                                 row=lineno, column=j + 1) from None
            if not math.isfinite(x):
                raise ParseError(f"cell {text!r} is not finite", row=lineno, column=j + 1)
            values[k, col_out] = x
            col_out += 1
    if values.shape[1] == 0:
        raise ParseError(f"{path} has no coordinate columns")
    return Dataset(values, labels)


def save_csv(data, path, labels=None, header: Optional[list] = None) -> None:
    """Write points (and a trailing label column) with round-trip precision.

    ``data`` may be a :class:`Dataset`, an :class:`~cpm.embed.Embedding`, or
    a 2-D array.  Labels default to ``data.labels`` when present.
    """
    if hasattr(data, "points"):
        matrix = data.points
    elif hasattr(data, "coords"):
        matrix = data.coords
    else:
        matrix = np.asarray(data, dtype=float)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
    if labels is None:
        labels = getattr(data, "labels", None)
    if labels is not None and len(labels) != matrix.shape[0]:
        raise InvalidParameterError("labels length does not match number of rows")

    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if header is not None:
                writer.writerow(header)
            for i, row in enumerate(matrix):
                cells = [format(float(x), ".17g") for x in row]
                if labels is not None:
                    cells.append(str(int(labels[i])))
                writer.writerow(cells)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def _uniform_directions(rng, count, n):
    g = rng.standard_normal((count, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero Gaussian vector has probability zero; guard anyway
    norms[norms == 0] = 1.0
    return g / norms


def generate_ball_shell(n: int = 5, N1: int = 500, N2: int = 500,
                        shell_inner: float = 1.0, shell_outer: float = 1.3,
                        rng: SeedLike = 0) -> Dataset:
    """Uniform ball (label 1) surrounded by a uniform spherical shell (label 2).

    Radii are drawn by inverting the volume CDF: ``U**(1/n)`` inside the
    unit ball and ``(a**n + U (b**n - a**n))**(1/n)`` in the shell ``[a, b]``.
    """
    if n < 2:
        raise InvalidParameterError(f"ambient dimension must be >= 2, got {n}")
    if N1 < 1 or N2 < 1:
        raise InvalidParameterError("class sizes must be >= 1")
    if shell_inner < 1.0:
        raise InvalidGeometryError(
            f"shell_inner={shell_inner} overlaps the unit ball; it must be >= 1")
    if not shell_outer > shell_inner:
        raise InvalidGeometryError("shell_outer must exceed shell_inner")
    rng = make_rng(rng)

    inner_r = rng.random(N1) ** (1.0 / n)
    ball = _uniform_directions(rng, N1, n) * inner_r[:, None]

    a_n, b_n = shell_inner ** n, shell_outer ** n
    shell_r = (a_n + rng.random(N2) * (b_n - a_n)) ** (1.0 / n)
    np.clip(shell_r, shell_inner, shell_outer, out=shell_r)
    shell = _uniform_directions(rng, N2, n) * shell_r[:, None]

    points = np.vstack([ball, shell])
    labels = np.concatenate([np.ones(N1, dtype=np.int64), np.full(N2, 2, dtype=np.int64)])
    return Dataset(points, labels)


def generate_augmented_swiss_roll(N: int = 1000, p: int = 6, noise_variance: float = 25.0,
                                  rng: SeedLike = 0) -> Dataset:
    """Spiral ``((t+1) cos t, (t+1) sin t)`` with ``t ~ U[0, 1]`` plus Gaussian columns.

    Columns 3..p are i.i.d. ``N(0, noise_variance)``.
    """
    if N < 2:
        raise InvalidParameterError(f"N must be >= 2, got {N}")
    if p < 3:
        raise InvalidParameterError(f"p must be >= 3, got {p}")
    if noise_variance < 0:
        raise InvalidParameterError("noise_variance must be non-negative")
    rng = make_rng(rng)
    t = rng.random(N)
    noise = rng.standard_normal((N, p - 2)) * math.sqrt(noise_variance)
    points = np.column_stack([(t + 1) * np.cos(t), (t + 1) * np.sin(t), noise])
    return Dataset(points)


def generate_gaussian_cloud(N: int = 1000, dim: int = 5, rng: SeedLike = 0) -> Dataset:
    """``N`` i.i.d. draws from ``N(0, I_dim)``."""
    if N < 2:
        raise InvalidParameterError(f"N must be >= 2, got {N}")
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")
    rng = make_rng(rng)
    return Dataset(rng.standard_normal((N, dim)))


def generate_gaussian_clusters(K: int = 5, per_cluster: int = 100, dim: int = 10,
                               center_scale: float = 10.0, spread: float = 1.0,
                               rng: SeedLike = 0) -> Dataset:
    """Isotropic Gaussian blobs around centers drawn from ``N(0, center_scale^2 I)``.

    Labels are ``0..K-1``.
    """
    if K < 1 or per_cluster < 1:
        raise InvalidParameterError("K and per_cluster must be >= 1")
    if K * per_cluster < 2:
        raise InvalidParameterError("need at least 2 points in total")
    rng = make_rng(rng)
    centers = rng.standard_normal((K, dim)) * center_scale
    points = np.repeat(centers, per_cluster, axis=0)
    points = points + rng.standard_normal(points.shape) * spread
    labels = np.repeat(np.arange(K, dtype=np.int64), per_cluster)
    return Dataset(points, labels)
