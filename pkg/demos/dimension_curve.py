"""Estimate the intrinsic dimension curve of a few known shapes.

Uniform balls of dimension 2, 3 and 5 should report roughly their dimension
at small scales; a line segment sitting in 3-D should report about 1.
"""

import numpy as np

from cpm import Dataset, dimension_curve, euclidean_distance_matrix, generate_ball_shell


def show(name, X, ambient):
    curve = dimension_curve(euclidean_distance_matrix(Dataset(X)), ambient_dim=ambient)
    picks = np.linspace(0, len(curve.radii) - 1, 6).astype(int)
    r = curve.radii * curve.scale  # back to data units
    cells = "  ".join(f"r={r[i]:6.3f} n={curve.n_of_r[i]:4.2f}" for i in picks)
    print(f"{name:<10} n0={curve.n0:4.2f}  {cells}")


if __name__ == "__main__":
    for n in (2, 3, 5):
        ds = generate_ball_shell(n, 3000, 1, rng=0)
        show(f"ball B^{n}", ds.points[ds.labels == 1], n)
    t = np.random.default_rng(0).uniform(0, 1, 2000)
    show("line", np.outer(t, [0.3, -1.0, 2.0]), 3)
