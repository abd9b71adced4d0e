"""Which cluster neighbourhoods survive the projection of well separated blobs."""

from cpm import (RunConfig, generate_gaussian_clusters, proximity_error_curve, run_cpm,
                 run_mds)

GRID = [0.1, 0.2, 0.3, 0.4, 0.5]

if __name__ == "__main__":
    data = generate_gaussian_clusters(5, 100, 10, 10.0, rng=0)
    cpm = run_cpm(data, RunConfig())
    mds, _ = run_mds(data)
    for name, emb in (("cpm", cpm.embedding), ("mds", mds)):
        curve = proximity_error_curve(data.points, emb, data.labels, GRID)
        print(name, " ".join(f"p={p:g}:{e:.2f}" for p, e in curve))
