"""Rank agreement between original and embedded distances on a 5-D Gaussian cloud."""

from cpm import (RunConfig, euclidean_distance_matrix, generate_gaussian_cloud, run_cpm, run_mds,
                 shepard_pairs, spearman_rank_correlation)

if __name__ == "__main__":
    data = generate_gaussian_cloud(1000, 5, rng=0)
    D = euclidean_distance_matrix(data)
    cpm = run_cpm(data, RunConfig(), D)
    mds, _ = run_mds(data, distances=D)
    for name, emb in (("cpm", cpm.embedding), ("mds", mds)):
        print(f"{name} spearman={spearman_rank_correlation(shepard_pairs(D, emb)):.3f}")
