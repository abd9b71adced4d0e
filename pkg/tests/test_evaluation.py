import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import pdist, squareform

from cpm.dataset import Dataset
from cpm.evaluation import (NoNeighboursWarning, ShepardData, cluster_variances,
                            crowding_overlap_score, inter_cluster_distances, proximity_error_curve,
                            proximity_matrix, shepard_pairs, spearman_rank_correlation,
                            write_proximity_csv, write_shepard_csv, write_trajectory_csv,
                            write_variance_csv)
from cpm.exceptions import ContractError, UndefinedCorrelationError
from cpm.metricspace import euclidean_distance_matrix


def brute_ranks(x):
    # average rank, 1-based
    x = list(x)
    out = []
    for v in x:
        less = sum(1 for u in x if u < v)
        equal = sum(1 for u in x if u == v)
        out.append(less + (equal + 1) / 2)
    return out


def pearson(a, b):
    ma, mb = sum(a) / len(a), sum(b) / len(b)
    num = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    den = math.sqrt(sum((x - ma) ** 2 for x in a) * sum((y - mb) ** 2 for y in b))
    return num / den


def test_shepard_counts_and_identity():
    X = np.random.default_rng(0).standard_normal((3, 2))
    s = shepard_pairs(euclidean_distance_matrix(Dataset(X)), X)
    assert len(s) == 3
    np.testing.assert_allclose(s.original, s.embedded, rtol=1e-15)
    with pytest.raises(ContractError):
        shepard_pairs(euclidean_distance_matrix(Dataset(X)), X[:2])


def test_spearman_extremes():
    x = np.arange(10.0)
    assert spearman_rank_correlation(ShepardData(np.column_stack([x, x**2]))) == 1.0
    assert spearman_rank_correlation(ShepardData(np.column_stack([x, -x]))) == -1.0
    with pytest.raises(UndefinedCorrelationError):
        spearman_rank_correlation(ShepardData(np.column_stack([x, np.ones(10)])))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_spearman_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 5, 10).astype(float)  # ties on purpose
    b = rng.standard_normal(10)
    if np.all(a == a[0]):
        return
    got = spearman_rank_correlation(ShepardData(np.column_stack([a, b])))
    assert abs(got - pearson(brute_ranks(a), brute_ranks(b))) < 1e-12


def test_variances():
    X = np.array([[0.0, 0.0], [2.0, 0.0], [5.0, 5.0]])
    labs, V = cluster_variances(X, np.array([1, 1, 2]))
    np.testing.assert_array_equal(labs, [1, 2])
    np.testing.assert_allclose(V, [1.0, 0.0])
    _, Vn = cluster_variances(X, np.array([1, 1, 2]), normalize=True)
    np.testing.assert_allclose(Vn, [1.0, 0.0])


def test_variances_translation_and_scale():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((40, 3))
    lab = rng.integers(0, 4, 40)
    _, V = cluster_variances(X, lab)
    _, V2 = cluster_variances(3.0 * X + 7.0, lab)
    np.testing.assert_allclose(V2, 9.0 * V, rtol=1e-12)


def brute_proximity(M, p):
    K = len(M)
    cnt = math.floor(p * (K - 1) + 1e-9)
    C = np.zeros((K, K), dtype=int)
    for i in range(K):
        others = sorted((M[i][j], j) for j in range(K) if j != i)
        for _, j in others[:cnt]:
            C[i, j] = 1
    return C


def test_proximity_count_rule():
    M = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0.0]])
    C = proximity_matrix(M, 0.5).entries
    np.testing.assert_array_equal(C.sum(axis=1), [1, 1, 1])
    assert np.all(np.diag(C) == 0)


def test_proximity_zero_neighbours_warns():
    M = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0.0]])
    with pytest.warns(NoNeighboursWarning):
        C = proximity_matrix(M, 0.1).entries
    assert C.sum() == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.1, 0.25, 0.3, 0.5]))
def test_proximity_brute_force(seed, p):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((5, 2))
    M = squareform(pdist(X))
    M = np.round(M, 1)  # induce ties
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoNeighboursWarning)
        C = proximity_matrix(M, p).entries
    np.testing.assert_array_equal(C, brute_proximity(M, p))


def test_inter_cluster_distances_brute():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((12, 3))
    lab = np.repeat([0, 1, 2], 4)
    _, M = inter_cluster_distances(X, lab)
    for a, b in itertools.combinations(range(3), 2):
        ds = [np.linalg.norm(X[i] - X[j]) for i in range(12) for j in range(12)
              if lab[i] == a and lab[j] == b]
        assert M[a, b] == pytest.approx(sum(ds) / len(ds), rel=1e-12)
    _, M2 = inter_cluster_distances(euclidean_distance_matrix(Dataset(X)), lab)
    np.testing.assert_allclose(M, M2, rtol=1e-12)


def _clusters(seed, K=5, per=6):
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((K, 3)) * 10
    X = np.repeat(centers, per, axis=0) + rng.standard_normal((K * per, 3))
    return X, np.repeat(np.arange(K), per)


def test_error_curve_identity_is_zero():
    X, lab = _clusters(3)
    curve = proximity_error_curve(X, X, lab, [0.1, 0.25, 0.5])
    assert [e for _, e in curve] == [0.0, 0.0, 0.0]


def test_error_curve_brute_force():
    X, lab = _clusters(4)
    Y = np.random.default_rng(9).standard_normal((len(X), 2))
    _, Mo = inter_cluster_distances(X, lab)
    _, Me = inter_cluster_distances(Y, lab)
    for p, e in proximity_error_curve(X, Y, lab, [0.25, 0.5]):
        Co, Ce = brute_proximity(Mo, p), brute_proximity(Me, p)
        lost = np.sum((Co == 1) & (Ce == 0))
        assert e == pytest.approx(lost / Co.sum())


def test_error_curve_complement_is_one():
    # K=3, p=0.5: in X the neighbours are 0->1, 1->0, 2->1; in Y they are 0->2, 1->2, 2->0
    X = np.array([[0.0], [1.0], [10.0]])
    Y = np.array([[0.0], [10.0], [1.0]])
    assert proximity_error_curve(X, Y, np.array([0, 1, 2]), [0.5])[0][1] == 1.0


def test_error_curve_needs_two_clusters():
    with pytest.raises(ContractError):
        proximity_error_curve(np.zeros((3, 2)), np.zeros((3, 2)), np.ones(3), [0.5])


def test_crowding_concentric_circles():
    th = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    inner = np.column_stack([np.cos(th), np.sin(th)]) * np.linspace(0.1, 1, 50)[:, None]
    outer = 2 * np.column_stack([np.cos(th), np.sin(th)])
    Y = np.vstack([inner, outer])
    lab = np.repeat([1, 2], 50)
    assert crowding_overlap_score(Y, lab) == 1.0


def test_crowding_mixed_is_half():
    rng = np.random.default_rng(0)
    Y = rng.standard_normal((20_000, 2))
    lab = np.where(rng.random(20_000) < 0.5, 1, 2)
    assert abs(crowding_overlap_score(Y, lab) - 0.5) < 0.02


def test_crowding_missing_class():
    with pytest.raises(ContractError):
        crowding_overlap_score(np.zeros((4, 2)), np.ones(4))


def test_csv_writers(tmp_path):
    X = np.random.default_rng(0).standard_normal((5, 2))
    s = shepard_pairs(euclidean_distance_matrix(Dataset(X)), X)
    write_shepard_csv(s, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "orig,emb" and len(lines) == 11
    write_proximity_csv([(0.1, 0.0), (0.5, 0.25)], tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text() == "p,error\n0.10000000000000001,0\n0.5,0.25\n"
    write_variance_csv(np.array([1, 2]), np.array([2.0, 4.0]), tmp_path / "v.csv")
    assert (tmp_path / "v.csv").read_text() == "label,variance,normalized\n1,2,0.5\n2,4,1\n"
    write_trajectory_csv(X, np.array([1, 0, 1, 0, 1]), tmp_path / "t.csv")
    rows = (tmp_path / "t.csv").read_text().splitlines()
    assert rows[0] == "label,order,row,y1,y2"
    assert [r.split(",")[:3] for r in rows[1:3]] == [["0", "0", "1"], ["0", "1", "3"]]
