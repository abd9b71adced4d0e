import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cpm.cad import adjusted_distance_matrix, build_transform, cad, monotone_envelope
from cpm.dataset import Dataset
from cpm.dimest import DimensionCurve
from cpm.exceptions import ContractError, InvalidParameterError
from cpm.metricspace import DistanceMatrix, MetricKind, euclidean_distance_matrix


def test_cad_identity_when_n_equals_d():
    curve = DimensionCurve.constant(2)
    s = np.array([0.0, 0.3, 1.0, 4.5])
    np.testing.assert_allclose(cad(s, curve, 2), s, rtol=1e-15)


def test_cad_examples():
    assert cad(1.0, DimensionCurve.constant(7.3), 3) == 1.0
    assert cad(4.0, DimensionCurve.constant(4), 2) == pytest.approx(16.0, rel=1e-14)
    assert cad(0.0, DimensionCurve.constant(4), 2) == 0.0


def test_cad_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        cad(1.0, DimensionCurve.constant(2), 4)
    with pytest.raises(InvalidParameterError):
        cad(-1.0, DimensionCurve.constant(2), 2)


def test_envelope_examples():
    np.testing.assert_array_equal(monotone_envelope([1, 2, 3], [1.0, 0.8, 1.2]), [1.0, 1.0, 1.2])
    np.testing.assert_array_equal(monotone_envelope([1, 2, 3], [0.5, 0.5, 0.5]), [0.5] * 3)
    np.testing.assert_array_equal(monotone_envelope([1, 2, 3], [0.1, 0.5, 0.9]), [0.1, 0.5, 0.9])
    with pytest.raises(ContractError):
        monotone_envelope([1, 1, 2], [0, 0, 0])


def _loop_envelope(values):
    out, best = [], -np.inf
    for v in values:
        best = max(best, v)
        out.append(best)
    return np.array(out)


@settings(max_examples=1000, deadline=None)
@given(arrays(np.float64, st.integers(1, 40), elements=st.floats(0, 1e6), unique=True),
       st.integers(0, 2**32 - 1))
def test_envelope_properties(sigmas, seed):
    sig = np.sort(sigmas)
    vals = np.random.default_rng(seed).uniform(0, 10, sig.size)
    env = monotone_envelope(sig, vals)
    assert np.all(np.diff(env) >= 0)
    assert np.all(env >= vals)
    np.testing.assert_array_equal(monotone_envelope(sig, env), env)
    np.testing.assert_array_equal(env, _loop_envelope(vals))


def _sample(seed=0, N=40):
    X = np.random.default_rng(seed).standard_normal((N, 4))
    return euclidean_distance_matrix(Dataset(X))


def test_adjusted_identity_on_normalized_input():
    D = _sample()
    A = adjusted_distance_matrix(D, DimensionCurve.constant(2, scale=2.5), 2)
    np.testing.assert_allclose(A.values, D.values / 2.5, rtol=1e-14)
    assert A.kind == MetricKind.ADJUSTED and A.scale == 2.5


def test_adjusted_rank_preserving():
    D = _sample(1)
    curve = DimensionCurve(np.array([0.5, 1.0, 1.5, 2.0]), np.array([6.0, 1.0, 5.0, 0.5]), 1.0, 3.0)
    A = adjusted_distance_matrix(D, curve, 2)
    a, b = D.condensed(), A.condensed()
    order = np.argsort(a, kind="stable")
    assert np.all(np.diff(b[order]) >= 0)
    # domination over the raw map
    assert np.all(b >= cad(a, curve, 2) * (1 - 1e-15))


def test_adjusted_equal_in_equal_out():
    D = DistanceMatrix(np.array([[0, 1, 1, 2], [1, 0, 2, 1], [1, 2, 0, 1], [2, 1, 1, 0.0]]))
    A = adjusted_distance_matrix(D, DimensionCurve.constant(5), 2)
    assert len(np.unique(A.condensed())) == 2


def test_adjusted_refuses_adjusted_input():
    D = _sample()
    A = adjusted_distance_matrix(D, DimensionCurve.constant(3), 2)
    with pytest.raises(ContractError):
        adjusted_distance_matrix(A, DimensionCurve.constant(3), 2)


def test_transform_lookup():
    D = _sample(2, N=10)
    curve = DimensionCurve.constant(4)
    T = build_transform(D.condensed(), curve, 2)
    np.testing.assert_allclose(T(D.condensed()), D.condensed() ** 2, rtol=1e-14)
    with pytest.raises(ContractError):
        T(np.array([123.456]))
