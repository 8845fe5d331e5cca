import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slharmonic.errors import DomainError, InvalidInputError
from slharmonic.iwasawa import (
    ChartPoint,
    chart_arrays_to_group,
    decompose_KAN,
    from_chart,
    random_sl,
    to_chart,
)

from conftest import dims, seeds


def test_identity_decomposes_trivially():
    f = decompose_KAN(np.eye(3))
    for M in (f.K, f.A, f.N):
        assert np.array_equal(M, np.eye(3))
    p = to_chart(f)
    assert np.array_equal(p.a, [1, 1]) and np.array_equal(p.y, [0, 0, 0])


def test_upper_triangular_has_trivial_K():
    g = np.array([[2.0, 3.0], [0.0, 0.5]])
    f = decompose_KAN(g)
    np.testing.assert_allclose(f.K, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(f.A, np.diag([2.0, 0.5]), atol=1e-15)
    np.testing.assert_allclose(f.N, [[1.0, 1.5], [0.0, 1.0]], atol=1e-15)


def test_rotation_has_trivial_AN():
    th = 0.7
    g = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    f = decompose_KAN(g)
    np.testing.assert_allclose(f.K, g, atol=1e-15)
    np.testing.assert_allclose(f.A @ f.N, np.eye(2), atol=1e-15)


def test_decompose_rejects_det():
    with pytest.raises(DomainError):
        decompose_KAN(2 * np.eye(2))
    with pytest.raises(DomainError):
        decompose_KAN(np.diag([-1.0, 1.0]))


@settings(max_examples=100, deadline=None)
@given(n=dims, seed=seeds)
def test_factor_invariants(n, seed):
    g = random_sl(n, np.random.default_rng(seed))
    f = decompose_KAN(g)
    assert np.linalg.norm(f.product() - g, np.inf) <= 1e-10 * np.linalg.norm(g, np.inf) * max(1, np.linalg.cond(g) / 1e3)
    np.testing.assert_allclose(f.K.T @ f.K, np.eye(n), atol=1e-12)
    assert np.linalg.det(f.K) > 0
    assert np.all(np.diag(f.A) > 0)
    assert abs(np.prod(np.diag(f.A)) - 1) <= 1e-10
    assert np.array_equal(f.A, np.diag(np.diag(f.A)))
    assert np.array_equal(np.tril(f.N, -1), np.zeros((n, n)))
    assert np.array_equal(np.diag(f.N), np.ones(n))


@settings(max_examples=100, deadline=None)
@given(n=dims, seed=seeds)
def test_chart_round_trip(n, seed):
    g = random_sl(n, np.random.default_rng(seed))
    f = decompose_KAN(g)
    A, N = from_chart(to_chart(f))
    np.testing.assert_allclose(A, f.A, rtol=1e-12)
    np.testing.assert_array_equal(N, f.N)


def test_chart_point_validation():
    with pytest.raises(InvalidInputError):
        ChartPoint([1.0], [0.0, 0.0])
    with pytest.raises(DomainError):
        ChartPoint([0.0], [1.0])
    with pytest.raises(InvalidInputError):
        ChartPoint([np.inf], [1.0])
    with pytest.raises(InvalidInputError):
        ChartPoint.from_dict({"n": 3, "a": [1.0], "y": [0.0]})
    with pytest.raises(InvalidInputError):
        ChartPoint.from_dict({"a": [1.0]})


def test_chart_point_json_round_trip():
    import json

    p = ChartPoint([2.0, 0.25], [1.0, -2.0, 3.5])
    q = ChartPoint.from_dict(json.loads(p.to_json()))
    assert q.n == 3 and np.array_equal(q.a, p.a) and np.array_equal(q.y, p.y)


@settings(max_examples=40, deadline=None)
@given(n=dims, seed=seeds, batch=st.integers(1, 4))
def test_vectorized_group_matches_scalar(n, seed, batch):
    r = np.random.default_rng(seed)
    a = np.exp(r.standard_normal((batch, n - 1)))
    y = r.standard_normal((batch, n * (n - 1) // 2))
    G = chart_arrays_to_group(a, y)
    for k in range(batch):
        A, N = from_chart(ChartPoint(a[k], y[k]))
        np.testing.assert_allclose(G[k], A @ N, rtol=1e-15)
        assert abs(np.linalg.det(G[k]) - 1) < 1e-10
