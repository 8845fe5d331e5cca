import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from slharmonic.densecore import log_unipotent, mat_exp, orthonormalize_columns
from slharmonic.errors import DomainError, InvalidInputError, SingularityError

from conftest import E, dims, seeds


def test_exp_zero_is_identity():
    assert np.array_equal(mat_exp(np.zeros((3, 3))), np.eye(3))


def test_exp_diagonal():
    np.testing.assert_allclose(mat_exp(np.diag([1.0, -1.0])), np.diag([np.e, 1 / np.e]), rtol=1e-15)


def test_exp_nilpotent_truncates():
    assert np.array_equal(mat_exp(E(2, 1, 2)), np.eye(2) + E(2, 1, 2))


def test_exp_strictly_lower_uses_finite_series():
    L = np.array([[0, 0, 0], [2.0, 0, 0], [1.0, 3.0, 0]])
    np.testing.assert_allclose(mat_exp(L), scipy.linalg.expm(L), rtol=1e-15, atol=1e-15)


def test_exp_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        mat_exp(np.array([[np.nan, 0], [0, 1.0]]))


@settings(max_examples=60, deadline=None)
@given(n=dims, seed=seeds, norm=st.floats(0.01, 10.0))
def test_exp_matches_scipy(n, seed, norm):
    X = np.random.default_rng(seed).standard_normal((n, n))
    X *= norm / np.linalg.norm(X)
    ref = scipy.linalg.expm(X)
    err = np.linalg.norm(mat_exp(X) - ref) / np.linalg.norm(ref)
    assert err <= 1e-12


@settings(max_examples=60, deadline=None)
@given(n=dims, seed=seeds)
def test_exp_inverse_pair(n, seed):
    X = np.random.default_rng(seed).standard_normal((n, n))
    X *= 5.0 / np.linalg.norm(X)
    np.testing.assert_allclose(mat_exp(X) @ mat_exp(-X), np.eye(n), atol=1e-10)


def test_log_unipotent_examples():
    assert np.array_equal(log_unipotent(np.eye(3)), np.zeros((3, 3)))
    assert np.array_equal(log_unipotent(np.eye(2) + E(2, 1, 2)), E(2, 1, 2))
    U = np.eye(3) + E(3, 1, 2) + E(3, 2, 3) + E(3, 1, 3)
    # (U-I) - (U-I)^2/2 with (U-I)^2 = E13
    expected = E(3, 1, 2) + E(3, 2, 3) + 0.5 * E(3, 1, 3)
    np.testing.assert_allclose(log_unipotent(U), expected, atol=1e-15)
    np.testing.assert_allclose(scipy.linalg.logm(U).real, expected, atol=1e-12)


def test_log_unipotent_rejects_non_unipotent():
    with pytest.raises(DomainError):
        log_unipotent(np.array([[2.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(DomainError):
        log_unipotent(np.eye(2) + E(2, 2, 1))


@settings(max_examples=80, deadline=None)
@given(n=dims, seed=seeds)
def test_log_inverts_exp_on_nilpotent(n, seed):
    N = np.triu(np.random.default_rng(seed).standard_normal((n, n)), 1)
    np.testing.assert_allclose(log_unipotent(mat_exp(N)), N, atol=1e-13 * max(1, np.abs(N).max() ** (n - 1)))


def test_orthonormalize_identity_and_triangular():
    Q, R = orthonormalize_columns(np.eye(3))
    assert np.array_equal(Q, np.eye(3)) and np.array_equal(R, np.eye(3))
    T = np.array([[2.0, 1.0, -1.0], [0, 0.5, 3.0], [0, 0, 1.5]])
    Q, R = orthonormalize_columns(T)
    np.testing.assert_allclose(Q, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(R, T, atol=1e-15)


def test_orthonormalize_hand_example():
    g = np.array([[1.0, 0.0], [1.0, 1.0]])
    Q, R = orthonormalize_columns(g)
    s = np.sqrt(2.0)
    np.testing.assert_allclose(Q, [[1 / s, -1 / s], [1 / s, 1 / s]], atol=1e-15)
    np.testing.assert_allclose(R, [[s, 1 / s], [0, 1 / s]], atol=1e-15)


def test_orthonormalize_rejects_singular():
    with pytest.raises(SingularityError):
        orthonormalize_columns(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_orthonormalize_round_trip_1000(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        g = rng.standard_normal((n, n)) + 2 * np.eye(n)
        if np.linalg.cond(g) > 1e4:
            continue
        Q, R = orthonormalize_columns(g)
        assert np.linalg.norm(Q @ R - g, np.inf) <= 1e-12 * np.linalg.norm(g, np.inf)
        assert np.max(np.abs(Q.T @ Q - np.eye(n))) <= 1e-12
        assert np.all(np.diag(R) > 0) and np.array_equal(np.tril(R, -1), np.zeros((n, n)))
