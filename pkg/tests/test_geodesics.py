import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slharmonic.connections import ConnectionFn
from slharmonic.densecore import mat_exp
from slharmonic.errors import DomainError, InvalidInputError
from slharmonic.geodesics import (
    GeodesicProblem,
    catalan_f,
    closed_form_nplus_oracle,
    closed_form_nplus_paper,
    closed_form_symmetric,
    compare_trajectories,
    integrate_geodesic,
    literal_diagonal_drift,
    nplus_evaluator,
    oracle_admission_residual,
    symmetric_evaluator,
)
from slharmonic.iwasawa import ChartPoint, decompose_KAN, to_chart
from slharmonic.lie_algebra import assemble, m_dim

from conftest import seeds

ALPHA = ConnectionFn("alpha")


def solve(c, v0, conv="chart", sign="lemma", T=1.0, steps=1000, p0=None):
    n = v0.shape[0]
    p0 = p0 or ChartPoint.identity(n)
    return integrate_geodesic(GeodesicProblem(c, p0, v0, T, steps, conv, sign))


def test_problem_validation():
    v0 = np.array([[0.1, 1.0], [0.0, -0.1]])
    p0 = ChartPoint.identity(2)
    with pytest.raises(DomainError):
        GeodesicProblem(ConnectionFn("alpha", "cartan"), p0, v0)
    with pytest.raises(DomainError):
        GeodesicProblem(ALPHA, p0, v0.T)
    with pytest.raises(InvalidInputError):
        GeodesicProblem(ALPHA, ChartPoint.identity(3), v0)
    with pytest.raises(InvalidInputError):
        GeodesicProblem(ALPHA, p0, v0, T=-1.0)
    with pytest.raises(InvalidInputError):
        GeodesicProblem(ALPHA, p0, v0, steps=0)
    with pytest.raises(InvalidInputError):
        GeodesicProblem(ALPHA, p0, v0, convention="polar")


def test_sl2_alpha_geodesic_is_affine():
    v0 = np.array([[0.4, -0.7], [0.0, -0.4]])
    for sign in ("lemma", "example"):
        tr = solve(ALPHA, v0, sign=sign)
        assert not tr.blow_up and tr.times[-1] == pytest.approx(1.0)
        np.testing.assert_allclose(tr.a[:, 0], 0.4 * tr.times + 1, atol=1e-12)
        np.testing.assert_allclose(tr.y[:, 0], -0.7 * tr.times, atol=1e-12)


def test_log_convention_alpha_sl2_is_one_parameter_subgroup():
    # beta(v, v) = 0 on sl(2)'s a + n+, so v stays constant and g = exp(t v0)
    v0 = np.array([[0.4, -0.7], [0.0, -0.4]])
    tr = solve(ALPHA, v0, "logarithmic")
    g1 = mat_exp(v0)
    want = to_chart(decompose_KAN(g1))
    np.testing.assert_allclose(tr.a[-1], want.a, rtol=1e-10)
    np.testing.assert_allclose(tr.y[-1], want.y, rtol=1e-10)
    np.testing.assert_allclose(tr.velocities, np.broadcast_to(v0, tr.velocities.shape), atol=1e-14)


def test_log_convention_nilpotent_is_linear():
    v0 = np.triu(np.ones((3, 3)), 1)
    tr = solve(ConnectionFn("canonical2"), v0, "logarithmic")
    # exp(t v0) with v0^2 = E13: y13(t) = t + t^2/2
    np.testing.assert_allclose(tr.y[-1], [1.0, 1.5, 1.0], atol=1e-12)


def test_symmetric_closed_form_chart_mode():
    v0 = np.diag([0.3, -0.1, -0.2])
    v0[0, 1], v0[0, 2], v0[1, 2] = 0.7, -0.4, 0.25
    tr = solve(ConnectionFn("canonical1"), v0)
    assert compare_trajectories(tr, symmetric_evaluator(v0)).max_deviation <= 1e-8


def test_closed_form_symmetric_examples():
    v0 = np.array([[0.5, 2.0], [0.0, -0.5]])
    p = closed_form_symmetric(v0, 2.0)
    assert np.array_equal(p.a, [2.0]) and np.array_equal(p.y, [4.0])
    with pytest.raises(DomainError):
        closed_form_symmetric(v0, -3.0)
    # the all-entries affine diagonal diag(1.5, 0.5) has det 0.75
    assert literal_diagonal_drift(v0, 1.0) == pytest.approx(0.25)


def test_blow_up_truncates():
    v0 = np.diag([2.0, -1.0, -1.0])
    tr = solve(ALPHA, v0, T=3.0, steps=3000)
    assert tr.blow_up
    assert 0.5 < tr.times[-1] < 3.0
    assert np.all(tr.a > 0)


def test_rk4_fourth_order():
    r = np.random.default_rng(5)
    n = 6
    v0 = assemble(0.3 * r.standard_normal(m_dim(n)), n, "iwasawa")
    ref = solve(ALPHA, v0, steps=1600)
    errs = []
    for steps in (50, 100):
        tr = solve(ALPHA, v0, steps=steps)
        errs.append(np.max(np.abs(np.concatenate([tr.a[-1] - ref.a[-1], tr.y[-1] - ref.y[-1]]))))
    assert 12 <= errs[0] / errs[1] <= 20


def test_trajectory_csv():
    v0 = np.array([[0.4, -0.7], [0.0, -0.4]])
    tr = solve(ALPHA, v0, steps=4)
    rows = list(csv.reader(io.StringIO(tr.to_csv())))
    assert rows[0] == ["t", "a1", "y12", "v_a1", "v_y12"]
    assert len(rows) == 6
    assert float(rows[-1][0]) == pytest.approx(1.0)
    assert [float(v) for v in rows[1][1:]] == [1.0, 0.0, 0.4, -0.7]
    d = tr.to_dict()
    assert d["meta"]["connection"] == "alpha" and len(d["t"]) == 5


@pytest.mark.parametrize("j,want", list(enumerate([1, 1, 2, 5, 14, 42, 132, 429], start=1)))
def test_catalan_values(j, want):
    assert catalan_f(j) == want


def test_catalan_overflow_and_domain():
    assert catalan_f(36) < 2**63
    with pytest.raises(OverflowError):
        catalan_f(37)
    with pytest.raises(DomainError):
        catalan_f(0)


def test_nplus_oracle_3x3_example():
    v0 = np.triu(np.ones((3, 3)), 1)
    B = closed_form_nplus_oracle(v0, 1.0)
    # log(I + N) = N - N^2/2 with N^2 = E13
    np.testing.assert_allclose(B, [[0, 1, 0.5], [0, 0, 1], [0, 0, 0]], atol=1e-15)
    Bex = closed_form_nplus_oracle(v0, 1.0, "example")
    np.testing.assert_allclose(Bex, [[0, 1, 1.5], [0, 0, 1], [0, 0, 0]], atol=1e-15)


def test_nplus_paper_readings_4x4():
    b12, b23, b34 = 2.0, 3.0, 5.0
    v0 = np.zeros((4, 4))
    v0[0, 1], v0[1, 2], v0[2, 3] = b12, b23, b34
    t = 2.0
    P = closed_form_nplus_paper(v0, t)
    assert P[0, 1] == b12 * t
    assert P[0, 2] == b12 * b23 * t**2
    assert P[0, 3] == 2 * b12 * b23 * b34 * t**2
    R = closed_form_nplus_paper(v0, t, reading="remark")
    assert R[0, 2] == b12 * b23 * t
    assert R[0, 3] == b12 * b23 * b34 * t**2
    with pytest.raises(InvalidInputError):
        closed_form_nplus_paper(v0, t, reading="other")


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 6), seed=seeds, sign=st.sampled_from(["lemma", "example"]))
def test_oracle_satisfies_ode(n, seed, sign):
    v0 = np.triu(np.random.default_rng(seed).uniform(-1, 1, (n, n)), 1)
    assert oracle_admission_residual(v0, sign) <= 1e-6


@settings(max_examples=15, deadline=None)
@given(n=st.integers(2, 5), seed=seeds, sign=st.sampled_from(["lemma", "example"]))
def test_integrator_matches_oracle(n, seed, sign):
    v0 = np.triu(np.random.default_rng(seed).uniform(-1, 1, (n, n)), 1)
    tr = solve(ALPHA, v0, sign=sign, steps=400)
    rep = compare_trajectories(tr, nplus_evaluator(closed_form_nplus_oracle, v0, sign=sign))
    assert rep.max_deviation <= 1e-8


@settings(max_examples=20, deadline=None)
@given(seed=seeds, sign=st.sampled_from(["lemma", "example"]), kind=st.sampled_from(["canonical1", "canonical2"]))
def test_beta_null_geodesics_affine(seed, sign, kind):
    # canonical1 is antisymmetric, so beta(v, v) = 0 and chart velocities are constant
    r = np.random.default_rng(seed)
    n = 3
    v0 = assemble(0.3 * r.standard_normal(m_dim(n)), n, "iwasawa")
    p0 = ChartPoint(1 + r.random(2), r.standard_normal(3))
    tr = solve(ConnectionFn(kind), v0, sign=sign, steps=100, p0=p0)
    vc = tr.velocity_coefficients()
    np.testing.assert_allclose(vc, np.broadcast_to(vc[0], vc.shape), atol=1e-13)
    np.testing.assert_allclose(tr.a, p0.a + np.outer(tr.times, vc[0, :2]), atol=1e-12)


def test_comparison_report():
    v0 = np.triu(np.array([[0, 1.0, 0.5], [0, 0, -1.0], [0, 0, 0]]), 1)
    tr = solve(ALPHA, v0, steps=200)
    rep = compare_trajectories(tr, nplus_evaluator(closed_form_nplus_paper, v0), stride=10, horizon=1.0)
    assert rep.samples == 21
    assert rep.deviation("y12") <= 1e-8 and rep.deviation("y23") <= 1e-8
    assert rep.deviation("y13") > 0.1
    assert rep.verdict == "discrepant"
    d = rep.to_dict()
    assert d["entries"]["y13"]["agree"] is False and d["entries"]["y12"]["agree"] is True
    with pytest.raises(DomainError):
        compare_trajectories(tr, symmetric_evaluator(v0), horizon=2.0)
