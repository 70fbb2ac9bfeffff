import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctdsat import _backend
from ctdsat.dynamics import (CTDSField, Constant, Delayed, Exponential, Saturating, State,
                             build_mode, clause_value, grad_term, mode_name, potential,
                             rhs_a, rhs_s)
from ctdsat.formula import Formula, random_ksat

import oracles


def mixed_formula(draw_rng, n):
    m = int(draw_rng.integers(1, 3 * n + 1))
    clauses = []
    for _ in range(m):
        k = int(draw_rng.integers(2, min(4, n) + 1))
        vs = draw_rng.choice(n, size=k, replace=False)
        ps = draw_rng.choice([-1, 1], size=k)
        clauses.append(tuple(zip(vs.tolist(), ps.tolist())))
    return Formula(n, tuple(clauses))


def random_state(rng, f, a_scale=5.0):
    s = rng.uniform(-1, 1, f.num_vars)
    a = rng.uniform(0.1, a_scale, f.num_clauses)
    return State(s, a)


def test_clause_value_extremes():
    f = Formula(3, (((0, 1), (1, -1), (2, 1)),))
    assert clause_value(f, np.array([-1.0, 1.0, -1.0]), 0) == 1.0
    assert clause_value(f, np.array([1.0, 0.3, -0.2]), 0) == 0.0
    assert clause_value(f, np.zeros(3), 0) == 0.125
    with pytest.raises(IndexError):
        clause_value(f, np.zeros(3), 1)


def test_potential_matches_oracle():
    rng = np.random.default_rng(1)
    f = random_ksat(8, 4.0, 3, 1)
    st_ = random_state(rng, f)
    assert potential(f, st_) == pytest.approx(oracles.V(f.clauses, st_.s, st_.a), rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 20), seed=st.integers(0, 2**32))
def test_rhs_s_is_negative_gradient(n, seed):
    rng = np.random.default_rng(seed)
    f = mixed_formula(rng, n)
    state = random_state(rng, f)
    exact = oracles.neg_grad_exact(f.clauses, state.s, state.a)
    for name in _backend.BACKENDS:
        got = rhs_s(f, state, backend=name)
        np.testing.assert_allclose(got, exact, rtol=1e-12, atol=1e-14)
    fd = oracles.neg_grad_fd(f.clauses, state.s, state.a)
    scale = max(np.max(np.abs(exact)), 1e-300)
    assert np.max(np.abs(rhs_s(f, state) - fd)) / scale < 1e-6


def test_grad_term_sums_to_rhs_s():
    rng = np.random.default_rng(3)
    f = mixed_formula(rng, 9)
    state = random_state(rng, f)
    total = np.array([sum(a * grad_term(f, state.s, m, i) for m, a in enumerate(state.a))
                      for i in range(f.num_vars)])
    np.testing.assert_allclose(total, rhs_s(f, state), rtol=1e-12, atol=1e-15)


def test_grad_term_on_absent_variable_is_zero():
    f = Formula(3, (((0, 1), (1, 1)),))
    assert grad_term(f, np.zeros(3), 0, 2) == 0.0
    with pytest.raises(IndexError):
        grad_term(f, np.zeros(3), 0, 3)


def test_grad_term_no_singularity_at_corner():
    # one factor is exactly zero; a division-based formula would blow up
    f = Formula(3, (((0, 1), (1, 1), (2, 1)),))
    s = np.array([1.0, -1.0, -1.0])
    assert grad_term(f, s, 0, 0) == 0.0
    assert grad_term(f, s, 0, 1) == 0.0


def test_boundary_field_points_inward():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 10_000:
        f = random_ksat(12, 4.25, 3, int(rng.integers(2**31)))
        for _ in range(100):
            state = random_state(rng, f)
            i = int(rng.integers(f.num_vars))
            side = float(rng.choice([-1.0, 1.0]))
            state.s[i] = side
            ds = rhs_s(f, state)[i]
            assert side * ds <= 0.0
            checked += 1


@pytest.mark.parametrize("mode, expected", [
    (Constant(), lambda a, K: np.zeros_like(a)),
    (Exponential(), lambda a, K: a * K),
    (Saturating(a_max=4.0, q=2.0), lambda a, K: 2.0 * K * (4.0 - a)),
])
def test_rhs_a_modes(mode, expected):
    rng = np.random.default_rng(5)
    f = random_ksat(6, 3.0, 3, 5)
    state = State(rng.uniform(-1, 1, 6), rng.uniform(0.5, 3.5, f.num_clauses))
    K = np.array([oracles.clause_K(c, state.s) for c in f.clauses])
    np.testing.assert_allclose(rhs_a(f, state, mode), expected(state.a, K), rtol=1e-13)


def test_rhs_a_stops_at_rail():
    f = random_ksat(6, 3.0, 3, 5)
    a = np.full(f.num_clauses, 2.0)
    a[0] = 3.0
    state = State(np.zeros(6), a)
    da = rhs_a(f, state, Exponential(a_max=3.0))
    assert da[0] == 0.0 and np.all(da[1:] > 0)


def test_delayed_rhs_uses_history():
    f = Formula(2, (((0, 1), (1, 1)),))
    s_then = np.array([-1.0, -1.0])
    s_now = np.array([0.0, 0.0])
    state = State(s_now, np.array([2.0]), t=3.0)
    da = rhs_a(f, state, Delayed(delta=1.0), history=lambda tau: s_then)
    assert da[0] == pytest.approx(2.0 * (0.25 - 1.0))
    # during the initial ramp (t < delta) only the current value counts
    early = State(s_now, np.array([2.0]), t=0.5)
    assert rhs_a(f, early, Delayed(delta=1.0), history=lambda tau: s_then)[0] == 0.5
    with pytest.raises(ValueError):
        rhs_a(f, state, Delayed(delta=1.0))


def test_delay_zero_and_infinite():
    f = random_ksat(5, 3.0, 3, 0)
    state = State(np.full(5, 0.2), np.ones(f.num_clauses), t=2.0)
    assert np.all(rhs_a(f, state, Delayed(delta=0.0)) == 0.0)
    np.testing.assert_array_equal(rhs_a(f, state, Delayed(delta=math.inf)),
                                  rhs_a(f, state, Exponential()))


def test_mode_validation():
    with pytest.raises(ValueError):
        Saturating(a_max=0.0)
    with pytest.raises(ValueError):
        Exponential(a_max=-1.0)
    with pytest.raises(ValueError):
        Delayed(delta=-1.0)
    with pytest.raises(ValueError):
        Delayed(delta=math.inf, doubling=True)
    with pytest.raises(ValueError):
        Delayed(growth=1.0)


def test_build_mode():
    assert build_mode("exponential") == Exponential()
    assert build_mode("saturating", a_max=3.0, q=0.5) == Saturating(3.0, 0.5)
    assert build_mode("delayed", delta=2.0, doubling=True) == Delayed(2.0, doubling=True)
    assert mode_name(build_mode("constant")) == "constant"
    with pytest.raises(ValueError):
        build_mode("saturating")
    with pytest.raises(ValueError):
        build_mode("linear")


def test_double_delay_keeps_window_continuous():
    f = random_ksat(5, 3.0, 3, 0)
    fld = CTDSField(f, Delayed(delta=1.0, doubling=True), history=lambda tau: np.zeros(5))
    assert fld.window(5.0) == 1.0
    fld.double_delay(5.0)
    assert fld.delta == 2.0
    assert fld.window(5.0) == 1.0 and fld.window(5.5) == 1.5 and fld.window(7.0) == 2.0
    assert fld.lag_weight(5.5) == 0.0 and fld.lag_weight(6.0) == 1.0
    assert fld.next_breakpoint(5.0) == 6.0


def test_empty_clause_set_has_zero_field():
    f = Formula(3, ())
    np.testing.assert_array_equal(rhs_s(f, State(np.full(3, 0.4), np.zeros(0))), np.zeros(3))


def test_single_clause_field_scales_with_weight():
    f = Formula(3, (((0, 1), (1, -1), (2, 1)),))
    s = np.array([0.2, -0.4, 0.1])
    ds = rhs_s(f, State(s, np.array([2.0])))
    np.testing.assert_allclose(ds, [2.0 * grad_term(f, s, 0, i) for i in range(3)], rtol=1e-14)
    assert potential(f, State(np.zeros(3), np.array([1.0]))) == pytest.approx(1 / 64)
