import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fexp.errors import DomainError
from fexp.exponents import (BoundKind, ExponentBound, Regime, achievable_as,
                            achievable_expected, bsc_bounds, converse_as,
                            converse_expected_simple, fit_exponent_slope,
                            passive_feedback_bound, rate_converse_as)
from fexp.gaussian import ChannelParams
from fexp.schemes import SchemeConfig, oracles

pos = st.floats(0.01, 100)
params_st = st.builds(ChannelParams, pos, pos, pos, pos)
SQ2 = math.sqrt(2)


def test_all_ones_table(ones):
    assert achievable_as(ones).value == pytest.approx(2.5, abs=1e-12)
    assert converse_as(ones).value == pytest.approx(0.5 + 2 * SQ2, abs=1e-12)
    assert achievable_expected(ones).value == pytest.approx(4.0, abs=1e-12)
    assert converse_expected_simple(ones).value == pytest.approx(6 + 4 * SQ2, abs=1e-12)
    assert passive_feedback_bound(ones).value == pytest.approx(0.75, abs=1e-12)
    assert passive_feedback_bound(ones, loose=True).value == pytest.approx(1.0, abs=1e-12)


def test_substitution_examples(ones):
    assert achievable_as(ones, 0.5).value == pytest.approx(1.625)
    assert achievable_as(ChannelParams(1, 1, 0, 1)).value == 0.5
    assert converse_as(ChannelParams(2, 1, 3, 2)).value == pytest.approx(1 + math.sqrt(15))
    assert rate_converse_as(ones, 0.0).value == pytest.approx(2 * SQ2)
    assert rate_converse_as(ChannelParams(1, 1, 3, 2), 1.3).value == pytest.approx(
        1.3 + math.sqrt(15))
    assert achievable_expected(ones, 0.1).value == pytest.approx(3.8)
    assert achievable_expected(ChannelParams(3, 2, 1, 4)).value == pytest.approx(3.5)


def test_kinds_and_regimes(ones):
    assert achievable_as(ones).kind is BoundKind.ACHIEVABLE
    assert converse_as(ones).regime is Regime.ALMOST_SURE
    assert converse_expected_simple(ones).kind is BoundKind.CONVERSE
    assert passive_feedback_bound(ones).regime is Regime.PASSIVE
    assert all(b.regime is Regime.BSC for b in bsc_bounds(0.1, 0.1))


def test_domain_errors(ones):
    with pytest.raises(DomainError):
        rate_converse_as(ones, -0.1)
    with pytest.raises(DomainError):
        achievable_expected(ones, 1.0)
    with pytest.raises(DomainError):
        achievable_as(ones, 1.0)
    with pytest.raises(DomainError):
        ExponentBound(-1.0, BoundKind.CONVERSE, Regime.BSC, "x")
    for eps, fb in [(0.0, 0.1), (0.6, 0.1), (0.1, 0.0), (0.1, 0.51)]:
        with pytest.raises(DomainError):
            bsc_bounds(eps, fb)


def test_bsc_values():
    active, two = bsc_bounds(0.1, 0.1)
    assert active.value == pytest.approx(math.log(9), abs=1e-12)
    assert two.value == pytest.approx(0.5 * math.log(1 / 0.36), abs=1e-12)
    assert bsc_bounds(0.5, 0.5)[1].value == 0.0
    assert bsc_bounds(0.5, 0.5)[0].value == 0.0
    assert bsc_bounds(0.2, 0.1, 0.7)[0].value == pytest.approx(math.log(9) + 0.7)


def test_no_feedback_reduction():
    p = ChannelParams(1.7, 0.3, 0.0, 2.0)
    assert achievable_as(p).value == converse_as(p).value == pytest.approx(1.7 / 0.6)
    assert converse_expected_simple(p).value == pytest.approx(
        (math.sqrt(2.0) + math.sqrt(1.7)) ** 2 / 0.3 + 1.0)


@given(params_st)
def test_almost_sure_ordering(p):
    assert achievable_as(p).value <= converse_as(p).value * (1 + 1e-12)


@given(params_st, st.floats(0.01, 0.99))
def test_finite_delta_dominated(p, d):
    assert achievable_as(p, d).value <= achievable_as(p).value


@given(params_st)
def test_expected_ordering_simple(p):
    assert achievable_expected(p).value <= converse_expected_simple(p).value


@given(params_st)
def test_passive_ordering(p):
    assert passive_feedback_bound(p).value <= passive_feedback_bound(p, loose=True).value
    assert passive_feedback_bound(p, loose=True).value <= achievable_expected(p).value / 4 * (
        1 + 1e-12)


def test_quadruple_at_equal_snr():
    for snr in (0.1, 1.0, 7.0):
        p = ChannelParams(snr, 1.0, 3 * snr, 3.0)
        ratio = achievable_expected(p).value / passive_feedback_bound(p, loose=True).value
        assert ratio == pytest.approx(4.0, rel=1e-12)


CLOSED = [achievable_as, converse_as, achievable_expected, converse_expected_simple,
          passive_feedback_bound, lambda p: passive_feedback_bound(p, loose=True)]


@given(params_st, st.floats(0.01, 100), st.floats(0.01, 100))
def test_scaling_invariance(p, c1, c2):
    q = p.scaled(c1, c2)
    for fn in CLOSED:
        assert fn(q).value == pytest.approx(fn(p).value, rel=1e-9)


@pytest.mark.parametrize("fn", CLOSED)
def test_monotonicity_grid(fn):
    grid = [0.3, 1.0, 3.0]
    for p in grid:
        for s in grid:
            for pf in grid:
                for sf in grid:
                    base = fn(ChannelParams(p, s, pf, sf)).value
                    assert fn(ChannelParams(2 * p, s, pf, sf)).value >= base
                    assert fn(ChannelParams(p, s, 2 * pf, sf)).value >= base
                    assert fn(ChannelParams(p, 2 * s, pf, sf)).value <= base
                    assert fn(ChannelParams(p, s, pf, 2 * sf)).value <= base


# ------------------------------------------------------------------ slopes

def test_fit_exact_exponential():
    fit = fit_exponent_slope([(n, -2.0 * n) for n in (10, 20, 30)])
    assert fit.slope == pytest.approx(2.0, abs=1e-12) and fit.r2 == pytest.approx(1.0)


def test_fit_constant():
    fit = fit_exponent_slope([(n, math.log(0.1)) for n in (5, 6, 9)])
    assert fit.slope == pytest.approx(0.0, abs=1e-14)
    assert fit.r2 == 1.0


def test_fit_errors():
    with pytest.raises(DomainError):
        fit_exponent_slope([(1, -1.0), (2, -2.0)])
    with pytest.raises(DomainError):
        fit_exponent_slope([(1, -1.0), (1, -2.0), (2, -3.0)])
    with pytest.raises(DomainError):
        fit_exponent_slope([(1, -1.0), (2, -math.inf), (3, -3.0)])


@given(st.floats(0.01, 10), st.floats(-5, 5))
def test_fit_recovers_line(slope, intercept):
    pts = [(n, -(slope * n + intercept)) for n in (100, 1000, 10**4, 10**5)]
    fit = fit_exponent_slope(pts)
    assert fit.slope == pytest.approx(slope, rel=1e-9)


def test_fit_as_scheme_oracle(ones):
    cfg = SchemeConfig("AsScheme", 2, 0.3)
    pts = [(n, oracles.log_error_as_scheme(ones, cfg.with_n(n))) for n in (10**3, 10**4, 10**5)]
    fit = fit_exponent_slope(pts)
    assert fit.slope == pytest.approx(1.945, rel=0.01)
