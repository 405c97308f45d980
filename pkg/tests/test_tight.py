import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from fexp.errors import DomainError
from fexp.exponents import achievable_expected, converse_expected_simple
from fexp.gaussian import ChannelParams
from fexp.tight import (SUBOPTIMAL_SLACK, FbBudget, PowerSplit, SlackParams,
                        converse_expected_tight, inner_infimum, optimize_tight, sandwich,
                        slack_objective, suboptimal_sup, suboptimal_value)

pos = st.floats(0.05, 20)
params_st = st.builds(ChannelParams, pos, pos, pos, pos)


def reference_inner(params, split, hypothesis):
    """Independent route: minimize over (a1, b1) with a2, b2 taken from the active constraints."""
    def f(v):
        v = np.clip(v, -25, 25)
        a1, b1 = 1 + np.exp(v[0]), 1 + np.exp(v[1])
        a2 = 1 / math.sqrt(1 - 1 / a1 ** 2)
        b2 = 1 / math.sqrt(1 - 1 / b1 ** 2)
        return slack_objective(params, split, SlackParams(a1, a2, b1, b2), hypothesis)
    best = min((f([x, y]), [x, y]) for x in np.linspace(-20, 6, 27) for y in np.linspace(-20, 6, 27))
    r = minimize(f, best[1], method="Nelder-Mead",
                 options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 5000})
    return r.fun


def test_all_ones_sandwich(ones):
    lo, hi = sandwich(ones)
    assert lo == pytest.approx(5.828427, abs=1e-6) and hi == pytest.approx(11.656854, abs=1e-6)
    v = converse_expected_tight(ones).value
    assert lo <= v <= hi
    assert v >= achievable_expected(ones).value


def test_suboptimal_point_reproduces_closed_form(ones):
    split = PowerSplit(0.4, 1.6, 0.7, 1.3)
    for h in (0, 1):
        assert slack_objective(ones, split, SUBOPTIMAL_SLACK, h) == pytest.approx(
            suboptimal_value(ones, split, h), rel=1e-14)
        inf, _ = inner_infimum(ones, split, h)
        assert inf <= suboptimal_value(ones, split, h)


def test_suboptimal_symmetric_split_is_optimal(ones):
    v, split = suboptimal_sup(ones)
    assert v == pytest.approx(converse_expected_simple(ones).value, rel=1e-9)
    assert split.p0 == pytest.approx(1.0, abs=1e-6) and split.pfb0 == pytest.approx(1.0, abs=1e-6)


@settings(max_examples=25, deadline=None)
@given(params_st, st.floats(0, 1), st.floats(0, 1), st.sampled_from([0, 1]))
def test_inner_matches_independent_minimizer(p, s, t, h):
    split = PowerSplit.from_fractions(p, s, t)
    ours, slack = inner_infimum(p, split, h)
    ref = reference_inner(p, split, h)
    assert ours <= ref * (1 + 1e-9)
    assert ours >= ref * (1 - 1e-6)
    assert slack_objective(p, split, slack, h) == pytest.approx(ours, rel=1e-12)


@settings(max_examples=10, deadline=None)
@given(params_st)
def test_outer_beats_coarse_split_grid(p):
    r = optimize_tight(p)
    for s in np.linspace(0.05, 0.95, 7):
        for t in np.linspace(0.05, 0.95, 7):
            split = PowerSplit.from_fractions(p, s, t)
            v = min(inner_infimum(p, split, 1, grid=21)[0], inner_infimum(p, split, 0, grid=21)[0])
            assert v <= r.value * (1 + 1e-9)


@settings(max_examples=50, deadline=None)
@given(params_st)
def test_expected_regime_ordering(p):
    tight = converse_expected_tight(p).value
    lo, hi = sandwich(p)
    assert achievable_expected(p).value <= tight
    assert lo * (1 - 1e-9) <= tight <= hi * (1 + 1e-9)


@settings(max_examples=20, deadline=None)
@given(params_st, st.floats(0.1, 10), st.floats(0.1, 10))
def test_tight_scaling_invariance(p, c1, c2):
    a = converse_expected_tight(p).value
    b = converse_expected_tight(p.scaled(c1, c2)).value
    assert b == pytest.approx(a, rel=1e-9)


def test_literal_budget_contradicts_achievability():
    # at high feedback SNR the literal budget pushes the "converse" below an
    # exponent the three-phase scheme attains, and below half the simple bound
    p = ChannelParams(1.0, 1.0, 50.0, 1.0)
    literal = converse_expected_tight(p, "literal").value
    assert literal < achievable_expected(p).value
    assert literal < sandwich(p)[0]
    assert converse_expected_tight(p, "symmetric").value >= achievable_expected(p).value


def test_literal_never_exceeds_symmetric(ones):
    for p in (ones, ChannelParams(2, 1, 3, 0.5), ChannelParams(0.1, 2, 5, 1)):
        assert (converse_expected_tight(p, FbBudget.LITERAL).value
                <= converse_expected_tight(p).value)


def test_slack_and_split_validation(ones):
    with pytest.raises(DomainError):
        SlackParams(1.0, 1.0, 2.0, 2.0)
    with pytest.raises(DomainError):
        PowerSplit(-1, 0, 0, 0)
    with pytest.raises(DomainError):
        PowerSplit(1.5, 1.5, 0, 0).check(ones)
    with pytest.raises(DomainError):
        PowerSplit(1, 1, 1, 1).check(ones, FbBudget.LITERAL)
    PowerSplit(1, 1, 1, 1).check(ones)
    s = SlackParams.from_angles(0.3, 1.1)
    assert 1 / s.a1 ** 2 + 1 / s.a2 ** 2 == pytest.approx(1.0)


def test_deterministic(ones):
    assert optimize_tight(ones) == optimize_tight(ones)
