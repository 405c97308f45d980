import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fexp.errors import ConfigurationError
from fexp.gaussian import ChannelParams, RngStream, log_q_tail, q_tail
from fexp.schemes import (InjectedNoise, SchemeConfig, SchemeKind, closed_form_error_as_scheme,
                          closed_form_error_building_block, closed_form_error_no_feedback,
                          closed_form_error_three_phase, error_given_ack, gamma_as,
                          nack_probability, run_trial, run_trial_as_scheme,
                          run_trial_building_block, run_trial_no_feedback,
                          run_trial_three_phase)
from fexp.schemes import oracles

Q = q_tail


def as_cfg(n=5, delta=0.3, c=1.0):
    return SchemeConfig("AsScheme", n, delta, threshold_coef=c)


# ------------------------------------------------------------------ traces

def test_no_feedback_noiseless(ones):
    t = run_trial_no_feedback(ones, 4, 0, noise=InjectedNoise.zeros(4))
    assert t.x.tolist() == [1, 1, 1, 1] and t.h_hat == 0
    assert t.fwd_energy == 4 and t.fb_energy == 0
    t1 = run_trial_no_feedback(ones, 4, 1, noise=InjectedNoise.zeros(4))
    assert t1.x.tolist() == [-1, -1, -1, -1] and t1.h_hat == 1


def test_as_scheme_noiseless(ones):
    t = run_trial_as_scheme(ones, as_cfg(), 0, noise=InjectedNoise.zeros(5))
    assert t.x[0] == 2.0 and t.y[0] == 2.0
    assert t.extra["tentative"] == 0
    assert t.z[:4].mean() == 1.0 and not t.retransmitted
    assert t.x[4] == 0.0 and t.h_hat == 0
    assert t.fb_energy == 4.0


def test_as_scheme_wrong_tentative_not_rescued_at_unit_threshold(ones):
    # gamma = 0.2908 here, so the retransmission amplitude 1/sqrt(gamma) = 1.854
    # is far below the threshold 5 and the receiver keeps its wrong tentative guess
    cfg = as_cfg()
    assert gamma_as(ones, cfg) == pytest.approx(0.29080, abs=5e-5)
    t = run_trial_as_scheme(ones, cfg, 0, noise=InjectedNoise.of(5, fwd={1: -3.0}))
    assert t.y[0] == -1.0 and t.extra["tentative"] == 1
    assert t.z[:4].mean() == -1.0 and t.retransmitted
    assert t.x[4] == pytest.approx(1 / math.sqrt(gamma_as(ones, cfg)))
    assert t.x[4] < cfg.threshold
    assert t.h_hat == 1


def test_as_scheme_rescue_with_small_threshold(ones):
    cfg = as_cfg(c=0.2)
    t = run_trial_as_scheme(ones, cfg, 0, noise=InjectedNoise.of(5, fwd={1: -3.0}))
    assert t.retransmitted and t.x[4] > cfg.threshold == 1.0
    assert t.h_hat == 0


def test_as_scheme_feedback_energy_is_constant(ones):
    cfg = as_cfg()
    for i in range(50):
        t = run_trial_as_scheme(ones, cfg, i % 2, rng=RngStream(3, i))
        assert t.fb_energy == pytest.approx(4.0, rel=1e-15)


def test_as_scheme_requires_feedback_power():
    with pytest.raises(ConfigurationError):
        run_trial_as_scheme(ChannelParams(1, 1, 0, 1), as_cfg(), 0, noise=InjectedNoise.zeros(5))


def bb_cfg(n=5, delta=0.5, d=0.01, c=1.0):
    return SchemeConfig("BuildingBlock", n, delta, d, threshold_coef=c)


def test_building_block_noiseless(ones):
    t = run_trial_building_block(ones, bb_cfg(), 0, noise=InjectedNoise.zeros(5))
    assert t.extra["s"] == 4.0 and not t.nack_signaled
    assert t.u[3] == 0.0 and t.z[3] == 0.0 and not t.retransmitted
    assert t.x[4] == 0.0 and t.h_hat == 0


def test_building_block_nack_amplitude(ones):
    cfg = bb_cfg()
    # S = 4 - 3 = 1, |S|/4 = 0.25 <= (1 - 0.5) -> NACK at slot n-1
    t = run_trial_building_block(ones, cfg, 0, noise=InjectedNoise.of(5, fwd={1: -3.0}))
    assert t.nack_signaled
    p_nack = nack_probability(1.0, 1.0, 0.5, 5)
    assert t.u[3] == pytest.approx(math.sqrt(0.01 / p_nack), rel=1e-14)
    assert t.extra["nack_amplitude"] == t.u[3]
    assert np.count_nonzero(t.u) == 1
    # the NACK flag is 0.23 < threshold 5, so the transmitter sees "ACK" and the
    # receiver decides by the sign of Y_n = 0
    assert not t.retransmitted and t.h_hat == 0


def test_building_block_retransmission_path(ones):
    cfg = bb_cfg(c=0.01)
    t = run_trial_building_block(ones, cfg, 1, noise=InjectedNoise.of(5, fwd={1: 3.0}))
    assert t.nack_signaled and t.retransmitted
    assert t.x[4] == -t.extra["retx_amplitude"] and t.h_hat == 1


def tp_cfg(n=15, delta=0.4, d=0.05, c=1.0):
    return SchemeConfig("ThreePhase", n, delta, d, threshold_coef=c)


def test_three_phase_noiseless(ones):
    t = run_trial_three_phase(ones, tp_cfg(), 0, noise=InjectedNoise.zeros(15))
    assert t.extra["h1"] == 0 and t.extra["h2"] == 0
    assert not t.retransmitted and t.x[14] == 0.0 and t.h_hat == 0
    # phase 1 forward symbols at power 2P - Delta, echo on the feedback link
    assert t.x[:6] == pytest.approx([math.sqrt(1.95)] * 6)
    assert t.u[7:13] == pytest.approx([math.sqrt(1.95)] * 6)


def test_three_phase_echo_error_triggers_retransmission(ones):
    # c = 0.1 keeps the threshold (1.5) below the retransmission amplitude at n = 15
    cfg = tp_cfg(c=0.1)
    # push the echo statistic (feedback noise on echo data slots) to the wrong side
    noise = InjectedNoise.of(15, fb={k: -4.0 for k in range(8, 14)})
    t = run_trial_three_phase(ones, cfg, 0, noise=noise)
    assert t.extra["h1"] == 0 and t.extra["h2"] == 1
    assert t.retransmitted and t.x[14] > cfg.threshold
    assert t.h_hat == 0


def test_three_phase_rejects_even_and_short():
    with pytest.raises(ConfigurationError):
        tp_cfg(n=14)
    with pytest.raises(ConfigurationError):
        tp_cfg(n=5)
    with pytest.raises(ConfigurationError):
        run_trial_three_phase(ChannelParams(1, 1, 0.04, 1), tp_cfg(), 0,
                              noise=InjectedNoise.zeros(15))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SchemeConfig("AsScheme", 5, 1.0)
    with pytest.raises(ConfigurationError):
        SchemeConfig("AsScheme", 1)
    with pytest.raises(ConfigurationError):
        SchemeConfig("BuildingBlock", 5, 0.5)
    with pytest.raises(ConfigurationError):
        SchemeConfig("BuildingBlock", 2, 0.5, 0.1)
    with pytest.raises(ValueError):
        SchemeConfig("Bogus", 5)


# --------------------------------------------------------------- symmetry

CONFIGS = [
    SchemeConfig("NoFeedback", 6),
    as_cfg(7, 0.4, 0.3),
    bb_cfg(9, 0.5, 0.2, 0.2),
    tp_cfg(15, 0.4, 0.05, 0.2),
]


def flag_slots(cfg):
    """0-based (forward, feedback) indices carrying a NACK pulse.

    The pulse is positive under both hypotheses, so the mirror image of a
    trial keeps these coordinates (and their noise) unchanged.
    """
    n = cfg.n
    if cfg.scheme_kind is SchemeKind.BUILDING_BLOCK:
        return [], [n - 2]
    if cfg.scheme_kind is SchemeKind.THREE_PHASE:
        nu = (n - 1) // 2
        return [2 * nu - 2], [nu - 2]
    return [], []


def mirror(v, keep):
    out = -np.asarray(v, dtype=float)
    out[keep] = -out[keep]
    return out


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda c: c.scheme_kind.value)
def test_mirror_symmetry(ones, cfg):
    rng = np.random.default_rng(5)
    kf, kb = flag_slots(cfg)
    flips = 0
    for _ in range(60):
        fwd = rng.normal(size=cfg.n) * 1.5
        fb = rng.normal(size=cfg.n) * 1.5
        t0 = run_trial(ones, cfg, 0, noise=InjectedNoise(tuple(fwd), tuple(fb)))
        t1 = run_trial(ones, cfg, 1, noise=InjectedNoise(tuple(mirror(fwd, kf)),
                                                         tuple(mirror(fb, kb))))
        assert np.array_equal(t1.x, mirror(t0.x, kf)) and np.array_equal(t1.u, mirror(t0.u, kb))
        assert t1.h_hat == 1 - t0.h_hat
        assert t1.retransmitted == t0.retransmitted
        assert t1.nack_signaled == t0.nack_signaled
        flips += t0.error or t0.retransmitted or t0.nack_signaled
    assert flips > 0


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda c: c.scheme_kind.value)
def test_trace_determinism(ones, cfg):
    noise = InjectedNoise(tuple(np.linspace(-2, 2, cfg.n)), tuple(np.linspace(1, -1, cfg.n)))
    a = run_trial(ones, cfg, 1, noise=noise)
    b = run_trial(ones, cfg, 1, noise=noise)
    assert np.array_equal(a.y, b.y) and np.array_equal(a.z, b.z) and a.h_hat == b.h_hat


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda c: c.scheme_kind.value)
def test_transcript_channel_equations(ones, cfg):
    t = run_trial(ones, cfg, 0, rng=RngStream(9, 1))
    fwd = t.y - t.x
    fb = t.z - t.u
    assert all(len(v) == cfg.n for v in (t.x, t.y, t.u, t.z))
    assert not np.allclose(fwd, 0) and not np.allclose(fb, 0)
    assert t.fwd_energy == pytest.approx(float(t.x @ t.x))


# ----------------------------------------------------------------- oracles

def test_as_dominant_term_example(ones):
    cfg = as_cfg()
    dom = math.exp(oracles.log_dominant_as_scheme(ones, cfg))
    assert dom == pytest.approx(Q(3.4) * Q(2.0), rel=1e-12)
    assert dom == pytest.approx(7.66e-6, rel=1e-3)
    br = oracles.as_scheme_branches(ones, cfg)
    assert br["wrong_quiet"] == pytest.approx(math.log(dom) + math.log(1 - Q(5.0)), rel=1e-12)


positive = st.floats(0.05, 20)


@given(positive, positive, positive, positive, st.floats(0.01, 0.99), st.integers(2, 200))
def test_gamma_below_union_bound(p, s2, pfb, s2fb, delta, n):
    params = ChannelParams(p, s2, pfb, s2fb)
    g = gamma_as(params, as_cfg(n, delta))
    m = n - 1
    bound = Q(math.sqrt(m * p / s2)) + Q(math.sqrt(m * pfb / s2fb) * delta)
    assert 0 <= g <= bound * (1 + 1e-12)


def test_gamma_limits(ones):
    # very reliable feedback and a margin near the signal: gamma -> Q(s)
    params = ChannelParams(1, 1, 1e4, 1)
    g = gamma_as(params, as_cfg(5, 0.999))
    assert g == pytest.approx(Q(2.0), rel=1e-6)


def test_nack_probability_examples():
    assert nack_probability(1, 1, 0.2, 101) == pytest.approx(Q(2) - Q(18), rel=1e-12)
    assert nack_probability(1, 1, 0.2, 101) == pytest.approx(0.0227501, rel=1e-5)
    assert nack_probability(1, 1, 1e-9, 101) == pytest.approx(0.5, abs=1e-8)
    with pytest.raises(Exception):
        nack_probability(1, 1, 0.5, 1)


@settings(max_examples=200)
@given(st.floats(0.05, 10), st.floats(0.05, 0.95), st.integers(2, 400))
def test_nack_probability_decreasing_above_snr_floor(p_bar, delta, n):
    # d/dn P(NACK) < 0 exactly when (n-1) P/sigma^2 exceeds this floor
    floor = 2 * math.log((2 - delta) / delta) / (4 * (1 - delta))
    if (n - 1) * p_bar <= floor:
        return
    la = oracles.log_nack_probability(p_bar, 1.0, delta, n)
    lb = oracles.log_nack_probability(p_bar, 1.0, delta, n + 1)
    assert -math.inf < lb <= la < 0


def test_nack_probability_rises_at_low_snr():
    assert nack_probability(0.01, 1.0, 0.5, 3) > nack_probability(0.01, 1.0, 0.5, 2)


def test_error_given_ack_example():
    v = error_given_ack(1, 1, 0.5, 5)
    assert v == pytest.approx(Q(3) / (Q(-1) + Q(3)), rel=1e-12)
    assert v == pytest.approx(1.6019e-3, rel=1e-4)


@pytest.mark.parametrize("n", [10**3, 10**4, 10**5])
def test_error_given_ack_slope(n):
    lv = oracles.log_error_given_ack(1.0, 1.0, 0.2, n)
    assert -lv / n == pytest.approx(1.62, rel=0.01)


@given(st.floats(0.1, 4), st.floats(0.1, 0.9), st.floats(0.001, 2), st.integers(3, 80),
       st.floats(0.05, 2))
def test_building_block_branches_below_factored_bounds(p_bar, delta, d, n, c):
    params = ChannelParams(p_bar, 1.0, 1.0, 1.0)
    cfg = bb_cfg(n, delta, d, c)
    br = oracles.building_block_branches(params, cfg)
    amps = oracles.bb_amplitudes(params, cfg)
    a_n = math.exp(amps["log_nack_amp"])
    b = oracles._amp(amps["log_retx_amp"])
    thr = cfg.threshold
    tol = 1e-12
    assert br["nack_nack"] <= log_q_tail(b) + tol
    assert br["nack_ack"] <= log_q_tail(a_n - thr) + tol
    assert br["ack_nack"] <= log_q_tail(thr) + tol
    assert br["ack_ack"] <= oracles.log_error_given_ack(p_bar, 1.0, delta, n) + tol


def test_three_phase_stage_error_exponent(ones):
    cfg = tp_cfg(20001, 0.2, 0.05)
    st_ = oracles.three_phase_stage_errors(ones, cfg)
    n = cfg.n
    # both stages wrong in the dangerous direction: exponent sums the two blocks
    rate = -(st_["log_e1"] + st_["log_e2"]) / n
    target = (2 - 0.2) ** 2 / 4 * (1.95 + 1.95)
    assert rate == pytest.approx(target, rel=0.01)


def test_closed_form_probabilities_valid(ones):
    for cfg in CONFIGS:
        p = math.exp(oracles.log_error_closed_form(ones, cfg))
        assert 0 < p < 0.5


def test_no_feedback_oracle(ones):
    assert closed_form_error_no_feedback(ones, 4) == pytest.approx(Q(2), rel=1e-14)
