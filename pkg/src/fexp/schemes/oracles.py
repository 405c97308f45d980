"""Exact error and retransmission probabilities of the schemes.

Every quantity is assembled in the log domain from Gaussian tail
probabilities. The branch dictionaries returned by ``*_branches`` hold the
log-probability of each (disjoint) error path for H = 0; all schemes are
symmetric, so these are also the unconditional values.

Notation inside this module: ``m = n - 1``; ``Q`` is the Gaussian tail;
``lQ`` its logarithm; ``lQc(x) = log(1 - Q(x)) = lQ(-x)``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from ..errors import DomainError
from ..gaussian import ChannelParams, log_q_tail as lQ
from .types import SchemeConfig, SchemeKind

_LOG_HALF = math.log(0.5)


def lQc(x: float) -> float:
    return lQ(-x)


def _log1mexp(a: float) -> float:
    """log(1 - exp(a)) for a <= 0."""
    if a > 0:
        raise DomainError("log1mexp needs a nonpositive argument")
    if a == -math.inf:
        return 0.0
    if a > -math.log(2):
        return math.log(-math.expm1(a))
    return math.log1p(-math.exp(a))


def _log_sqrt_ratio(log_num: float, log_den: float) -> float:
    return 0.5 * (log_num - log_den)


def _amp(log_amp: float) -> float:
    return math.exp(log_amp) if log_amp < 709.0 else math.inf


def _lse(values) -> float:
    vals = [v for v in values if v != -math.inf]
    if not vals:
        return -math.inf
    return float(logsumexp(vals))


# ---------------------------------------------------------------- no feedback

def log_error_no_feedback(params: ChannelParams, n: int) -> float:
    """log Q(sqrt(n P) / sigma): antipodal signaling over n uses."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return lQ(math.sqrt(n * params.p_fwd / params.sigma2_fwd))


def closed_form_error_no_feedback(params: ChannelParams, n: int) -> float:
    return math.exp(log_error_no_feedback(params, n))


# ----------------------------------------------------------- almost-sure scheme

def _as_args(params: ChannelParams, cfg: SchemeConfig):
    m = cfg.n - 1
    if m < 1:
        raise DomainError("AsScheme needs n >= 2")
    sig = math.sqrt(params.sigma2_fwd)
    sig_fb = math.sqrt(params.sigma2_fb)
    s = math.sqrt(m) * math.sqrt(params.p_fwd) / sig
    t_ok = math.sqrt(m) * cfg.delta * math.sqrt(params.p_fb) / sig_fb
    t_bad = math.sqrt(m) * (2 - cfg.delta) * math.sqrt(params.p_fb) / sig_fb
    return s, t_ok, t_bad


def log_gamma_as(params: ChannelParams, cfg: SchemeConfig) -> float:
    """log P(Re-Tx), conditioning on whether the tentative decision is right."""
    s, t_ok, t_bad = _as_args(params, cfg)
    return float(np.logaddexp(lQ(s) + lQc(t_bad), lQc(s) + lQ(t_ok)))


def gamma_as(params: ChannelParams, cfg: SchemeConfig) -> float:
    return math.exp(log_gamma_as(params, cfg))


def log_retx_amplitude_as(params: ChannelParams, cfg: SchemeConfig) -> float:
    return _log_sqrt_ratio(math.log(params.p_fwd), log_gamma_as(params, cfg))


def as_scheme_branches(params: ChannelParams, cfg: SchemeConfig) -> dict:
    """Log-probabilities of the four error paths of the almost-sure scheme.

    ``right_*``/``wrong_*`` refer to the tentative decision, ``*_quiet`` and
    ``*_retx`` to whether the transmitter retransmits.
    """
    s, t_ok, t_bad = _as_args(params, cfg)
    sig = math.sqrt(params.sigma2_fwd)
    thr = cfg.threshold
    amp = _amp(log_retx_amplitude_as(params, cfg))
    return {
        # X_n = 0 but the receiver sees |Y_n| beyond -threshold
        "right_quiet": lQc(s) + lQc(t_ok) + lQ(thr / sig),
        "right_retx": lQc(s) + lQ(t_ok) + lQ((amp + thr) / sig),
        # tentative decision wrong and the transmitter did not notice
        "wrong_quiet": lQ(s) + lQ(t_bad) + lQc(thr / sig),
        "wrong_retx": lQ(s) + lQc(t_bad) + lQ((amp - thr) / sig),
    }


def log_error_as_scheme(params: ChannelParams, cfg: SchemeConfig) -> float:
    return _lse(as_scheme_branches(params, cfg).values())


def closed_form_error_as_scheme(params: ChannelParams, cfg: SchemeConfig) -> float:
    return math.exp(log_error_as_scheme(params, cfg))


def log_dominant_as_scheme(params: ChannelParams, cfg: SchemeConfig) -> float:
    """log P(tentative decision wrong and no retransmission)."""
    s, _, t_bad = _as_args(params, cfg)
    return lQ(s) + lQ(t_bad)


# ------------------------------------------------------------- building block

def _bb_r(p_bar: float, sigma2: float, n: int) -> float:
    if n < 2:
        raise DomainError("the ACK/NACK statistic needs n >= 2")
    return math.sqrt(n - 1) * math.sqrt(p_bar) / math.sqrt(sigma2)


def log_nack_probability(p_bar: float, sigma2: float, delta: float, n: int) -> float:
    r = _bb_r(p_bar, sigma2, n)
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    lo, hi = lQ(delta * r), lQ((2 - delta) * r)
    return lo + _log1mexp(hi - lo)


def nack_probability(p_bar: float, sigma2: float, delta: float, n: int) -> float:
    """P(|S|/(n-1) <= (1-delta) sqrt(p_bar)) where S ~ N((n-1) sqrt(p_bar), (n-1) sigma2).

    Equals Q(delta r) - Q((2 - delta) r) with r = sqrt((n-1) p_bar / sigma2);
    the same for either transmitted bit.
    """
    return math.exp(log_nack_probability(p_bar, sigma2, delta, n))


def log_ack_probability(p_bar: float, sigma2: float, delta: float, n: int) -> float:
    r = _bb_r(p_bar, sigma2, n)
    return float(np.logaddexp(lQ(-delta * r), lQ((2 - delta) * r)))


def log_error_given_ack(p_bar: float, sigma2: float, delta: float, n: int) -> float:
    r = _bb_r(p_bar, sigma2, n)
    return lQ((2 - delta) * r) - log_ack_probability(p_bar, sigma2, delta, n)


def error_given_ack(p_bar: float, sigma2: float, delta: float, n: int) -> float:
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    return math.exp(log_error_given_ack(p_bar, sigma2, delta, n))


def _bb_role(params_role: ChannelParams, cfg: SchemeConfig):
    return params_role.p_fwd, params_role.sigma2_fwd, params_role.sigma2_fb


def bb_amplitudes(params_role: ChannelParams, cfg: SchemeConfig) -> dict:
    """Log NACK-signal amplitude, log P("NACK") and log retransmission amplitude."""
    p_bar, sigma2, sigma2_fb = _bb_role(params_role, cfg)
    sig_fb = math.sqrt(sigma2_fb)
    thr = cfg.threshold
    l_nack = log_nack_probability(p_bar, sigma2, cfg.delta, cfg.n)
    l_ack = log_ack_probability(p_bar, sigma2, cfg.delta, cfg.n)
    l_nack_amp = _log_sqrt_ratio(math.log(cfg.delta_fb_power), l_nack)
    nack_amp = _amp(l_nack_amp)
    l_guess_nack = float(np.logaddexp(l_ack + lQ(thr / sig_fb),
                                      l_nack + lQ((thr - nack_amp) / sig_fb)))
    l_retx_amp = _log_sqrt_ratio(math.log(p_bar), l_guess_nack)
    return {"log_nack": l_nack, "log_ack": l_ack, "log_nack_amp": l_nack_amp,
            "log_guess_nack": l_guess_nack, "log_retx_amp": l_retx_amp}


def building_block_branches(params_role: ChannelParams, cfg: SchemeConfig) -> dict:
    """Log-probabilities of the four (receiver, transmitter-guess) error paths.

    Keys are ``<receiver event>_<transmitter guess>``: e.g. ``nack_ack`` is a
    NACK the transmitter mistook for an ACK.
    """
    p_bar, sigma2, sigma2_fb = _bb_role(params_role, cfg)
    sig, sig_fb = math.sqrt(sigma2), math.sqrt(sigma2_fb)
    thr = cfg.threshold
    a = bb_amplitudes(params_role, cfg)
    nack_amp = _amp(a["log_nack_amp"])
    retx_amp = _amp(a["log_retx_amp"])
    r = _bb_r(p_bar, sigma2, cfg.n)
    # P(ACK and S < 0): the whole lower tail beyond -(1 - delta) sqrt(p_bar)
    l_ack_err = lQ((2 - cfg.delta) * r)
    return {
        "nack_nack": a["log_nack"] + lQ((thr - nack_amp) / sig_fb) + lQ(retx_amp / sig),
        "nack_ack": a["log_nack"] + lQ((nack_amp - thr) / sig_fb) + _LOG_HALF,
        "ack_nack": l_ack_err + lQ(thr / sig_fb),
        "ack_ack": l_ack_err + lQc(thr / sig_fb),
    }


def log_error_building_block(params_role: ChannelParams, cfg: SchemeConfig) -> float:
    return _lse(building_block_branches(params_role, cfg).values())


def closed_form_error_building_block(params_role: ChannelParams, cfg: SchemeConfig) -> float:
    return math.exp(log_error_building_block(params_role, cfg))


# ------------------------------------------------------------- three-phase

def three_phase_blocks(params: ChannelParams, cfg: SchemeConfig):
    """Role parameters and configs of the transmission and echo blocks."""
    nu = (cfg.n - 1) // 2
    d = cfg.delta_fb_power
    tx = ChannelParams(2 * params.p_fwd - d, params.sigma2_fwd, d, params.sigma2_fb)
    echo = ChannelParams(2 * params.p_fb - d, params.sigma2_fb, d, params.sigma2_fwd)
    bcfg = SchemeConfig(SchemeKind.BUILDING_BLOCK, nu, cfg.delta, d, cfg.threshold_coef)
    return tx, echo, bcfg


def three_phase_stage_errors(params: ChannelParams, cfg: SchemeConfig) -> dict:
    """log P(H' != H), log P(H'' != H') and log P(H'' != H)."""
    cfg.check_params(params)
    tx, echo, bcfg = three_phase_blocks(params, cfg)
    l1 = log_error_building_block(tx, bcfg)
    l2 = log_error_building_block(echo, bcfg)
    l_mis = float(np.logaddexp(l1 + _log1mexp(l2), _log1mexp(l1) + l2))
    return {"log_e1": l1, "log_e2": l2, "log_mismatch": l_mis,
            "log_retx_amp": _log_sqrt_ratio(math.log(params.p_fwd), l_mis)}


def three_phase_branches(params: ChannelParams, cfg: SchemeConfig) -> dict:
    """Keys ``h1_h2``: values of (H', H'') given H = 0."""
    st = three_phase_stage_errors(params, cfg)
    l1, l2 = st["log_e1"], st["log_e2"]
    c1, c2 = _log1mexp(l1), _log1mexp(l2)
    sig = math.sqrt(params.sigma2_fwd)
    thr = cfg.threshold
    amp = _amp(st["log_retx_amp"])
    return {
        "0_0": c1 + c2 + lQ(thr / sig),
        "1_1": l1 + c2 + lQ((amp - thr) / sig),
        "0_1": c1 + l2 + lQ((amp + thr) / sig),
        "1_0": l1 + l2 + lQc(thr / sig),
    }


def log_error_three_phase(params: ChannelParams, cfg: SchemeConfig) -> float:
    return _lse(three_phase_branches(params, cfg).values())


def closed_form_error_three_phase(params: ChannelParams, cfg: SchemeConfig) -> float:
    return math.exp(log_error_three_phase(params, cfg))


# ---------------------------------------------------------------- dispatch

def log_error_closed_form(params: ChannelParams, cfg: SchemeConfig) -> float:
    kind = cfg.scheme_kind
    if kind is SchemeKind.NO_FEEDBACK:
        return log_error_no_feedback(params, cfg.n)
    cfg.check_params(params)
    if kind is SchemeKind.AS_SCHEME:
        return log_error_as_scheme(params, cfg)
    if kind is SchemeKind.BUILDING_BLOCK:
        return log_error_building_block(params, cfg)
    return log_error_three_phase(params, cfg)


def predicted_exponent(params: ChannelParams, cfg: SchemeConfig) -> float:
    """Exponent the closed form approaches as n grows with delta, Delta fixed."""
    kind, d = cfg.scheme_kind, cfg.delta
    if kind is SchemeKind.NO_FEEDBACK:
        return params.snr_fwd / 2
    if kind is SchemeKind.AS_SCHEME:
        return params.snr_fwd / 2 + (2 - d) ** 2 * params.snr_fb / 2
    if kind is SchemeKind.BUILDING_BLOCK:
        return (2 - d) ** 2 * params.snr_fwd / 2
    dd = cfg.delta_fb_power
    # each block runs over (n-1)/2 uses, hence the extra factor 1/2
    return (2 - d) ** 2 / 4 * ((2 * params.p_fwd - dd) / params.sigma2_fwd
                               + (2 * params.p_fb - dd) / params.sigma2_fb)


def reference_exponent(params: ChannelParams, cfg: SchemeConfig) -> float:
    """The exponent claimed for the scheme with delta fixed (Delta fixed for ThreePhase)."""
    kind = cfg.scheme_kind
    if kind is SchemeKind.THREE_PHASE:
        dd = cfg.delta_fb_power
        return ((2 * params.p_fwd - dd) / params.sigma2_fwd
                + (2 * params.p_fb - dd) / params.sigma2_fb)
    return predicted_exponent(params, cfg)
