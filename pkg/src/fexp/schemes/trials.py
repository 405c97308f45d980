"""Executable state machines for the four schemes.

Each scheme is written once as a vectorized kernel over a batch of trials:
``bits`` has shape (B,), the noise arrays shape (B, n). The single-trial
runners wrap a kernel with B = 1. All amplitudes that the schemes define
through probabilities are taken from the exact oracles.

Ties (measure-zero events) resolve deterministically: Y_1 = 0 gives the
tentative decision 0, a feedback mean exactly on the margin means no
retransmission, S = 0 or Y_n = 0 decode as 0, and |Y_n| = threshold keeps
the earlier decision. The ACK/NACK boundary itself follows the NACK rule
(``|S|/(n-1) <= margin`` is a NACK).
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..errors import ConfigurationError
from ..gaussian import ChannelParams, RngStream, draw_gaussian_vector, energy
from . import oracles
from .types import InjectedNoise, SchemeConfig, SchemeKind, Transcript


def _signs(bits):
    return 1.0 - 2.0 * bits


def _antipodal(sign, amp):
    # avoid 0 * inf when the amplitude overflowed
    return np.where(sign > 0, amp, -amp)


def _decide_with_threshold(y_last, thr, fallback):
    return np.where(y_last > thr, 0, np.where(y_last < -thr, 1, fallback)).astype(np.int8)


def no_feedback_kernel(bits, fwd_noise, fb_noise, params: ChannelParams):
    b, n = fwd_noise.shape
    x = _signs(bits)[:, None] * np.full((b, n), math.sqrt(params.p_fwd))
    y = x + fwd_noise
    u = np.zeros_like(x)
    z = u + fb_noise if fb_noise is not None else None
    h_hat = (y.sum(axis=1) < 0).astype(np.int8)
    return {"x": x, "y": y, "u": u, "z": z, "h_hat": h_hat,
            "retx": np.zeros(b, bool), "nack": np.zeros(b, bool)}


def as_scheme_kernel(bits, fwd_noise, fb_noise, params: ChannelParams, cfg: SchemeConfig,
                     retx_amp: float):
    b, n = fwd_noise.shape
    m = n - 1
    sign = _signs(bits)
    x = np.zeros((b, n))
    y = np.empty((b, n))
    x[:, 0] = sign * math.sqrt(m) * math.sqrt(params.p_fwd)
    y[:, 0] = x[:, 0] + fwd_noise[:, 0]
    tentative = (y[:, 0] < 0).astype(np.int8)
    u = np.zeros((b, n))
    u[:, :m] = np.where(tentative == 1, -math.sqrt(params.p_fb), math.sqrt(params.p_fb))[:, None]
    z = u + fb_noise
    zbar = z[:, :m].sum(axis=1) / m
    margin = math.sqrt(params.p_fb) * (1 - cfg.delta)
    retx = np.where(bits == 0, zbar < margin, zbar > -margin)
    x[:, n - 1] = np.where(retx, _antipodal(sign, retx_amp), 0.0)
    y[:, 1:] = x[:, 1:] + fwd_noise[:, 1:]
    h_hat = _decide_with_threshold(y[:, n - 1], cfg.threshold, tentative)
    return {"x": x, "y": y, "u": u, "z": z, "h_hat": h_hat, "retx": retx,
            "nack": np.zeros(b, bool), "tentative": tentative}


def building_block_kernel(bits, fwd_noise, fb_noise, p_bar: float, delta: float,
                          threshold: float, nack_amp: float, retx_amp: float):
    """One building block; the caller decides which physical link plays which role."""
    b, n = fwd_noise.shape
    m = n - 1
    sign = _signs(bits)
    x = np.zeros((b, n))
    x[:, :m] = sign[:, None] * math.sqrt(p_bar)
    y = np.empty((b, n))
    y[:, :m] = x[:, :m] + fwd_noise[:, :m]
    s = y[:, :m].sum(axis=1)
    nack = np.abs(s / m) <= (1 - delta) * math.sqrt(p_bar)
    u = np.zeros((b, n))
    u[:, m - 1] = np.where(nack, nack_amp, 0.0)
    z = u + fb_noise
    guess_nack = z[:, m - 1] > threshold
    x[:, m] = np.where(guess_nack, _antipodal(sign, retx_amp), 0.0)
    y[:, m] = x[:, m] + fwd_noise[:, m]
    h_hat = np.where(nack, y[:, m] < 0, s < 0).astype(np.int8)
    return {"x": x, "y": y, "u": u, "z": z, "h_hat": h_hat, "retx": guess_nack,
            "nack": nack, "s": s}


def _bb_amps(params_role: ChannelParams, cfg: SchemeConfig):
    a = oracles.bb_amplitudes(params_role, cfg)
    return oracles._amp(a["log_nack_amp"]), oracles._amp(a["log_retx_amp"])


def building_block_role_kernel(bits, fwd_noise, fb_noise, params_role: ChannelParams,
                               cfg: SchemeConfig, amps=None):
    nack_amp, retx_amp = amps if amps is not None else _bb_amps(params_role, cfg)
    return building_block_kernel(bits, fwd_noise, fb_noise, params_role.p_fwd, cfg.delta,
                                 cfg.threshold, nack_amp, retx_amp)


def three_phase_kernel(bits, fwd_noise, fb_noise, params: ChannelParams, cfg: SchemeConfig,
                       amps=None):
    b, n = fwd_noise.shape
    nu = (n - 1) // 2
    tx, echo, bcfg = oracles.three_phase_blocks(params, cfg)
    if amps is None:
        amps = three_phase_amplitudes(params, cfg)
    amp1, amp2, retx_amp = amps
    # transmission phase: forward link carries data, feedback link the NACK flag
    p1 = building_block_role_kernel(bits, fwd_noise[:, :nu], fb_noise[:, :nu], tx, bcfg, amp1)
    h1 = p1["h_hat"]
    # echo phase: the receiver sends H' back; roles of the links are swapped
    p2 = building_block_role_kernel(h1, fb_noise[:, nu:2 * nu], fwd_noise[:, nu:2 * nu],
                                    echo, bcfg, amp2)
    h2 = p2["h_hat"]
    x = np.zeros((b, n))
    u = np.zeros((b, n))
    x[:, :nu], u[:, :nu] = p1["x"], p1["u"]
    u[:, nu:2 * nu], x[:, nu:2 * nu] = p2["x"], p2["u"]
    retx = h2 != bits
    x[:, n - 1] = np.where(retx, _antipodal(_signs(bits), retx_amp), 0.0)
    y = x + fwd_noise
    z = u + fb_noise
    h_hat = _decide_with_threshold(y[:, n - 1], cfg.threshold, h1)
    return {"x": x, "y": y, "u": u, "z": z, "h_hat": h_hat, "retx": retx,
            "nack": p1["nack"] | p2["nack"], "h1": h1, "h2": h2}


def three_phase_amplitudes(params: ChannelParams, cfg: SchemeConfig):
    tx, echo, bcfg = oracles.three_phase_blocks(params, cfg)
    st = oracles.three_phase_stage_errors(params, cfg)
    return _bb_amps(tx, bcfg), _bb_amps(echo, bcfg), oracles._amp(st["log_retx_amp"])


def make_kernel(params: ChannelParams, cfg: SchemeConfig):
    """Bind a scheme's kernel to its parameters, computing amplitudes once."""
    kind = cfg.scheme_kind
    if kind is not SchemeKind.NO_FEEDBACK:
        cfg.check_params(params)
    if kind is SchemeKind.NO_FEEDBACK:
        return lambda bits, fn, vn: no_feedback_kernel(bits, fn, vn, params)
    if kind is SchemeKind.AS_SCHEME:
        amp = oracles._amp(oracles.log_retx_amplitude_as(params, cfg))
        return lambda bits, fn, vn: as_scheme_kernel(bits, fn, vn, params, cfg, amp)
    if kind is SchemeKind.BUILDING_BLOCK:
        amps = _bb_amps(params, cfg)
        return lambda bits, fn, vn: building_block_role_kernel(bits, fn, vn, params, cfg, amps)
    amps = three_phase_amplitudes(params, cfg)
    return lambda bits, fn, vn: three_phase_kernel(bits, fn, vn, params, cfg, amps)


# ------------------------------------------------------------ single trials

def _noise(params: ChannelParams, n: int, rng: Optional[RngStream], noise: Optional[InjectedNoise]):
    if noise is None and rng is None:
        raise ConfigurationError("need either an RngStream or injected noise")
    fwd = draw_gaussian_vector(rng.with_lane(0) if rng else None, 0.0, params.sigma2_fwd, n,
                               injected=None if noise is None else noise.fwd)
    fb = draw_gaussian_vector(rng.with_lane(1) if rng else None, 0.0, params.sigma2_fb, n,
                              injected=None if noise is None else noise.fb)
    return fwd, fb


def _transcript(h: int, out: dict, **extra) -> Transcript:
    x, y, u, z = (np.asarray(out[k][0], dtype=float) for k in ("x", "y", "u", "z"))
    keep = {k: (v[0].item() if hasattr(v[0], "item") else v[0])
            for k, v in out.items() if k not in ("x", "y", "u", "z", "h_hat", "retx", "nack")}
    keep.update(extra)
    return Transcript(h=int(h), h_hat=int(out["h_hat"][0]), x=x, y=y, u=u, z=z,
                      retransmitted=bool(out["retx"][0]), nack_signaled=bool(out["nack"][0]),
                      fwd_energy=energy(x), fb_energy=energy(u), extra=keep)


def _run(params, cfg, h, rng, noise, **extra):
    if h not in (0, 1):
        raise ConfigurationError("h must be 0 or 1")
    fwd, fb = _noise(params, cfg.n, rng, noise)
    kernel = make_kernel(params, cfg)
    out = kernel(np.array([h], dtype=np.int8), fwd[None, :], fb[None, :])
    return _transcript(h, out, **extra)


def _check_kind(cfg, kind):
    if cfg.scheme_kind is not kind:
        raise ConfigurationError(f"expected a {kind.value} config, got {cfg.scheme_kind.value}")


def run_trial_no_feedback(params: ChannelParams, n: int, h: int, rng: Optional[RngStream] = None,
                          noise: Optional[InjectedNoise] = None) -> Transcript:
    """Antipodal signaling over all n uses, sign decision on the sum of outputs."""
    cfg = SchemeConfig(SchemeKind.NO_FEEDBACK, n)
    return _run(params, cfg, h, rng, noise)


def run_trial_as_scheme(params: ChannelParams, cfg: SchemeConfig, h: int,
                        rng: Optional[RngStream] = None,
                        noise: Optional[InjectedNoise] = None) -> Transcript:
    _check_kind(cfg, SchemeKind.AS_SCHEME)
    cfg.check_params(params)
    amp = oracles._amp(oracles.log_retx_amplitude_as(params, cfg))
    return _run(params, cfg, h, rng, noise, retx_amplitude=amp)


def run_trial_building_block(params_role: ChannelParams, cfg: SchemeConfig, h: int,
                             rng: Optional[RngStream] = None,
                             noise: Optional[InjectedNoise] = None) -> Transcript:
    """``params_role.p_fwd`` is the data power; ``p_fb`` is unused (``delta_fb_power`` sets it)."""
    _check_kind(cfg, SchemeKind.BUILDING_BLOCK)
    nack_amp, retx_amp = _bb_amps(params_role, cfg)
    return _run(params_role, cfg, h, rng, noise, nack_amplitude=nack_amp,
                retx_amplitude=retx_amp)


def run_trial_three_phase(params: ChannelParams, cfg: SchemeConfig, h: int,
                          rng: Optional[RngStream] = None,
                          noise: Optional[InjectedNoise] = None) -> Transcript:
    _check_kind(cfg, SchemeKind.THREE_PHASE)
    cfg.check_params(params)
    return _run(params, cfg, h, rng, noise)


def run_trial(params: ChannelParams, cfg: SchemeConfig, h: int, rng: Optional[RngStream] = None,
              noise: Optional[InjectedNoise] = None) -> Transcript:
    kind = cfg.scheme_kind
    if kind is SchemeKind.NO_FEEDBACK:
        return run_trial_no_feedback(params, cfg.n, h, rng, noise)
    if kind is SchemeKind.AS_SCHEME:
        return run_trial_as_scheme(params, cfg, h, rng, noise)
    if kind is SchemeKind.BUILDING_BLOCK:
        return run_trial_building_block(params, cfg, h, rng, noise)
    return run_trial_three_phase(params, cfg, h, rng, noise)
