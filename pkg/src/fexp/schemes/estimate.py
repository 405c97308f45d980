"""Monte Carlo and importance-sampled error estimation, power audits.

Trials are processed in fixed blocks of ``BLOCK`` trials. Block ``b`` of a
run with seed ``s`` draws all of its randomness (hypotheses, forward noise,
feedback noise, in that order) from ``RngStream(s, b)``, so results depend
only on (seed, trials) and never on how blocks are scheduled. Blocks run on
a thread pool sized by the ``FEXP_THREADS`` environment variable and are
reduced in block order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from scipy.stats import binomtest

from ..errors import ConfigurationError, UnsupportedConfigurationError
from ..gaussian import ChannelParams, RngStream
from . import oracles
from .trials import make_kernel
from .types import ErrorEstimate, PowerAudit, SchemeConfig, SchemeKind, Tilt

BLOCK = 1 << 16
THREADS_ENV = "FEXP_THREADS"


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _blocks(trials: int):
    nb = -(-trials // BLOCK)
    return [(b, min(BLOCK, trials - b * BLOCK)) for b in range(nb)]


def _map_blocks(fn, trials: int):
    blocks = _blocks(trials)
    threads = thread_count()
    if threads == 1 or len(blocks) == 1:
        return [fn(b, size) for b, size in blocks]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda bs: fn(*bs), blocks))


def _draw_block(params: ChannelParams, n: int, seed: int, block: int, size: int):
    g = RngStream(seed, block).generator()
    bits = g.integers(0, 2, size=size, dtype=np.int8)
    fwd = g.standard_normal((size, n)) * math.sqrt(params.sigma2_fwd)
    fb = g.standard_normal((size, n)) * math.sqrt(params.sigma2_fb)
    return bits, fwd, fb


def _check_tilt(tilt: Tilt, cfg: SchemeConfig):
    n = cfg.n
    fwd = np.asarray(tilt.fwd_shift, dtype=float)
    fb = np.asarray(tilt.fb_shift, dtype=float) if len(tilt.fb_shift) else np.zeros(n)
    if fwd.shape != (n,) or fb.shape != (n,):
        raise UnsupportedConfigurationError(
            f"tilt shifts must have length n = {n} (got {fwd.shape}, {fb.shape})")
    if not (np.all(np.isfinite(fwd)) and np.all(np.isfinite(fb))):
        raise UnsupportedConfigurationError("tilt shifts must be finite")
    if cfg.scheme_kind is SchemeKind.NO_FEEDBACK and np.any(fb != 0):
        raise UnsupportedConfigurationError("the no-feedback scheme has no feedback link to tilt")
    return fwd, fb


def estimate_error(cfg: SchemeConfig, params: ChannelParams, trials: int, seed: int,
                   tilt: Optional[Tilt] = None) -> ErrorEstimate:
    """Estimate P(error) with H uniform.

    Plain mode reports a Wilson 95% interval. With ``tilt`` the noise of each
    trial is drawn with its mean shifted by the tilt vectors (negated when
    H = 1) and the error indicator is weighted by the likelihood ratio; the
    interval is the normal one from the weighted-sample variance.
    """
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    kernel = make_kernel(params, cfg)
    n = cfg.n
    shifts = _check_tilt(tilt, cfg) if tilt is not None else None

    def block(b, size):
        bits, fwd, fb = _draw_block(params, n, seed, b, size)
        if shifts is None:
            err = kernel(bits, fwd, fb)["h_hat"] != bits
            c = int(err.sum())
            return c, float(c), float(c)
        sign = (1.0 - 2.0 * bits)[:, None]
        mu_f = sign * shifts[0]
        mu_b = sign * shifts[1]
        fwd = fwd + mu_f
        fb = fb + mu_b
        lw = (np.einsum("ij,ij->i", -fwd, mu_f) + 0.5 * np.einsum("ij,ij->i", mu_f, mu_f)) \
            / params.sigma2_fwd
        lw += (np.einsum("ij,ij->i", -fb, mu_b) + 0.5 * np.einsum("ij,ij->i", mu_b, mu_b)) \
            / params.sigma2_fb
        err = kernel(bits, fwd, fb)["h_hat"] != bits
        w = np.where(err, np.exp(lw), 0.0)
        return int(err.sum()), math.fsum(w), math.fsum(w * w)

    parts = _map_blocks(block, trials)
    count = sum(p[0] for p in parts)
    s1 = math.fsum(p[1] for p in parts)
    s2 = math.fsum(p[2] for p in parts)
    p_hat = s1 / trials
    if shifts is None:
        ci = binomtest(count, trials).proportion_ci(confidence_level=0.95, method="wilson")
        se = math.sqrt(p_hat * (1 - p_hat) / trials)
        return ErrorEstimate(p_hat, trials, s1, float(ci.low), float(ci.high), "Plain", se, count)
    var = max(s2 / trials - p_hat ** 2, 0.0) * trials / max(trials - 1, 1)
    se = math.sqrt(var / trials)
    lo, hi = max(0.0, p_hat - 1.96 * se), p_hat + 1.96 * se
    return ErrorEstimate(p_hat, trials, s1, lo, hi, "Tilted", se, count, tilt)


def estimate_retx_rate(cfg: SchemeConfig, params: ChannelParams, trials: int, seed: int) -> float:
    """Empirical frequency of the scheme's retransmission flag."""
    kernel = make_kernel(params, cfg)

    def block(b, size):
        bits, fwd, fb = _draw_block(params, cfg.n, seed, b, size)
        return int(kernel(bits, fwd, fb)["retx"].sum())

    return sum(_map_blocks(block, trials)) / trials


def default_tilt(params: ChannelParams, cfg: SchemeConfig) -> Tilt:
    """A shift aimed at the dominant error path of the almost-sure scheme.

    The first forward noise sample is pushed onto the decision boundary and
    the feedback noise over slots 1..n-1 is pushed so that a wrong tentative
    decision reads as right at the transmitter.
    """
    if cfg.scheme_kind is not SchemeKind.AS_SCHEME:
        raise UnsupportedConfigurationError("default_tilt is defined for AsScheme only")
    n, m = cfg.n, cfg.n - 1
    fwd = [0.0] * n
    fwd[0] = -math.sqrt(m * params.p_fwd)
    fb = [(2 - cfg.delta) * math.sqrt(params.p_fb)] * m + [0.0]
    return Tilt(tuple(fwd), tuple(fb))


def expected_energy_per_symbol(params: ChannelParams, cfg: SchemeConfig):
    """Exact expected (forward, feedback) energy per channel use."""
    n, kind = cfg.n, cfg.scheme_kind
    if kind is SchemeKind.NO_FEEDBACK:
        return params.p_fwd, 0.0
    if kind is SchemeKind.AS_SCHEME:
        # (n-1)P in slot 1 plus P/gamma with probability gamma in slot n
        return params.p_fwd, (n - 1) * params.p_fb / n
    if kind is SchemeKind.BUILDING_BLOCK:
        return params.p_fwd, cfg.delta_fb_power / n
    nu = (n - 1) // 2
    d = cfg.delta_fb_power
    fwd = nu * (2 * params.p_fwd - d) + d + params.p_fwd
    fb = nu * (2 * params.p_fb - d) + d
    return fwd / n, fb / n


def audit_power(cfg: SchemeConfig, params: ChannelParams, trials: int, seed: int) -> PowerAudit:
    """Per-symbol energy means (with 3-standard-error halfwidths) and the feedback maximum."""
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    kernel = make_kernel(params, cfg)
    n = cfg.n

    def block(b, size):
        bits, fwd, fb = _draw_block(params, n, seed, b, size)
        out = kernel(bits, fwd, fb)
        ef = np.einsum("ij,ij->i", out["x"], out["x"]) / n
        eb = np.einsum("ij,ij->i", out["u"], out["u"]) / n
        return (math.fsum(ef), math.fsum(ef * ef), math.fsum(eb), math.fsum(eb * eb),
                float(eb.max()))

    parts = _map_blocks(block, trials)
    sf, sf2, sb, sb2 = (math.fsum(p[i] for p in parts) for i in range(4))
    mx = max(p[4] for p in parts)
    mf, mb = sf / trials, sb / trials

    def halfwidth(mean, sq):
        var = max(sq / trials - mean * mean, 0.0)
        return 3.0 * math.sqrt(var / trials)

    exp_f, exp_b = expected_energy_per_symbol(params, cfg)
    return PowerAudit(mf, mb, mx, halfwidth(mf, sf2), halfwidth(mb, sb2), trials, exp_f, exp_b)


def oracle_error(params: ChannelParams, cfg: SchemeConfig) -> float:
    return math.exp(oracles.log_error_closed_form(params, cfg))
