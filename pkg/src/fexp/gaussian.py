"""Gaussian primitives: tail function, reproducible noise, energy accounting.

The tail function is evaluated through the scaled complementary error
function ``erfcx`` so that probabilities far out in the tail keep full
relative precision; ``log_q_tail`` never underflows and is the one to use
for exponent work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcx

from .errors import DomainError

__all__ = [
    "ChannelParams",
    "RngStream",
    "q_tail",
    "log_q_tail",
    "log_q_tail_complement",
    "normal_pdf",
    "energy",
    "draw_gaussian_vector",
]

_SQRT2 = math.sqrt(2.0)
_LOG_HALF = math.log(0.5)


@dataclass(frozen=True)
class ChannelParams:
    """Powers and noise variances of the forward and feedback links."""

    p_fwd: float
    sigma2_fwd: float
    p_fb: float
    sigma2_fb: float

    def __post_init__(self):
        for name in ("p_fwd", "sigma2_fwd", "p_fb", "sigma2_fb"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
        if self.p_fwd <= 0:
            raise DomainError(f"p_fwd must be positive, got {self.p_fwd}")
        if self.sigma2_fwd <= 0 or self.sigma2_fb <= 0:
            raise DomainError("noise variances must be strictly positive")
        if self.p_fb < 0:
            raise DomainError(f"p_fb must be nonnegative, got {self.p_fb}")

    @property
    def snr_fwd(self) -> float:
        return self.p_fwd / self.sigma2_fwd

    @property
    def snr_fb(self) -> float:
        return self.p_fb / self.sigma2_fb

    def scaled(self, c_fwd: float = 1.0, c_fb: float = 1.0) -> "ChannelParams":
        """Scale (power, variance) of each link by a common factor."""
        return ChannelParams(self.p_fwd * c_fwd, self.sigma2_fwd * c_fwd,
                             self.p_fb * c_fb, self.sigma2_fb * c_fb)

    def as_dict(self) -> dict:
        return {"p_fwd": self.p_fwd, "sigma2_fwd": self.sigma2_fwd,
                "p_fb": self.p_fb, "sigma2_fb": self.sigma2_fb}


def _check_nan(x):
    if np.any(np.isnan(x)):
        raise DomainError("q_tail is undefined for NaN")


def q_tail(x):
    """P(N > x) for a standard Gaussian N.

    Accepts scalars or arrays. For x > 0 the value is computed as
    ``erfcx(x/sqrt2) * exp(-x^2/2) / 2``, which is relatively accurate until
    the result itself leaves the double range (x ~ 38.5).
    """
    arr = np.asarray(x, dtype=float)
    _check_nan(arr)
    out = np.where(arr > 0,
                   0.5 * erfcx(np.abs(arr) / _SQRT2) * np.exp(-0.5 * arr * arr),
                   0.5 * erfc(arr / _SQRT2))
    out = np.where(np.isposinf(arr), 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def log_q_tail(x):
    """Natural log of ``q_tail(x)``; finite for every finite x."""
    arr = np.asarray(x, dtype=float)
    _check_nan(arr)
    with np.errstate(divide="ignore", over="ignore"):
        pos = _LOG_HALF + np.log(erfcx(np.abs(arr) / _SQRT2)) - 0.5 * arr * arr
        # for x <= 0, Q(x) = 1 - Q(|x|) with Q(|x|) <= 1/2: log1p is exact enough
        neg = np.log1p(-0.5 * erfc(np.abs(arr) / _SQRT2))
    out = np.where(arr > 0, pos, neg)
    out = np.where(np.isposinf(arr), -np.inf, out)
    out = np.where(np.isneginf(arr), 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def log_q_tail_complement(x):
    """log(1 - Q(x)) = log Q(-x)."""
    return log_q_tail(-np.asarray(x, dtype=float))


def normal_pdf(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    return float(out) if out.ndim == 0 else out


def energy(v) -> float:
    """Sum of squares of ``v`` (exactly rounded, so order cannot matter)."""
    return math.fsum(float(t) * float(t) for t in v)


@dataclass(frozen=True)
class RngStream:
    """Immutable descriptor of a reproducible random stream.

    The stream is a Philox4x64 counter-based generator keyed through
    ``numpy.random.SeedSequence(seed, spawn_key=(stream_index, lane))``.
    Equal descriptors always produce equal draws, independent of the order
    in which streams are consumed. ``lane`` separates the several vectors a
    single trial needs (forward noise, feedback noise, ...).
    """

    seed: int
    stream_index: int = 0
    lane: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_index", "lane"):
            v = getattr(self, name)
            if not (0 <= int(v) < 2**64):
                raise DomainError(f"{name} must fit in an unsigned 64-bit integer")

    def with_lane(self, lane: int) -> "RngStream":
        return RngStream(self.seed, self.stream_index, lane)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed),
                                    spawn_key=(int(self.stream_index), int(self.lane)))
        return np.random.Generator(np.random.Philox(ss))


def draw_gaussian_vector(rng: RngStream, mean: float, variance: float, length: int,
                         injected=None) -> np.ndarray:
    """``length`` i.i.d. N(mean, variance) draws from ``rng``.

    ``injected`` bypasses the generator entirely and is returned (as a float
    array) after a length check; trace tests use it to pin noise exactly.
    """
    if not variance > 0:
        raise DomainError(f"variance must be positive, got {variance}")
    if length < 0:
        raise DomainError("length must be nonnegative")
    if injected is not None:
        arr = np.asarray(injected, dtype=float)
        if arr.shape != (length,):
            raise DomainError(f"injected noise must have shape ({length},), got {arr.shape}")
        return arr.copy()
    if length == 0:
        return np.zeros(0)
    g = rng.generator()
    return mean + math.sqrt(variance) * g.standard_normal(length)
