"""Closed-form error exponents (nats per channel use) and slope fitting.

Every Gaussian bound depends on the links only through P/sigma^2 and
P_FB/sigma_FB^2. Bounds tagged ``Converse`` are upper bounds on the best
exponent; ``Achievable`` ones are exponents that a concrete scheme attains.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .gaussian import ChannelParams


class BoundKind(str, enum.Enum):
    ACHIEVABLE = "Achievable"
    CONVERSE = "Converse"


class Regime(str, enum.Enum):
    ALMOST_SURE = "AlmostSure"
    EXPECTED = "Expected"
    PASSIVE = "Passive"
    BSC = "BSC"


@dataclass(frozen=True)
class ExponentBound:
    value: float
    kind: BoundKind
    regime: Regime
    label: str

    def __post_init__(self):
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise DomainError(f"{self.label}: exponent must be finite and >= 0, got {self.value}")

    def as_dict(self) -> dict:
        return {"label": self.label, "value": self.value, "kind": self.kind.value,
                "regime": self.regime.value}


def _fb_converse_term(params: ChannelParams) -> float:
    return 2 * math.sqrt((params.p_fb + params.sigma2_fb) * params.p_fb) / params.sigma2_fb


def _check_delta(delta):
    if delta is not None and not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def achievable_as(params: ChannelParams, delta: Optional[float] = None) -> ExponentBound:
    """Almost-sure feedback constraint; ``delta=None`` is the delta -> 0 limit."""
    _check_delta(delta)
    d = 0.0 if delta is None else delta
    v = params.snr_fwd / 2 + (2 - d) ** 2 * params.snr_fb / 2
    label = "achievable_as" if delta is None else f"achievable_as(delta={delta:g})"
    return ExponentBound(v, BoundKind.ACHIEVABLE, Regime.ALMOST_SURE, label)


def converse_as(params: ChannelParams) -> ExponentBound:
    v = params.snr_fwd / 2 + _fb_converse_term(params)
    return ExponentBound(v, BoundKind.CONVERSE, Regime.ALMOST_SURE, "converse_as")


def rate_converse_as(params: ChannelParams, e_nofb_at_r: float) -> ExponentBound:
    """Converse at a positive rate, given the no-feedback reliability E_NoFB(R)."""
    if not (e_nofb_at_r >= 0 and math.isfinite(e_nofb_at_r)):
        raise DomainError("e_nofb_at_r must be finite and >= 0")
    v = e_nofb_at_r + _fb_converse_term(params)
    return ExponentBound(v, BoundKind.CONVERSE, Regime.ALMOST_SURE, "rate_converse_as")


def achievable_expected(params: ChannelParams,
                        delta_fb_power: Optional[float] = None) -> ExponentBound:
    """Expected-power regime; ``delta_fb_power=None`` is the Delta -> 0 limit."""
    d = 0.0
    if delta_fb_power is not None:
        if not 0 < delta_fb_power < min(params.p_fwd, params.p_fb):
            raise DomainError("delta_fb_power must lie in (0, min(P, P_FB))")
        d = delta_fb_power
    v = (2 * params.p_fwd - d) / params.sigma2_fwd + (2 * params.p_fb - d) / params.sigma2_fb
    label = ("achievable_expected" if delta_fb_power is None
             else f"achievable_expected(Delta={delta_fb_power:g})")
    return ExponentBound(v, BoundKind.ACHIEVABLE, Regime.EXPECTED, label)


def converse_expected_simple(params: ChannelParams) -> ExponentBound:
    f = (math.sqrt(params.p_fwd + params.sigma2_fwd) + math.sqrt(params.p_fwd)) ** 2
    b = (math.sqrt(params.p_fb + params.sigma2_fb) + math.sqrt(params.p_fb)) ** 2
    v = f / params.sigma2_fwd + b / params.sigma2_fb
    return ExponentBound(v, BoundKind.CONVERSE, Regime.EXPECTED, "converse_expected_simple")


def passive_feedback_bound(params: ChannelParams, loose: bool = False) -> ExponentBound:
    """Upper bound on the exponent with passive (symbol-by-symbol) feedback."""
    p, s2 = params.p_fwd, params.sigma2_fwd
    factor = 1.0 if loose else p / (p + s2)
    v = 0.5 * (params.snr_fwd + factor * params.snr_fb)
    label = "passive_loose" if loose else "passive"
    return ExponentBound(v, BoundKind.CONVERSE, Regime.PASSIVE, label)


def bsc_bounds(eps: float, eps_fb: float,
               e_nofb_at_r: float = 0.0) -> Tuple[ExponentBound, ExponentBound]:
    """(noisy active feedback converse, perfect-feedback two-codeword exponent)."""
    for name, v in (("eps", eps), ("eps_fb", eps_fb)):
        if not 0 < v <= 0.5:
            raise DomainError(f"{name} must lie in (0, 1/2], got {v}")
    if not (e_nofb_at_r >= 0 and math.isfinite(e_nofb_at_r)):
        raise DomainError("e_nofb_at_r must be finite and >= 0")
    active = math.log((1 - eps_fb) / eps_fb) + e_nofb_at_r
    # 4 eps (1 - eps) rounds to 1 at eps = 1/2; the exponent is exactly 0 there
    two_codeword = max(0.0, -0.5 * math.log(4 * eps * (1 - eps)))
    return (ExponentBound(active, BoundKind.CONVERSE, Regime.BSC, "bsc_active_feedback"),
            ExponentBound(two_codeword, BoundKind.CONVERSE, Regime.BSC, "bsc_two_codeword"))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float

    def as_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2}


def fit_exponent_slope(points: Iterable[Sequence[float]]) -> SlopeFit:
    """Least-squares line through (n, -log pe); the slope is the empirical exponent."""
    pts = [(float(n), float(lp)) for n, lp in points]
    if len(pts) < 3:
        raise DomainError("need at least 3 points")
    ns = np.array([p[0] for p in pts])
    ys = -np.array([p[1] for p in pts])
    if not np.all(np.isfinite(ys)) or not np.all(np.isfinite(ns)):
        raise DomainError("log_pe values must be finite")
    if len(set(ns.tolist())) != len(ns):
        raise DomainError("n values must be distinct")
    # center n so that n ~ 1e5 does not cost precision in the normal equations
    nc = ns - ns.mean()
    slope = float(nc @ (ys - ys.mean()) / (nc @ nc))
    intercept = float(ys.mean() - slope * ns.mean())
    resid = ys - (intercept + slope * ns)
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(resid @ resid) / ss_tot
    return SlopeFit(slope, intercept, r2)


def all_bounds(params: ChannelParams, fb_budget="symmetric") -> list:
    """Every Gaussian bound for ``params``, in a fixed order."""
    from .tight import converse_expected_tight

    return [
        achievable_as(params),
        converse_as(params),
        achievable_expected(params),
        converse_expected_simple(params),
        converse_expected_tight(params, fb_budget),
        passive_feedback_bound(params),
        passive_feedback_bound(params, loose=True),
    ]
