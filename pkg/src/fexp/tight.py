"""The optimized converse under expected power constraints.

For a power split (P0, P1, PFB0, PFB1) the bound for H = 1 is

    E1 = inf (a1 sqrt(P1 + s2) + b2 sqrt(P0))^2 / (2 s2)
             + (b1 sqrt(PFB0 + t2) + a2 sqrt(PFB1))^2 / (2 t2)

over slack parameters with 1/a1^2 + 1/a2^2 <= 1 and 1/b1^2 + 1/b2^2 <= 1
(E0 swaps the roles of the two hypotheses), and the converse is the sup over
splits of min(E1, E0).

The objective grows in every slack parameter, so both constraints are
active and a1 = sec(ta), a2 = csc(ta), b1 = csc(tb), b2 = sec(tb) with
(ta, tb) in (0, pi/2)^2. In these angles the objective is

    (A sec ta + B sec tb)^2 / (2 s2) + (C csc tb + D csc ta)^2 / (2 t2),

a strictly convex function (A, C > 0). Each infimum is seeded on a uniform
angle grid and polished by damped Newton steps with analytic derivatives.
The outer sup runs on a zoom grid over the split fractions, with the
constraints active since every term grows with power.

Tolerances are fixed: Newton stops once the predicted decrease of a full
step is below 1e-14 of the value, and
the outer zoom stops when the split window is below 1e-9.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .errors import DomainError, NumericalError
from .exponents import BoundKind, ExponentBound, Regime, converse_expected_simple
from .gaussian import ChannelParams

HALF_PI = math.pi / 2
EDGE = 1e-12
FINAL_GRID = 201
SEARCH_GRID = 9
NEWTON_DECREMENT_TOL = 1e-14
NEWTON_MAX_ITER = 100
OUTER_GRID = 9
OUTER_WINDOW_TOL = 1e-9


class FbBudget(str, enum.Enum):
    """Bound on PFB0 + PFB1: twice the feedback power, or the feedback power itself."""

    SYMMETRIC = "symmetric"
    LITERAL = "literal"

    def total(self, params: ChannelParams) -> float:
        return (2.0 if self is FbBudget.SYMMETRIC else 1.0) * params.p_fb


@dataclass(frozen=True)
class PowerSplit:
    p0: float
    p1: float
    pfb0: float
    pfb1: float

    def __post_init__(self):
        if min(self.p0, self.p1, self.pfb0, self.pfb1) < 0:
            raise DomainError("split powers must be nonnegative")

    def check(self, params: ChannelParams, budget: FbBudget = FbBudget.SYMMETRIC) -> None:
        slack = 1e-12 * (1 + params.p_fwd + params.p_fb)
        if self.p0 + self.p1 > 2 * params.p_fwd + slack:
            raise DomainError("forward split exceeds 2P")
        if self.pfb0 + self.pfb1 > budget.total(params) + slack:
            raise DomainError(f"feedback split exceeds the {budget.value} budget")

    @classmethod
    def from_fractions(cls, params: ChannelParams, s: float, t: float,
                       budget: FbBudget = FbBudget.SYMMETRIC) -> "PowerSplit":
        """Split with both constraints active: P0 = 2P s, PFB0 = budget * t."""
        tot = budget.total(params)
        return cls(2 * params.p_fwd * s, 2 * params.p_fwd * (1 - s), tot * t, tot * (1 - t))

    def swapped(self) -> "PowerSplit":
        return PowerSplit(self.p1, self.p0, self.pfb1, self.pfb0)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class SlackParams:
    a1: float
    a2: float
    b1: float
    b2: float

    def __post_init__(self):
        if min(self.a1, self.a2, self.b1, self.b2) <= 0:
            raise DomainError("slack parameters must be positive")
        tol = 1e-12
        if 1 / self.a1 ** 2 + 1 / self.a2 ** 2 > 1 + tol:
            raise DomainError("need 1/a1^2 + 1/a2^2 <= 1")
        if 1 / self.b1 ** 2 + 1 / self.b2 ** 2 > 1 + tol:
            raise DomainError("need 1/b1^2 + 1/b2^2 <= 1")

    @classmethod
    def from_angles(cls, theta_a: float, theta_b: float) -> "SlackParams":
        return cls(1 / math.cos(theta_a), 1 / math.sin(theta_a),
                   1 / math.sin(theta_b), 1 / math.cos(theta_b))

    def as_dict(self) -> dict:
        return dict(self.__dict__)


SUBOPTIMAL_SLACK = SlackParams(math.sqrt(2), math.sqrt(2), math.sqrt(2), math.sqrt(2))


def _coefficients(params: ChannelParams, split: PowerSplit, hypothesis: int):
    """(A, B, C, D) of the angle form; hypothesis 0 swaps the split."""
    sp = split if hypothesis == 1 else split.swapped()
    return (math.sqrt(sp.p1 + params.sigma2_fwd), math.sqrt(sp.p0),
            math.sqrt(sp.pfb0 + params.sigma2_fb), math.sqrt(sp.pfb1))


def slack_objective(params: ChannelParams, split: PowerSplit, slack: SlackParams,
                    hypothesis: int = 1) -> float:
    """The bound for a fixed split and fixed slack parameters."""
    a, b, c, d = _coefficients(params, split, hypothesis)
    f = slack.a1 * a + slack.b2 * b
    g = slack.b1 * c + slack.a2 * d
    return f * f / (2 * params.sigma2_fwd) + g * g / (2 * params.sigma2_fb)


def suboptimal_value(params: ChannelParams, split: PowerSplit, hypothesis: int = 1) -> float:
    """Closed form of the bound at a1 = a2 = b1 = b2 = sqrt 2."""
    sp = split if hypothesis == 1 else split.swapped()
    f = math.sqrt(sp.p1 + params.sigma2_fwd) + math.sqrt(sp.p0)
    g = math.sqrt(sp.pfb0 + params.sigma2_fb) + math.sqrt(sp.pfb1)
    return f * f / params.sigma2_fwd + g * g / params.sigma2_fb


# ---------------------------------------------------------------- inner solve

def _angle_objective(ta, tb, a, b, c, d, s2, t2):
    f = a / np.cos(ta) + b / np.cos(tb)
    g = c / np.sin(tb) + d / np.sin(ta)
    return f * f / (2 * s2) + g * g / (2 * t2)


def _newton(ta, tb, a, b, c, d, s2, t2):
    """Damped Newton on the convex angle objective, vectorized over a batch."""
    val = _angle_objective(ta, tb, a, b, c, d, s2, t2)
    stalled = np.zeros(ta.shape, bool)
    for _ in range(NEWTON_MAX_ITER):
        sa, sb = 1 / np.cos(ta), 1 / np.cos(tb)
        ca, cb = 1 / np.sin(ta), 1 / np.sin(tb)
        tna, tnb = np.tan(ta), np.tan(tb)
        cta, ctb = 1 / tna, 1 / tnb
        f = a * sa + b * sb
        g = c * cb + d * ca
        fa, fb = a * sa * tna, b * sb * tnb
        ga, gb = -d * ca * cta, -c * cb * ctb
        faa = a * sa * (tna ** 2 + sa ** 2)
        fbb = b * sb * (tnb ** 2 + sb ** 2)
        gaa = d * ca * (cta ** 2 + ca ** 2)
        gbb = c * cb * (ctb ** 2 + cb ** 2)
        da = f * fa / s2 + g * ga / t2
        db = f * fb / s2 + g * gb / t2
        haa = (fa * fa + f * faa) / s2 + (ga * ga + g * gaa) / t2
        hbb = (fb * fb + f * fbb) / s2 + (gb * gb + g * gbb) / t2
        hab = fa * fb / s2 + ga * gb / t2
        det = haa * hbb - hab * hab
        ok = det > 0
        safe = np.where(ok, det, 1.0)
        # fall back to a scaled gradient step if the Hessian is numerically singular
        step_a = np.where(ok, (hbb * da - hab * db) / safe, da / np.maximum(haa, 1e-300))
        step_b = np.where(ok, (haa * db - hab * da) / safe, db / np.maximum(hbb, 1e-300))
        # Newton decrement: predicted decrease of the value from a full step
        dec = da * step_a + db * step_b
        active = ~stalled & (dec > NEWTON_DECREMENT_TOL * val)
        if not active.any():
            break
        lam = np.ones_like(ta)
        pending = active.copy()
        for _ in range(40):
            na = np.clip(ta - lam * step_a, EDGE, HALF_PI - EDGE)
            nb = np.clip(tb - lam * step_b, EDGE, HALF_PI - EDGE)
            nv = _angle_objective(na, nb, a, b, c, d, s2, t2)
            better = pending & (nv < val)
            ta = np.where(better, na, ta)
            tb = np.where(better, nb, tb)
            val = np.where(better, nv, val)
            pending &= ~better
            if not pending.any():
                break
            lam = np.where(pending, lam * 0.5, lam)
        # no descent along the clipped step: the minimizer sits on the box edge
        stalled |= pending
    return val, ta, tb


def _inner_batch(a, b, c, d, s2, t2, grid):
    a, b, c, d = (np.asarray(v, dtype=float).reshape(-1) for v in (a, b, c, d))
    th = (np.arange(grid) + 0.5) / grid * HALF_PI
    ga, gb = np.meshgrid(th, th, indexing="ij")
    vals = _angle_objective(ga.reshape(1, -1), gb.reshape(1, -1), a[:, None], b[:, None],
                            c[:, None], d[:, None], s2, t2)
    k = vals.argmin(axis=1)
    ta, tb = ga.reshape(-1)[k], gb.reshape(-1)[k]
    val, ta, tb = _newton(ta, tb, a, b, c, d, s2, t2)
    if not np.all(np.isfinite(val)):
        raise NumericalError("inner infimum did not converge",
                             {"a": a.tolist(), "b": b.tolist(), "c": c.tolist(), "d": d.tolist()})
    return val, ta, tb


def inner_infimum(params: ChannelParams, split: PowerSplit, hypothesis: int = 1,
                  grid: int = FINAL_GRID) -> Tuple[float, SlackParams]:
    """Infimum over slack parameters for one hypothesis, and its minimizer."""
    a, b, c, d = _coefficients(params, split, hypothesis)
    val, ta, tb = _inner_batch(a, b, c, d, params.sigma2_fwd, params.sigma2_fb, grid)
    return float(val[0]), SlackParams.from_angles(float(ta[0]), float(tb[0]))


# ---------------------------------------------------------------- outer solve

def _split_values(params: ChannelParams, s, t, budget: FbBudget, grid: int):
    """min(E1, E0) at fractional splits (s, t); arrays in, array out."""
    tot = budget.total(params)
    p0, p1 = 2 * params.p_fwd * s, 2 * params.p_fwd * (1 - s)
    f0, f1 = tot * t, tot * (1 - t)
    s2, t2 = params.sigma2_fwd, params.sigma2_fb
    a = np.concatenate([np.sqrt(p1 + s2), np.sqrt(p0 + s2)])
    b = np.concatenate([np.sqrt(p0), np.sqrt(p1)])
    c = np.concatenate([np.sqrt(f0 + t2), np.sqrt(f1 + t2)])
    d = np.concatenate([np.sqrt(f1), np.sqrt(f0)])
    val, _, _ = _inner_batch(a, b, c, d, s2, t2, grid)
    k = len(s)
    return np.minimum(val[:k], val[k:])


def _zoom_max(fn: Callable, lo=(0.0, 0.0), hi=(1.0, 1.0)):
    """Maximize fn over a box by repeated grid refinement around the incumbent."""
    best_v, best = -math.inf, (0.5, 0.5)
    lo, hi = np.array(lo, float), np.array(hi, float)
    box_lo, box_hi = lo.copy(), hi.copy()
    while True:
        gs = np.linspace(lo[0], hi[0], OUTER_GRID)
        gt = np.linspace(lo[1], hi[1], OUTER_GRID)
        S, T = np.meshgrid(gs, gt, indexing="ij")
        s, t = S.reshape(-1), T.reshape(-1)
        v = fn(s, t)
        i = int(np.argmax(v))
        if v[i] >= best_v:
            best_v, best = float(v[i]), (float(s[i]), float(t[i]))
        width = hi - lo
        if width.max() < OUTER_WINDOW_TOL:
            return best_v, best
        cell = width / (OUTER_GRID - 1)
        centre = np.array(best)
        lo = np.maximum(box_lo, centre - 1.5 * cell)
        hi = np.minimum(box_hi, centre + 1.5 * cell)


@dataclass(frozen=True)
class TightResult:
    value: float
    split: PowerSplit
    e1: float
    e0: float
    slack1: SlackParams
    slack0: SlackParams
    budget: FbBudget

    def as_dict(self) -> dict:
        return {"value": self.value, "split": self.split.as_dict(), "e1": self.e1,
                "e0": self.e0, "slack1": self.slack1.as_dict(),
                "slack0": self.slack0.as_dict(), "budget": self.budget.value}


def optimize_tight(params: ChannelParams, fb_budget="symmetric") -> TightResult:
    """Sup over power splits of min(E1, E0), with the optimizing split and slacks."""
    budget = FbBudget(fb_budget)

    def coarse(s, t):
        # always include the symmetric split, which is optimal in every case seen
        return _split_values(params, s, t, budget, SEARCH_GRID)

    _, (s, t) = _zoom_max(coarse)
    centre = PowerSplit.from_fractions(params, 0.5, 0.5, budget)
    cand = PowerSplit.from_fractions(params, s, t, budget)
    results = []
    for split in (centre, cand):
        e1, k1 = inner_infimum(params, split, 1)
        e0, k0 = inner_infimum(params, split, 0)
        results.append(TightResult(min(e1, e0), split, e1, e0, k1, k0, budget))
    return max(results, key=lambda r: r.value)


def converse_expected_tight(params: ChannelParams, fb_budget="symmetric") -> ExponentBound:
    r = optimize_tight(params, fb_budget)
    label = "converse_expected_tight"
    if r.budget is FbBudget.LITERAL:
        label += "(literal_fb_budget)"
    return ExponentBound(r.value, BoundKind.CONVERSE, Regime.EXPECTED, label)


def suboptimal_sup(params: ChannelParams, fb_budget="symmetric") -> Tuple[float, PowerSplit]:
    """Sup over splits of min(E1, E0) with every slack parameter fixed at sqrt 2."""
    budget = FbBudget(fb_budget)
    tot = budget.total(params)
    s2, t2 = params.sigma2_fwd, params.sigma2_fb

    def fn(s, t):
        p0, p1 = 2 * params.p_fwd * s, 2 * params.p_fwd * (1 - s)
        f0, f1 = tot * t, tot * (1 - t)
        e1 = ((np.sqrt(p1 + s2) + np.sqrt(p0)) ** 2 / s2
              + (np.sqrt(f0 + t2) + np.sqrt(f1)) ** 2 / t2)
        e0 = ((np.sqrt(p0 + s2) + np.sqrt(p1)) ** 2 / s2
              + (np.sqrt(f1 + t2) + np.sqrt(f0)) ** 2 / t2)
        return np.minimum(e1, e0)

    v, (s, t) = _zoom_max(fn)
    return v, PowerSplit.from_fractions(params, s, t, budget)


def sandwich(params: ChannelParams) -> Tuple[float, float]:
    """[half, full] of the simple expected-regime converse."""
    hi = converse_expected_simple(params).value
    return 0.5 * hi, hi
