"""Pointwise and quadrature checks of the density inequalities behind the
expected-power converse.

Every check is an inequality LHS >= RHS, evaluated as a log-domain margin
log LHS - log RHS; a margin above -MARGIN_TOL passes. The tolerance only
absorbs quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

from ..errors import DomainError, NumericalError
from ..gaussian import ChannelParams
from .density import LOG_2PI, log_max_tilted_density, log_r_lower_bound
from .toy import ToyEncoders, TypicalSetParams

MARGIN_TOL = 1e-9
QUAD_EPSREL = 1e-8
# integration half-width in standard deviations; the Gaussian mass beyond is < 1e-300
SPAN = 38.0
GRID_POINTS = 120


@dataclass(frozen=True)
class PointCheck:
    member: bool
    holds: Optional[bool]   # None when the pair lies outside the typical sets
    margin: float


def joint_floor_margin(enc: ToyEncoders, ts: TypicalSetParams, y, z,
                  sigma2_fwd: float, sigma2_fb: float) -> float:
    n = enc.n
    lhs = float(enc.log_joint(0, y, z, sigma2_fwd, sigma2_fb))
    rhs = (-0.5 * n * (2 * LOG_2PI + math.log(sigma2_fwd) + math.log(sigma2_fb))
           - n * ts.log_exponent(sigma2_fwd, sigma2_fb))
    return lhs - rhs


def check_lemma3_pointwise(enc: ToyEncoders, ts: TypicalSetParams, y, z,
                           sigma2_fwd: float, sigma2_fb: float) -> PointCheck:
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.shape != (enc.n,) or z.shape != (enc.n,):
        raise DomainError("y and z must be length-n vectors")
    if not (bool(ts.in_ty(enc, y)) and bool(ts.in_tz0(enc, z))):
        return PointCheck(False, None, math.nan)
    m = joint_floor_margin(enc, ts, y, z, sigma2_fwd, sigma2_fb)
    return PointCheck(True, m >= -MARGIN_TOL, m)


# ---------------------------------------------------------------- n = 1

def _quad(fn: Callable[[float], float], a: float, b: float,
          points: Sequence[float] = (), what: str = "") -> float:
    pts = sorted(p for p in set(points) if a < p < b)
    val, err, info, *rest = quad(fn, a, b, points=pts or None, epsabs=0.0,
                                 epsrel=QUAD_EPSREL, limit=200, full_output=1)
    if rest:  # quad appends a message only when it warns
        raise NumericalError(f"quadrature did not converge ({what})",
                             {"interval": [a, b], "value": val, "abs_err": err,
                              "neval": info["neval"], "message": rest[0]})
    return val


def _gauss(x, mean, s2):
    return math.exp(-(x - mean) ** 2 / (2 * s2)) / math.sqrt(2 * math.pi * s2)


class _N1:
    """Marginals of a blocklength-1 toy code, each computed by adaptive quadrature."""

    def __init__(self, enc: ToyEncoders, params: ChannelParams):
        if enc.n != 1:
            raise DomainError("quadrature checks need n = 1")
        self.enc = enc
        self.s2 = params.sigma2_fwd
        self.s2fb = params.sigma2_fb
        self.x = [float(enc.forward(nu, np.zeros(1))[0]) for nu in (0, 1)]
        w = float(enc.fb_weight[0, 0])
        c = math.sqrt(enc.fb_power)
        # kinks of g(y) = clip(w y, -c, c)
        self.kinks = [] if w == 0 else [-c / w, c / w]

    def g(self, y: float) -> float:
        return float(self.enc.feedback(np.array([y]))[0])

    def joint(self, nu: int, y: float, z: float) -> float:
        return _gauss(y, self.x[nu], self.s2) * _gauss(z, self.g(y), self.s2fb)

    def p_y(self, nu: int, y: float) -> float:
        gy = self.g(y)
        h = SPAN * math.sqrt(self.s2fb)
        return _quad(lambda z: self.joint(nu, y, z), gy - h, gy + h, [gy], f"p{nu}(y={y})")

    def p_z(self, nu: int, z: float) -> float:
        x = self.x[nu]
        h = SPAN * math.sqrt(self.s2)
        return _quad(lambda y: self.joint(nu, y, z), x - h, x + h, [x, *self.kinks],
                     f"p{nu}(z={z})")

    def prob_y(self, nu: int, a: float, b: float) -> float:
        """P_nu(a < Y < b), integrating the quadrature marginal."""
        return _quad(lambda y: self.p_y(nu, y), a, b, [self.x[nu], *self.kinks],
                     f"P{nu}({a}<Y<{b})")

    def prob_tz0(self, ts: TypicalSetParams) -> float:
        """P_0(Z in T_z0); the z-integral over (-beta1, beta1) is done in closed form."""
        if self.x[0] ** 2 >= ts.beta2 ** 2:
            return 0.0
        sd = math.sqrt(self.s2fb)
        x = self.x[0]
        h = SPAN * math.sqrt(self.s2)

        def mass(y):
            gy = self.g(y)
            return _gauss(y, x, self.s2) * (ndtr((ts.beta1 - gy) / sd) - ndtr((-ts.beta1 - gy) / sd))
        return _quad(mass, x - h, x + h, [x, *self.kinks], "P0(Z in Tz0)")

    def ty_radius(self, ts: TypicalSetParams) -> float:
        """T_y at n = 1 is the interval |y| < radius."""
        r = ts.alpha1
        w = abs(float(self.enc.fb_weight[0, 0]))
        if ts.alpha2 <= math.sqrt(self.enc.fb_power) and w > 0:
            r = min(r, ts.alpha2 / w)
        return r


def _summary(margins, grid) -> dict:
    m = np.asarray(margins, dtype=float)
    return {"passed": bool(np.all(m >= -MARGIN_TOL)), "points": int(m.size),
            "min_margin": float(m.min()), "grid": [float(grid[0]), float(grid[-1])]}


def _log(v: float) -> float:
    return math.log(v) if v > 0 else -math.inf


def quadrature_lemma_checks_n1(enc: ToyEncoders, params: ChannelParams,
                               ts: TypicalSetParams, points: int = GRID_POINTS) -> dict:
    """Density peak and floor bounds, the likelihood-ratio floor and the error-mass
    transfer, all checked by quadrature at n = 1."""
    if points < 100:
        raise DomainError("use at least 100 grid points")
    if abs(params.p_fb - enc.fb_power) > 1e-12 * max(1.0, params.p_fb):
        raise DomainError("encoder fb_power must equal params.p_fb")
    m = _N1(enc, params)
    s2, s2fb = m.s2, m.s2fb
    sd, sdfb = math.sqrt(s2), math.sqrt(s2fb)
    k = ts.log_exponent(s2, s2fb)
    log_pt = _log(m.prob_tz0(ts))
    report = {}

    ygrid = np.linspace(min(m.x) - 8 * sd, max(m.x) + 8 * sd, points)
    ygrid = np.sort(np.append(ygrid, m.x[1]))  # the peak makes the bound tight
    report["p1y_peak_bound"] = _summary(
        [-0.5 * (LOG_2PI + math.log(s2)) - _log(m.p_y(1, y)) for y in ygrid], ygrid)

    zgrid = np.linspace(-8 * sdfb - 2 * math.sqrt(params.p_fb),
                        8 * sdfb + 2 * math.sqrt(params.p_fb), points)
    p0z = [m.p_z(0, z) for z in zgrid]
    p1z = [m.p_z(1, z) for z in zgrid]
    report["p0z_peak_bound"] = _summary(
        [-0.5 * (LOG_2PI + math.log(s2fb)) - _log(v) for v in p0z], zgrid)
    report["marginal_pz_bound"] = _summary(
        [log_max_tilted_density([z], params.p_fb, s2fb) - _log(0.5 * (a + b))
         for z, a, b in zip(zgrid, p0z, p1z)], zgrid)

    r = m.ty_radius(ts)
    tgrid = np.linspace(-r, r, points + 2)[1:-1]
    if not np.all(ts.in_ty(enc, tgrid[:, None])):
        raise NumericalError("T_y grid left the set", {"radius": r})
    p0y = np.array([m.p_y(0, y) for y in tgrid])
    p1y = np.array([m.p_y(1, y) for y in tgrid])
    floor = -k + log_pt
    report["p0y_lower_bound"] = _summary(
        [_log(v) - (-0.5 * (LOG_2PI + math.log(s2)) + floor) for v in p0y], tgrid)
    report["likelihood_ratio_lower_bound"] = _summary(
        [_log(a) - _log(b) - floor for a, b in zip(p0y, p1y)], tgrid)

    # D_1 = {y < 0}
    lhs = m.prob_y(0, -r, 0.0)
    rhs_mass = m.prob_y(1, -r, 0.0)
    margin6 = float(_log(lhs) - (floor + _log(rhs_mass)))
    report["error_mass_transfer"] = {
        "passed": margin6 >= -MARGIN_TOL, "points": 1, "min_margin": margin6,
        "grid": [-r, 0.0], "p0_mass": lhs, "p1_mass": rhs_mass}

    # p_nu(y, z) >= q_nu(y, z) r(z) with q_nu(y, z) = p(z) w(y | f_nu)
    eq_margins = []
    ys = np.linspace(min(m.x) - 4 * sd, max(m.x) + 4 * sd, 11)
    for z, a, b in zip(zgrid[::max(1, points // 12)], p0z[::max(1, points // 12)],
                       p1z[::max(1, points // 12)]):
        pz = 0.5 * (a + b)
        lr = log_r_lower_bound(abs(z), 1, params.p_fb, s2fb)
        for nu in (0, 1):
            for y in ys:
                q = _gauss(y, m.x[nu], s2) * pz
                eq_margins.append(_log(m.joint(nu, y, z)) - (_log(q) + lr))
    report["ratio_floor_joint"] = _summary(eq_margins, zgrid)
    report["all_passed"] = all(v["passed"] for v in report.values() if isinstance(v, dict))
    return report
