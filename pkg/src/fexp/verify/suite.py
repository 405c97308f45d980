"""Randomized bound-verification suite and MC-vs-oracle agreement checks,
aggregated into one JSON-ready report."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..gaussian import ChannelParams
from ..schemes import SchemeConfig, estimate_error
from ..schemes.estimate import oracle_error
from .density import MAX_TILTED_N, max_tilted_density, product_bound_margin
from .lemmas import MARGIN_TOL, joint_floor_margin, quadrature_lemma_checks_n1
from .toy import MAX_N, ToyEncoders, TypicalSetParams

TILTED_REL_TOL = 1e-6


@dataclass(frozen=True)
class SuiteSize:
    tilted: int = 1000
    product: int = 100_000
    joint_floor_encoders: int = 10
    joint_floor_pairs: int = 10_000
    quadrature_encoders: int = 5

    @classmethod
    def quick(cls) -> "SuiteSize":
        return cls(100, 2000, 3, 600, 1)


def _random_fb(rng):
    return float(rng.uniform(0.1, 5.0)), float(rng.uniform(0.2, 5.0))


def tilted_density_check(rng: np.random.Generator, count: int) -> dict:
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(1, MAX_TILTED_N + 1))
        p_fb, s2 = _random_fb(rng)
        z = rng.normal(0, rng.uniform(0.1, 3) * math.sqrt(s2 + p_fb), n)
        closed, numeric = max_tilted_density(z, p_fb, s2)
        worst = max(worst, abs(closed - numeric) / closed)
    return {"passed": bool(worst <= TILTED_REL_TOL), "points": count, "max_rel_diff": worst}


def product_bound_check(rng: np.random.Generator, count: int) -> dict:
    worst = math.inf
    for i in range(count):
        n = int(rng.integers(1, 9))
        p_fb, s2 = _random_fb(rng)
        z = rng.normal(0, rng.uniform(0.1, 3) * math.sqrt(s2 + p_fb), n)
        if i % 10 == 0 and np.linalg.norm(z) > 0:
            # Cauchy-Schwarz equality case: anti-aligned at full power
            u = -z * math.sqrt(n * p_fb) / np.linalg.norm(z)
        else:
            d = rng.normal(size=n)
            u = d / np.linalg.norm(d) * math.sqrt(n * p_fb) * rng.uniform() ** (1 / n)
        worst = min(worst, product_bound_margin(z, u, p_fb, s2))
    return {"passed": bool(worst >= -MARGIN_TOL), "points": count, "min_margin": float(worst)}


def _member_pairs(rng, enc, ts, want, max_draws=200_000):
    n = enc.n
    ys, zs, drawn = [], [], 0
    while sum(len(v) for v in ys) < want and drawn < max_draws:
        y = rng.uniform(-ts.alpha1, ts.alpha1, (4096, n))
        z = rng.uniform(-ts.beta1, ts.beta1, (4096, n))
        keep = ts.in_ty(enc, y) & ts.in_tz0(enc, z)
        ys.append(y[keep])
        zs.append(z[keep])
        drawn += 4096
    y, z = np.concatenate(ys)[:want], np.concatenate(zs)[:want]
    return y, z


def joint_floor_check(rng: np.random.Generator, encoders: int, pairs: int) -> dict:
    per = pairs // encoders
    worst, checked, skipped = math.inf, 0, 0
    while checked < per * encoders:
        n = int(rng.integers(1, MAX_N + 1))
        p_fb = float(rng.uniform(0.2, 4))
        enc = ToyEncoders.random(n, rng, fb_power=p_fb)
        ts = TypicalSetParams(rng.uniform(0.3, 3), rng.uniform(0.2, 1.5) * math.sqrt(p_fb),
                              rng.uniform(0.3, 3), rng.uniform(0.5, 4))
        s2, s2fb = rng.uniform(0.2, 4, 2)
        y, z = _member_pairs(rng, enc, ts, per)
        if len(y) < per:
            skipped += 1  # typical sets too thin for this draw; try another encoder
            continue
        for a, b in zip(y, z):
            worst = min(worst, joint_floor_margin(enc, ts, a, b, s2, s2fb))
        checked += per
    return {"passed": bool(worst >= -MARGIN_TOL), "points": checked, "encoders": encoders,
            "min_margin": float(worst), "encoders_resampled": skipped}


def quadrature_check(rng: np.random.Generator, encoders: int) -> dict:
    runs = []
    for _ in range(encoders):
        p = ChannelParams(*rng.uniform(0.3, 3, 4))
        enc = ToyEncoders.random(1, rng, fb_power=p.p_fb)
        x0 = abs(float(enc.forward(0, np.zeros(1))[0]))
        ts = TypicalSetParams(rng.uniform(0.5, 3), rng.uniform(0.2, 1.2) * math.sqrt(p.p_fb),
                              rng.uniform(0.5, 3), x0 + rng.uniform(0.1, 2))
        runs.append({"params": [p.p_fwd, p.sigma2_fwd, p.p_fb, p.sigma2_fb],
                     "typical_set": vars(ts), **quadrature_lemma_checks_n1(enc, p, ts)})
    return {"passed": all(r["all_passed"] for r in runs), "runs": runs}


# pe in [1e-4, 1e-2] at all-ones parameters
MC_CASES = (
    SchemeConfig("NoFeedback", 9),
    SchemeConfig("AsScheme", 10, 0.3),
    SchemeConfig("BuildingBlock", 21, 0.5, delta_fb_power=0.01),
    SchemeConfig("ThreePhase", 35, 0.4, delta_fb_power=0.05),
)


def mc_agreement_check(seed: int, trials: int) -> dict:
    params = ChannelParams(1.0, 1.0, 1.0, 1.0)
    rows = []
    for cfg in MC_CASES:
        est = estimate_error(cfg, params, trials, seed)
        p = oracle_error(params, cfg)
        rows.append({"scheme": cfg.scheme_kind.value, "n": cfg.n, "oracle": p,
                     "p_hat": est.p_hat, "within_3se": bool(est.within(p))})
    return {"passed": all(r["within_3se"] for r in rows), "trials": trials, "seed": seed,
            "cases": rows}


def run_bound_suite(seed: int = 0, size: SuiteSize = SuiteSize()) -> dict:
    rng = np.random.default_rng(seed)
    checks = {
        "tilted_density": tilted_density_check(rng, size.tilted),
        "product_lower_bound": product_bound_check(rng, size.product),
        "joint_density_floor": joint_floor_check(rng, size.joint_floor_encoders, size.joint_floor_pairs),
        "quadrature_n1": quadrature_check(rng, size.quadrature_encoders),
    }
    return {"seed": seed, "checks": checks, "passed": all(c["passed"] for c in checks.values())}
