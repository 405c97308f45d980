"""Feedback-density bounds used to compare the true channel with a reference
channel whose feedback output is drawn independently of the hypothesis.

All densities are handled in the log domain; ``(2 pi s2)^(-n/2)`` underflows
for moderate n.
"""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np
from scipy.optimize import minimize

from ..errors import DomainError, NumericalError

LOG_2PI = math.log(2 * math.pi)
# slack on ||u||^2 <= n p_fb so that a full-power u built in floating point
# is not rejected by one ulp
POWER_SLACK = 1e-12
MAX_TILTED_N = 8


def log_gaussian_product(z, u, sigma2: float) -> float:
    """log prod_k w(z_k | u_k) for w = N(u_k, sigma2)."""
    z = np.asarray(z, dtype=float)
    d = z - np.asarray(u, dtype=float)
    return -0.5 * z.size * (LOG_2PI + math.log(sigma2)) - float(d @ d) / (2 * sigma2)


def log_max_tilted_density(z, p_fb: float, sigma2_fb: float) -> float:
    z = np.atleast_1d(np.asarray(z, dtype=float))
    n = z.size
    excess = max(0.0, float(np.linalg.norm(z)) - math.sqrt(n * p_fb))
    return -0.5 * n * (LOG_2PI + math.log(sigma2_fb)) - excess ** 2 / (2 * sigma2_fb)


def _numeric_log_max(z: np.ndarray, p_fb: float, sigma2_fb: float) -> float:
    n = z.size
    cap = n * p_fb
    # maximizing the density is minimizing ||z - u||^2 over the power ball
    res = minimize(lambda u: float((z - u) @ (z - u)), np.zeros(n),
                   jac=lambda u: -2 * (z - u), method="SLSQP",
                   constraints=[{"type": "ineq", "fun": lambda u: cap - float(u @ u),
                                 "jac": lambda u: -2 * u}],
                   options={"ftol": 1e-14, "maxiter": 500})
    u = res.x
    norm2 = float(u @ u)
    if norm2 > cap:
        # SLSQP may stop a hair outside the ball; pull back onto it
        u = u * math.sqrt(cap / norm2)
        norm2 = cap
    # SLSQP often reports a line-search failure at the optimum itself, so
    # convergence is judged by the KKT conditions rather than res.success
    grad = u - z
    scale = 1e-6 * (1 + float(np.linalg.norm(z)))
    if norm2 < cap * (1 - 1e-9):
        ok = float(np.linalg.norm(grad)) <= scale
        lam = 0.0
    else:
        lam = -float(grad @ u) / norm2
        ok = lam >= -1e-9 and float(np.linalg.norm(grad + lam * u)) <= scale
    if not ok:
        raise NumericalError("constrained search over u did not reach a KKT point",
                             {"message": res.message, "z": z.tolist(), "u": u.tolist(),
                              "multiplier": lam})
    return log_gaussian_product(z, u, sigma2_fb)


def max_tilted_density(z, p_fb: float, sigma2_fb: float) -> Tuple[float, float]:
    """(closed form, numeric) for max over ||u||^2 <= n p_fb of prod w_FB(z_k | u_k).

    The numeric value comes from a general constrained search and shares no
    code with the closed form.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if not 1 <= z.size <= MAX_TILTED_N:
        raise DomainError(f"numeric branch supports 1 <= n <= {MAX_TILTED_N}")
    if p_fb < 0 or sigma2_fb <= 0:
        raise DomainError("need p_fb >= 0 and sigma2_fb > 0")
    return (math.exp(log_max_tilted_density(z, p_fb, sigma2_fb)),
            math.exp(_numeric_log_max(z, p_fb, sigma2_fb)))


def product_bound_margin(z, u, p_fb: float, sigma2_fb: float) -> float:
    """log LHS - log RHS of the worst-case lower bound on prod w_FB(z_k | u_k)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    n = z.size
    if u.size != n:
        raise DomainError("z and u must have the same length")
    if float(u @ u) > n * p_fb * (1 + POWER_SLACK):
        raise DomainError(f"||u||^2 = {float(u @ u):.6g} exceeds n*p_fb = {n * p_fb:.6g}")
    lhs = log_gaussian_product(z, u, sigma2_fb)
    rhs = (-0.5 * n * (LOG_2PI + math.log(sigma2_fb))
           - (float(np.linalg.norm(z)) + math.sqrt(n * p_fb)) ** 2 / (2 * sigma2_fb))
    return lhs - rhs


def check_product_lower_bound(z, u, p_fb: float, sigma2_fb: float,
                              tol: float = 1e-9) -> bool:
    return product_bound_margin(z, u, p_fb, sigma2_fb) >= -tol


def log_r_lower_bound(z_norm: float, n: int, p_fb: float, sigma2_fb: float) -> float:
    if z_norm < 0 or n < 1:
        raise DomainError("need z_norm >= 0 and n >= 1")
    s = math.sqrt(p_fb)
    return -2 * max(z_norm / math.sqrt(n), s) * s * n / sigma2_fb


def r_lower_bound(z_norm: float, n: int, p_fb: float, sigma2_fb: float) -> float:
    """Floor on the true-to-reference likelihood ratio; flat for ||z||^2 <= n p_fb."""
    return math.exp(log_r_lower_bound(z_norm, n, p_fb, sigma2_fb))
