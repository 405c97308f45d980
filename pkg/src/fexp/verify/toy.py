"""Small explicit encoders for which every joint density is computable.

Forward maps are clipped affine functions of the past feedback outputs,
feedback maps are clipped linear functions of the received prefix including
the current symbol (u_k = g_k(y^k)). Clipping each feedback symbol to
sqrt(fb_power) enforces sum_k g_k^2 <= n fb_power for every y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .density import LOG_2PI

MAX_N = 4


@dataclass(frozen=True)
class ToyEncoders:
    """``fwd_offset[nu, k] + fwd_weight[nu, k, :k] @ z[:k]`` clipped to +-fwd_clip;
    ``fb_weight[k, :k+1] @ y[:k+1]`` clipped to +-sqrt(fb_power)."""

    n: int
    fwd_offset: np.ndarray   # (2, n)
    fwd_weight: np.ndarray   # (2, n, n), strictly lower triangular in (k, j)
    fwd_clip: float
    fb_weight: np.ndarray    # (n, n), lower triangular including the diagonal
    fb_power: float

    def __post_init__(self):
        n = self.n
        if not 1 <= n <= MAX_N:
            raise DomainError(f"toy encoders support 1 <= n <= {MAX_N}")
        if self.fb_power <= 0 or self.fwd_clip <= 0:
            raise DomainError("fb_power and fwd_clip must be positive")
        if (np.shape(self.fwd_offset) != (2, n) or np.shape(self.fwd_weight) != (2, n, n)
                or np.shape(self.fb_weight) != (n, n)):
            raise DomainError("encoder coefficient shapes do not match n")
        if np.any(np.triu(self.fwd_weight, 0)) or np.any(np.triu(self.fb_weight, 1)):
            raise DomainError("encoders must be causal")

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, fb_power: float = 1.0,
               fwd_clip: float = 3.0) -> "ToyEncoders":
        off = rng.normal(0, 1.5, (2, n))
        w = np.tril(rng.normal(0, 1, (2, n, n)), -1)
        g = np.tril(rng.normal(0, 1.5, (n, n)))
        return cls(n, off, w, fwd_clip, g, fb_power)

    @classmethod
    def zero(cls, n: int, fb_power: float = 1.0) -> "ToyEncoders":
        return cls(n, np.zeros((2, n)), np.zeros((2, n, n)), 1.0, np.zeros((n, n)), fb_power)

    def forward(self, nu: int, z) -> np.ndarray:
        """(f_1(nu), f_2(nu, z_1), ..., f_n(nu, z^{n-1})); z may carry batch axes."""
        z = np.asarray(z, dtype=float)
        x = self.fwd_offset[nu] + z @ self.fwd_weight[nu].T
        return np.clip(x, -self.fwd_clip, self.fwd_clip)

    def feedback(self, y) -> np.ndarray:
        """(g_1(y_1), ..., g_n(y^n))."""
        y = np.asarray(y, dtype=float)
        s = math.sqrt(self.fb_power)
        return np.clip(y @ self.fb_weight.T, -s, s)

    def log_joint(self, nu: int, y, z, sigma2_fwd: float, sigma2_fb: float) -> np.ndarray:
        """log p_nu(y, z): forward densities given f(nu, z) times feedback densities given g(y)."""
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        dy = y - self.forward(nu, z)
        dz = z - self.feedback(y)
        n = self.n
        return (-0.5 * n * (2 * LOG_2PI + math.log(sigma2_fwd) + math.log(sigma2_fb))
                - (dy * dy).sum(-1) / (2 * sigma2_fwd) - (dz * dz).sum(-1) / (2 * sigma2_fb))


@dataclass(frozen=True)
class TypicalSetParams:
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float

    def __post_init__(self):
        for k, v in vars(self).items():
            if not (v > 0 and math.isfinite(v)):
                raise DomainError(f"{k} must be positive and finite, got {v}")

    def log_exponent(self, sigma2_fwd: float, sigma2_fb: float) -> float:
        """n-normalized exponent (a1 + b2)^2 / (2 s2) + (b1 + a2)^2 / (2 s2_fb)."""
        return ((self.alpha1 + self.beta2) ** 2 / (2 * sigma2_fwd)
                + (self.beta1 + self.alpha2) ** 2 / (2 * sigma2_fb))

    def in_ty(self, enc: ToyEncoders, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        g = enc.feedback(y)
        n = enc.n
        return ((y * y).sum(-1) < n * self.alpha1 ** 2) & ((g * g).sum(-1) < n * self.alpha2 ** 2)

    def in_tz0(self, enc: ToyEncoders, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        f = enc.forward(0, z)
        n = enc.n
        return ((z * z).sum(-1) < n * self.beta1 ** 2) & ((f * f).sum(-1) < n * self.beta2 ** 2)
