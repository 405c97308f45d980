"""Configuration and result records for the transmission schemes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ConfigurationError
from ..gaussian import ChannelParams


class SchemeKind(str, enum.Enum):
    NO_FEEDBACK = "NoFeedback"
    AS_SCHEME = "AsScheme"
    BUILDING_BLOCK = "BuildingBlock"
    THREE_PHASE = "ThreePhase"


@dataclass(frozen=True)
class SchemeConfig:
    """Per-scheme knobs.

    ``threshold_coef`` is the slope ``c`` of the linear threshold rule
    ``Upsilon = c * n``; the blocks inside the three-phase scheme apply the
    same rule to their own length.
    """

    scheme_kind: SchemeKind
    n: int
    delta: float = 0.5
    delta_fb_power: Optional[float] = None
    threshold_coef: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scheme_kind", SchemeKind(self.scheme_kind))
        kind = self.scheme_kind
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"blocklength must be a positive integer, got {self.n}")
        if not 0 < self.delta < 1:
            raise ConfigurationError(f"delta must lie in (0, 1), got {self.delta}")
        if not (self.threshold_coef > 0 and math.isfinite(self.threshold_coef)):
            raise ConfigurationError("threshold_coef must be positive")
        if kind is SchemeKind.AS_SCHEME and self.n < 2:
            raise ConfigurationError("AsScheme needs n >= 2")
        if kind in (SchemeKind.BUILDING_BLOCK, SchemeKind.THREE_PHASE):
            if self.delta_fb_power is None or not self.delta_fb_power > 0:
                raise ConfigurationError(f"{kind.value} needs a positive delta_fb_power")
        if kind is SchemeKind.BUILDING_BLOCK and self.n < 3:
            raise ConfigurationError("BuildingBlock needs n >= 3")
        if kind is SchemeKind.THREE_PHASE:
            if self.n % 2 == 0:
                raise ConfigurationError("ThreePhase needs an odd blocklength; pad even n yourself")
            if self.n < 7:
                raise ConfigurationError("ThreePhase needs n >= 7 (each block uses >= 3 slots)")

    @property
    def threshold(self) -> float:
        return self.threshold_coef * self.n

    def with_n(self, n: int) -> "SchemeConfig":
        return SchemeConfig(self.scheme_kind, n, self.delta, self.delta_fb_power,
                            self.threshold_coef)

    def check_params(self, params: ChannelParams) -> None:
        """Validate the parts of the config that depend on channel parameters."""
        kind = self.scheme_kind
        if kind is SchemeKind.AS_SCHEME and params.p_fb <= 0:
            raise ConfigurationError("AsScheme requires feedback power p_fb > 0")
        if kind is SchemeKind.THREE_PHASE:
            if params.p_fb <= 0:
                raise ConfigurationError("ThreePhase requires feedback power p_fb > 0")
            if not self.delta_fb_power < min(params.p_fwd, params.p_fb):
                raise ConfigurationError("ThreePhase needs 0 < delta_fb_power < min(P, P_FB)")

    def as_dict(self) -> dict:
        return {"scheme": self.scheme_kind.value, "n": self.n, "delta": self.delta,
                "delta_fb_power": self.delta_fb_power,
                "threshold_coef": self.threshold_coef}


@dataclass(frozen=True)
class InjectedNoise:
    """Explicit forward/feedback noise for deterministic trace runs."""

    fwd: tuple
    fb: tuple

    @classmethod
    def zeros(cls, n: int) -> "InjectedNoise":
        return cls((0.0,) * n, (0.0,) * n)

    @classmethod
    def of(cls, n: int, fwd: Optional[dict] = None, fb: Optional[dict] = None) -> "InjectedNoise":
        """Zero noise except at the given 1-based slots."""
        f = [0.0] * n
        b = [0.0] * n
        for k, v in (fwd or {}).items():
            f[k - 1] = float(v)
        for k, v in (fb or {}).items():
            b[k - 1] = float(v)
        return cls(tuple(f), tuple(b))

    def negated(self) -> "InjectedNoise":
        return InjectedNoise(tuple(-v for v in self.fwd), tuple(-v for v in self.fb))


@dataclass
class Transcript:
    """Full record of one trial. Sequences are indexed 0..n-1 (slot k is [k-1])."""

    h: int
    h_hat: int
    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    z: np.ndarray
    retransmitted: bool
    nack_signaled: bool
    fwd_energy: float
    fb_energy: float
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def error(self) -> bool:
        return self.h != self.h_hat


@dataclass(frozen=True)
class Tilt:
    """Mean shift applied to the noise of trials with H = 0 (mirrored for H = 1).

    Each trial is reweighted by the exact Gaussian likelihood ratio of all
    shifted coordinates, so the estimator stays unbiased for any shift.
    """

    fwd_shift: tuple
    fb_shift: tuple = ()

    def as_dict(self) -> dict:
        return {"fwd_shift": list(self.fwd_shift), "fb_shift": list(self.fb_shift)}


@dataclass(frozen=True)
class ErrorEstimate:
    p_hat: float
    trials: int
    errors_weighted: float
    ci_low: float
    ci_high: float
    mode: str
    std_err: float
    error_count: int
    tilt: Optional[Tilt] = None

    def within(self, p: float, k: float = 3.0) -> bool:
        """True if ``p`` is within ``k`` standard errors of the estimate.

        Plain estimates use the binomial standard error at ``p`` itself, so a
        run with zero observed errors is still judged correctly.
        """
        if self.mode == "Plain":
            se = math.sqrt(max(p * (1 - p), 0.0) / self.trials)
        else:
            se = self.std_err
        return abs(self.p_hat - p) <= k * se

    def as_dict(self) -> dict:
        d = {"p_hat": self.p_hat, "trials": self.trials,
             "errors_weighted": self.errors_weighted, "ci_low": self.ci_low,
             "ci_high": self.ci_high, "mode": self.mode, "std_err": self.std_err,
             "error_count": self.error_count}
        d["tilt"] = self.tilt.as_dict() if self.tilt else None
        return d


@dataclass(frozen=True)
class PowerAudit:
    """Per-symbol energy statistics; halfwidths are 3 standard errors."""

    mean_fwd_energy_per_symbol: float
    mean_fb_energy_per_symbol: float
    max_fb_energy_per_symbol: float
    ci_halfwidth_fwd: float
    ci_halfwidth_fb: float
    trials: int
    expected_fwd_energy_per_symbol: float
    expected_fb_energy_per_symbol: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)
