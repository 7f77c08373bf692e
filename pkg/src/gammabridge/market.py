"""Market state, deterministic discounting and the priced-result container."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["MarketState", "DiscountCurve", "PriceResult", "METHODS"]

METHODS = ("quadrature", "closed_form", "monte_carlo")


@dataclass(frozen=True)
class MarketState:
    """Observation time ``t`` and cumulative gain ``xi`` observed at ``t``."""

    t: float
    xi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.t) and self.t >= 0):
            raise DomainError(f"MarketState.t must be >= 0, got {self.t!r}")
        if not (math.isfinite(self.xi) and self.xi >= 0):
            raise DomainError(f"MarketState.xi must be >= 0, got {self.xi!r}")


@dataclass(frozen=True)
class DiscountCurve:
    """Deterministic discount factors.

    Either a flat continuously compounded short rate ``r`` or a table of
    discount factors ``D(t_i)`` (with ``t_0 = 0``, ``D(0) = 1``) interpolated
    log-linearly.  ``P(t, T) = D(T) / D(t)``.
    """

    r: float = 0.0
    times: tuple[float, ...] | None = None
    factors: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.times is None:
            if not (math.isfinite(self.r) and self.r >= 0):
                raise DomainError("flat rate must be finite and nonnegative")
            return
        times = tuple(float(v) for v in self.times)
        factors = tuple(float(v) for v in self.factors or ())
        if len(times) != len(factors) or len(times) < 2:
            raise DomainError("discount table needs matching times and factors (>= 2 entries)")
        if times[0] != 0.0 or factors[0] != 1.0:
            raise DomainError("discount table must start at (0, 1)")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("discount table times must increase strictly")
        if any(not 0 < f <= 1 for f in factors) or any(b > a for a, b in zip(factors, factors[1:])):
            raise DomainError("discount factors must lie in (0, 1] and be nonincreasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "factors", factors)

    @classmethod
    def flat(cls, r: float) -> "DiscountCurve":
        return cls(r=r)

    @classmethod
    def table(cls, times, factors) -> "DiscountCurve":
        return cls(times=tuple(times), factors=tuple(factors))

    def log_factor(self, t: float) -> float:
        """``log D(t)``."""
        if self.times is None:
            return -self.r * t
        if t > self.times[-1] + 1e-12:
            raise DomainError(f"discount table does not reach t={t!r}")
        return float(np.interp(t, self.times, np.log(self.factors)))

    def P(self, t: float, T: float) -> float:
        if T < t:
            raise DomainError("P(t, T) requires t <= T")
        return math.exp(self.log_factor(T) - self.log_factor(t))

    def to_config(self) -> dict:
        if self.times is None:
            return {"type": "flat", "r": self.r}
        return {"type": "table", "times": list(self.times), "factors": list(self.factors)}

    @classmethod
    def from_config(cls, cfg: dict | None) -> "DiscountCurve":
        if cfg is None:
            return cls()
        kind = cfg.get("type", "flat")
        if kind == "flat":
            return cls(r=float(cfg.get("r", 0.0)))
        if kind == "table":
            return cls.table(cfg["times"], cfg["factors"])
        raise DomainError(f"unknown discount type {kind!r}")


@dataclass(frozen=True)
class PriceResult:
    price: float
    err_estimate: float = 0.0
    critical_value: float | None = None
    method: str = "quadrature"

    def __post_init__(self):
        if not self.err_estimate >= 0:
            raise DomainError("err_estimate must be nonnegative")
        if self.method not in METHODS:
            raise DomainError(f"unknown method tag {self.method!r}")

    def __float__(self) -> float:
        return float(self.price)

    def to_dict(self) -> dict:
        return {
            "price": self.price,
            "err_estimate": self.err_estimate,
            "critical_value": self.critical_value,
            "method": self.method,
        }
