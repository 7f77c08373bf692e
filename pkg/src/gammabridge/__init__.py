"""Pricing of reserves and reinsurance contracts on gamma-bridge cumulative gains.

The observed gains are ``xi_t = X_T gamma_tT``, the terminal cash flow times
an independent standard gamma bridge.  Prices are discounted conditional
expectations given ``xi_t``.
"""

from __future__ import annotations

from .errors import (DomainError, InsufficientSampleError, NoMassError, QuadratureError,
                     UnsupportedConfigurationError)
from .gamma_model import ModelParams, make_rng, split_rng
from .market import DiscountCurve, MarketState, PriceResult
from .priors import ContinuousDensity, DiscreteAtoms, GammaPrior, lognormal_prior
from .specfun import QuadratureSpec

__all__ = [
    "ModelParams",
    "MarketState",
    "DiscountCurve",
    "PriceResult",
    "QuadratureSpec",
    "ContinuousDensity",
    "DiscreteAtoms",
    "GammaPrior",
    "lognormal_prior",
    "make_rng",
    "split_rng",
    "DomainError",
    "QuadratureError",
    "NoMassError",
    "InsufficientSampleError",
    "UnsupportedConfigurationError",
]
