"""Closed forms when ``X_T`` is gamma distributed (the Q-gamma model).

With ``X_T ~ Gamma(m T, kappa)`` the gains process is itself a scaled gamma
process, so ``xi_t - xi_s`` given ``xi_s`` is Gamma(m (t - s), kappa).  Every
price reduces to upper regularized incomplete gamma values
``Q(a, z) = Gamma[a, z] / Gamma[a]``, with ``Q(a, z <= 0) := 1`` marking the
branch where the payoff floor never binds.
"""

from __future__ import annotations


from .errors import DomainError
from .gamma_model import ModelParams, gamma_density
from .market import DiscountCurve, MarketState, PriceResult
from .specfun import reg_inc_gamma_upper

__all__ = [
    "value_qgamma",
    "stop_loss_qgamma",
    "ad_qgamma",
    "critical_value_qgamma",
    "option_qgamma",
]


def _Q(a: float, z: float) -> float:
    return 1.0 if z <= 0 else reg_inc_gamma_upper(a, z)


def _call_on_gamma(a: float, kappa: float, R: float) -> float:
    """``E[(G - R)^+]`` for ``G ~ Gamma(a, kappa)``."""
    r = R / kappa
    return kappa * (a * _Q(a + 1.0, r) - r * _Q(a, r))


def value_qgamma(state: MarketState, params: ModelParams, curve: DiscountCurve) -> PriceResult:
    """``S_t = P_tT (xi_t + kappa m (T - t))``."""
    if not 0 <= state.t <= params.T:
        raise DomainError("value_qgamma requires 0 <= t <= T")
    tau = params.T - state.t
    price = curve.P(state.t, params.T) * (state.xi + params.kappa * params.m * tau)
    return PriceResult(price, 0.0, None, "closed_form")


def stop_loss_qgamma(state: MarketState, K: float, params: ModelParams,
                     curve: DiscountCurve) -> PriceResult:
    if not 0 <= state.t < params.T:
        raise DomainError("stop_loss_qgamma requires 0 <= t < T")
    if not K >= 0:
        raise DomainError("strike must be nonnegative")
    P = curve.P(state.t, params.T)
    if state.xi >= K:
        return PriceResult(value_qgamma(state, params, curve).price - P * K, 0.0, None, "closed_form")
    a = params.m * (params.T - state.t)
    price = P * _call_on_gamma(a, params.kappa, K - state.xi)
    return PriceResult(price, 0.0, None, "closed_form")


def ad_qgamma(s: float, t: float, y: float, state_s: MarketState, params: ModelParams,
              curve: DiscountCurve) -> float:
    """``P_st`` times the Gamma(m (t - s), kappa) density of ``xi_t - xi_s`` at ``y - xi_s``."""
    if not 0 <= s < t <= params.T:
        raise DomainError("ad_qgamma requires 0 <= s < t <= T")
    if y <= state_s.xi:
        return 0.0
    return curve.P(s, t) * float(gamma_density(y - state_s.xi, params.m * (t - s), params.kappa))


def critical_value_qgamma(t: float, K: float, params: ModelParams, curve: DiscountCurve) -> float:
    """``y* = K / P_tT - kappa m (T - t)``, or ``0`` when that is nonpositive."""
    if not 0 < t < params.T:
        raise DomainError("critical_value_qgamma requires 0 < t < T")
    return max(0.0, K / curve.P(t, params.T) - params.kappa * params.m * (params.T - t))


def option_qgamma(s: float, t: float, K: float, state_s: MarketState, params: ModelParams,
                  curve: DiscountCurve, *, literal: bool = False) -> PriceResult:
    """Call on ``S_t`` struck at ``K``, priced at ``(s, xi_s)``.

    The default evaluates ``P_sT kappa [a Q(a+1, r) - r Q(a, r)]`` with
    ``a = m (t - s)`` and ``r = R / kappa``.  Here
    ``R = K / P_tT - xi_s - kappa m (T - t)`` is the increment ``xi_t - xi_s``
    at which ``S_t`` reaches ``K``.

    ``literal=True`` instead uses ``R_s = K / P_tT - (S_s + kappa m (t - s))``
    in the unscaled bracket ``P_sT [a Q(a+1, r) - r Q(a, r)]``.  That form
    disagrees with direct integration and Monte Carlo and is kept only for
    comparison.
    """
    if not 0 <= s < t < params.T:
        raise DomainError("option_qgamma requires 0 <= s < t < T")
    if not K >= 0:
        raise DomainError("strike must be nonnegative")
    a = params.m * (t - s)
    kappa = params.kappa
    P_sT = curve.P(s, params.T)
    P_tT = curve.P(t, params.T)
    if literal:
        S_s = value_qgamma(state_s, params, curve).price
        r = (K / P_tT - (S_s + kappa * a)) / kappa
        price = P_sT * (a * _Q(a + 1.0, r) - r * _Q(a, r))
        return PriceResult(price, 0.0, None, "closed_form")
    R = K / P_tT - state_s.xi - kappa * params.m * (params.T - t)
    price = P_sT * _call_on_gamma(a, kappa, R)
    return PriceResult(price, 0.0, critical_value_qgamma(t, K, params, curve), "closed_form")
