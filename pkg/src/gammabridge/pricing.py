"""Reserve, stop-loss, Arrow-Debreu and option prices for a general prior.

Every formula reduces to tail integrals of the form

    I_k(y; beta, H) = int_y p(x) x^(k - H) (x - y)^(beta - 1) dx,

with ``H = m T`` and ``beta = m (T - t)``; e.g. the reserve is
``S(t, y) = P_tT I_2 / I_1``.  All of them go through one log-domain
evaluator that absorbs the algebraic endpoint factor exactly.

Discrete priors are dispatched to :mod:`gammabridge.discrete`.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from . import discrete
from .errors import DomainError, NoMassError, UnsupportedConfigurationError
from .gamma_model import ModelParams
from .market import DiscountCurve, MarketState, PriceResult
from .priors import (ContinuousDensity, DiscreteAtoms, Prior, as_continuous, prior_char_fn,
                     prior_mean, prior_second_moment)
from .specfun import QuadratureSpec, comp_beta, integrate_log_tail, integrate_tail, ln_beta

__all__ = [
    "MarketState",
    "DiscountCurve",
    "PriceResult",
    "conditional_law",
    "conditional_density",
    "value",
    "stop_loss",
    "ad_price",
    "ad_integral",
    "critical_value",
    "option_price",
    "MonotonicityReport",
    "monotonicity_check",
    "reinitialized_value",
    "gains_char_fn",
    "increment_covariance",
]

log = logging.getLogger(__name__)

_CRIT_SCAN = 48


def _check_time(t: float, params: ModelParams, *, allow_T: bool = False):
    ok = 0 <= t <= params.T if allow_T else 0 <= t < params.T
    if not ok:
        raise DomainError(f"time t={t!r} outside the admissible range for T={params.T!r}")


def _log_integral(d: ContinuousDensity, H: float, y: float, beta: float, power: float,
                  spec: QuadratureSpec | None = None, *, start: float | None = None,
                  extra: Callable[[float], float] | None = None) -> tuple[float, float]:
    """``log int p(x) x^(power-H) (x-y)^(beta-1) e^extra(x) dx`` over ``x > max(start, y, lower)``.

    Every algebraic factor that is singular at the lower limit is moved
    into the quadrature weight.  Returns ``(log_value, rel_err)``.
    """
    lo, hi = d.support_lower, d.support_upper
    a = max(y, lo) if start is None else max(start, y, lo)
    if a >= hi:
        return -math.inf, 0.0
    e = 0.0
    if a == y:
        e += beta - 1.0
    if a == lo:
        e += d.edge_exponent
    if a == 0.0:
        e += power - H
    if a == lo and d.edge_exponent == math.inf:
        # density vanishes faster than any power: the integrand is flat at a
        e = 0.0
    if not e > -1.0:
        raise DomainError("tail integral diverges at its lower limit")
    bm1 = beta - 1.0
    pmh = power - H
    a_up = float(np.nextafter(a, math.inf))

    def log_f(x):
        if x <= a:
            x = a_up
        lp = d.logpdf(x)
        if lp == -math.inf:
            return lp
        v = lp + pmh * math.log(x) + bm1 * math.log(x - y) - e * math.log(x - a)
        if extra is not None:
            v += extra(x)
        return v

    return integrate_log_tail(log_f, a, e + 1.0, spec, upper=hi, scale=d.length_scale,
                              points=d.breakpoints)


def _log_normalizer(d, params, t, xi, spec=None):
    log_i, err = _log_integral(d, params.mT, xi, params.m * (params.T - t), 1.0, spec)
    if log_i == -math.inf:
        raise NoMassError(f"no prior mass above xi={xi!r}")
    return log_i, err


# --------------------------------------------------------------------------- #
# Conditional law and reserve
# --------------------------------------------------------------------------- #

def conditional_law(state: MarketState, prior: Prior, params: ModelParams,
                    spec: QuadratureSpec | None = None) -> ContinuousDensity:
    """Law of ``X_T`` given ``xi_t`` as a density object (normalizer computed once)."""
    _check_time(state.t, params)
    d = as_continuous(prior)
    beta = params.m * (params.T - state.t)
    xi = state.xi
    log_norm, _ = _log_normalizer(d, params, state.t, xi, spec)
    lo = max(xi, d.support_lower)

    def log_density(x):
        if x <= xi:
            return -math.inf
        lp = d.logpdf(x)
        if lp == -math.inf:
            return lp
        return lp + (1.0 - params.mT) * math.log(x) + (beta - 1.0) * math.log(x - xi) - log_norm

    if lo > xi:
        edge = d.edge_exponent
    elif lo == d.support_lower and d.edge_exponent == math.inf:
        edge = math.inf
    else:
        edge = beta - 1.0 + (d.edge_exponent if lo == d.support_lower else 0.0) \
            + ((1.0 - params.mT) if lo == 0.0 else 0.0)
    return ContinuousDensity(
        density=lambda x: math.exp(log_density(x)),
        log_density=log_density,
        support_lower=lo,
        support_upper=d.support_upper,
        length_scale=d.length_scale,
        edge_exponent=edge,
        breakpoints=d.breakpoints,
    )


def conditional_density(x, state: MarketState, prior: Prior, params: ModelParams,
                        spec: QuadratureSpec | None = None):
    """Density of ``X_T`` given ``xi_t``, evaluated at ``x`` (scalar or array)."""
    law = conditional_law(state, prior, params, spec)
    xs = np.asarray(x, dtype=float)
    out = np.array([math.exp(law.logpdf(float(v))) for v in xs.ravel()]).reshape(xs.shape)
    return float(out) if out.ndim == 0 else out


def value(state: MarketState, prior: Prior, params: ModelParams, curve: DiscountCurve,
          spec: QuadratureSpec | None = None) -> PriceResult:
    """Reserve ``S(t, xi_t) = P_tT E[X_T | xi_t]``."""
    if isinstance(prior, DiscreteAtoms):
        return discrete.value_discrete(state, prior, params, curve)
    _check_time(state.t, params, allow_T=True)
    if state.t == params.T:
        return PriceResult(state.xi, 0.0, None, "closed_form")
    d = as_continuous(prior)
    beta = params.m * (params.T - state.t)
    l2, e2 = _log_integral(d, params.mT, state.xi, beta, 2.0, spec)
    l1, e1 = _log_normalizer(d, params, state.t, state.xi, spec)
    price = curve.P(state.t, params.T) * math.exp(l2 - l1)
    return PriceResult(price, price * (e1 + e2), None, "quadrature")


def _value_at(t, y, d, params, curve, spec=None) -> float:
    return value(MarketState(t, y), d, params, curve, spec).price


def stop_loss(state: MarketState, K: float, prior: Prior, params: ModelParams,
              curve: DiscountCurve, spec: QuadratureSpec | None = None) -> PriceResult:
    """``P_tT E[(X_T - K)^+ | xi_t]``; equals ``S_t - P_tT K`` once ``xi_t >= K``."""
    if not K >= 0:
        raise DomainError("strike must be nonnegative")
    if isinstance(prior, DiscreteAtoms):
        return discrete.stop_loss_discrete(state, K, prior, params, curve)
    _check_time(state.t, params)
    P = curve.P(state.t, params.T)
    if state.xi >= K:
        v = value(state, prior, params, curve, spec)
        return PriceResult(v.price - P * K, v.err_estimate, None, v.method)
    d = as_continuous(prior)
    beta = params.m * (params.T - state.t)
    lk, ek = _log_integral(d, params.mT, state.xi, beta, 1.0, spec, start=K,
                           extra=lambda x: math.log(x - K) if x > K else -math.inf)
    l1, e1 = _log_normalizer(d, params, state.t, state.xi, spec)
    price = P * math.exp(lk - l1)
    return PriceResult(price, price * (ek + e1), None, "quadrature")


# --------------------------------------------------------------------------- #
# Arrow-Debreu prices
# --------------------------------------------------------------------------- #

def _ad_log_kernel(s, t, state_s, d, params, curve, spec=None) -> Callable[[float], float]:
    """``y -> log A_st(y) - (m(t-s) - 1) log(y - xi_s)``."""
    a = params.m * (t - s)
    b = params.m * (params.T - t)
    log_is, _ = _log_normalizer(d, params, s, state_s.xi, spec)
    base = math.log(curve.P(s, t)) - ln_beta(a, b) - log_is

    def kernel(y):
        log_it, _ = _log_integral(d, params.mT, y, b, 1.0, spec)
        return base + log_it

    return kernel


def ad_price(s: float, t: float, y: float, state_s: MarketState, prior: Prior,
             params: ModelParams, curve: DiscountCurve, spec: QuadratureSpec | None = None) -> float:
    """Price at ``s`` of a claim paying ``delta(xi_t - y)`` at ``t``."""
    if not 0 <= s < t <= params.T:
        raise DomainError("ad_price requires 0 <= s < t <= T")
    if isinstance(prior, DiscreteAtoms):
        return discrete.ad_discrete(t, y, prior, params, curve, s=s, xi_s=state_s.xi)
    if y <= state_s.xi:
        return 0.0
    d = as_continuous(prior)
    if t == params.T:
        return curve.P(s, t) * conditional_density(y, MarketState(s, state_s.xi), d, params, spec)
    a = params.m * (t - s)
    kernel = _ad_log_kernel(s, t, state_s, d, params, curve, spec)
    return math.exp(kernel(y) + (a - 1.0) * math.log(y - state_s.xi))


def ad_integral(s: float, t: float, g: Callable[[float], float], state_s: MarketState,
                prior: Prior, params: ModelParams, curve: DiscountCurve,
                spec: QuadratureSpec | None = None) -> tuple[float, float]:
    """``int A_st(y) g(y) dy`` by quadrature; returns ``(value, err)``."""
    if not 0 <= s < t < params.T:
        raise DomainError("ad_integral requires 0 <= s < t < T")
    if isinstance(prior, DiscreteAtoms):
        return discrete.ad_integral_discrete(s, t, g, state_s, prior, params, curve)
    d = as_continuous(prior)
    kernel = _ad_log_kernel(s, t, state_s, d, params, curve, spec)

    def f(y):
        k = kernel(y)
        return math.exp(k) * g(y) if k > -math.inf else 0.0

    return integrate_tail(f, state_s.xi, params.m * (t - s), spec, upper=d.support_upper,
                          scale=d.length_scale, points=d.breakpoints)


# --------------------------------------------------------------------------- #
# Critical value and options
# --------------------------------------------------------------------------- #

def critical_value(t: float, K: float, prior: Prior, params: ModelParams, curve: DiscountCurve,
                   spec: QuadratureSpec | None = None) -> float | None:
    """Root ``y*`` of ``S(t, y*) = K``.

    Returns ``0.0`` when every state is in the money, ``inf`` when none is,
    and ``None`` when the scan finds more than one sign change.
    """
    if not 0 < t < params.T:
        raise DomainError("critical_value requires 0 < t < T")
    if isinstance(prior, DiscreteAtoms):
        return discrete.critical_value_discrete(t, K, prior, params, curve).y_star
    d = as_continuous(prior)
    P = curve.P(t, params.T)
    if K <= P * d.support_lower:
        return 0.0
    if K >= P * d.support_upper:
        return math.inf
    # S(t, y) >= P y, so the objective is nonnegative from K/P on
    y_max = K / P
    if math.isfinite(d.support_upper):
        y_max = min(y_max, d.support_upper)

    def g(y):
        if y >= d.support_upper:
            return P * d.support_upper - K
        return _value_at(t, y, d, params, curve, spec) - K

    grid = np.unique(np.concatenate([
        np.linspace(0.0, y_max, _CRIT_SCAN),
        y_max * np.geomspace(1e-6, 1.0, 12),
        [b for b in d.breakpoints if 0 < b < y_max],
    ]))
    vals = np.array([g(float(y)) for y in grid])
    sign = vals >= 0
    changes = np.flatnonzero(sign[1:] != sign[:-1])
    if changes.size == 0:
        return 0.0 if sign[0] else math.inf
    if changes.size > 1 or sign[0]:
        log.warning("critical_value: %d sign changes of S(t, .) - K at t=%g; "
                    "no single critical value", changes.size, t)
        return None
    i = int(changes[0])
    return float(optimize.brentq(g, grid[i], grid[i + 1], xtol=1e-12, rtol=4 * np.finfo(float).eps))


def option_price(s: float, t: float, K: float, state_s: MarketState, prior: Prior,
                 params: ModelParams, curve: DiscountCurve,
                 spec: QuadratureSpec | None = None) -> PriceResult:
    """Price at ``s`` of the call on ``S_t`` struck at ``K`` (commutation option)."""
    if not 0 <= s < t < params.T:
        raise DomainError("option_price requires 0 <= s < t < T")
    if not K >= 0:
        raise DomainError("strike must be nonnegative")
    if isinstance(prior, DiscreteAtoms):
        return discrete.option_discrete(t, K, prior, params, curve, s=s, xi_s=state_s.xi)
    d = as_continuous(prior)
    y_star = critical_value(t, K, d, params, curve, spec)
    if y_star is None:
        raise UnsupportedConfigurationError(
            "S(t, .) is not monotone for this configuration; use the Monte Carlo oracle")
    P_st = curve.P(s, t)
    if y_star == math.inf:
        return PriceResult(0.0, 0.0, y_star, "quadrature")
    xi_s = state_s.xi
    if y_star <= xi_s:
        v = value(state_s, d, params, curve, spec)
        return PriceResult(v.price - P_st * K, v.err_estimate, y_star, "quadrature")

    a = params.m * (t - s)
    b = params.m * (params.T - t)
    beta_s = params.m * (params.T - s)

    def log_cb(x):
        cb = comp_beta(min(1.0, (y_star - xi_s) / (x - xi_s)), a, b)
        return math.log(cb) if cb > 0 else -math.inf

    l1, e1 = _log_integral(d, params.mT, xi_s, beta_s, 2.0, spec, start=y_star, extra=log_cb)
    l0, e0 = _log_integral(d, params.mT, xi_s, beta_s, 1.0, spec, start=y_star, extra=log_cb)
    ln, en = _log_normalizer(d, params, s, xi_s, spec)
    P_tT = curve.P(t, params.T)
    hi_part = P_tT * math.exp(l1 - ln)
    lo_part = K * math.exp(l0 - ln)
    price = P_st * (hi_part - lo_part)
    err = P_st * (hi_part * (e1 + en) + lo_part * (e0 + en))
    return PriceResult(price, err, y_star, "quadrature")


# --------------------------------------------------------------------------- #
# Diagnostics and identities
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class MonotonicityReport:
    t: float
    ys: np.ndarray
    values: np.ndarray
    sufficient_condition: bool
    nondecreasing: bool
    sign_changes: int
    decreasing_segments: tuple[tuple[float, float], ...]

    @property
    def passed(self) -> bool:
        return self.nondecreasing or not self.sufficient_condition


def monotonicity_check(t: float, prior: Prior, params: ModelParams, ys,
                       curve: DiscountCurve | None = None,
                       spec: QuadratureSpec | None = None) -> MonotonicityReport:
    """Evaluate ``S(t, .)`` on ``ys`` and describe its monotonicity.

    ``m (T - t) > 1`` is sufficient for ``S`` to be nondecreasing; the
    report flags a violation of that implication through ``passed``.
    """
    if not 0 < t < params.T:
        raise DomainError("monotonicity_check requires 0 < t < T")
    curve = curve or DiscountCurve()
    ys = np.asarray(ys, dtype=float)
    if isinstance(prior, DiscreteAtoms):
        vals = discrete.reserve_discrete(t, ys, prior, params, curve)
    else:
        vals = np.array([_value_at(t, float(y), prior, params, curve, spec) for y in ys])
    diffs = np.diff(vals)
    tol = 1e-8 * max(1.0, float(np.max(np.abs(vals))))
    down = diffs < -tol
    signs = np.sign(np.where(np.abs(diffs) <= tol, 0.0, diffs))
    signs = signs[signs != 0]
    changes = int(np.count_nonzero(signs[1:] != signs[:-1])) if signs.size else 0
    segments = tuple((float(ys[i]), float(ys[i + 1])) for i in np.flatnonzero(down))
    return MonotonicityReport(t, ys, vals, params.m * (params.T - t) > 1.0, not bool(down.any()),
                              changes, segments)


def reinitialized_value(s: float, state_s: MarketState, eta_t: float, t: float, prior: Prior,
                        params: ModelParams, curve: DiscountCurve,
                        spec: QuadratureSpec | None = None) -> PriceResult:
    """Reserve at ``t`` from the representation restarted at ``s``.

    The restarted problem has prior ``q(z) = pi_s(xi_s + z)`` for the
    remaining gain ``Z_T``, observation ``eta_t = xi_t - xi_s`` and total
    shape ``m (T - s)``; the reserve is ``P_tT (xi_s + E[Z_T | eta_t])``.
    """
    if not 0 <= s < t < params.T:
        raise DomainError("reinitialized_value requires 0 <= s < t < T")
    if not eta_t >= 0:
        raise DomainError("eta_t must be nonnegative")
    xi_s = state_s.xi
    if isinstance(prior, DiscreteAtoms):
        return discrete.reinitialized_value_discrete(s, xi_s, eta_t, t, prior, params, curve)
    d = as_continuous(prior)
    H_s = params.m * (params.T - s)
    log_is, _ = _log_normalizer(d, params, s, xi_s, spec)

    def log_q(z):
        x = xi_s + z
        lp = d.logpdf(x)
        if lp == -math.inf or z <= 0:
            return -math.inf
        return lp + (1.0 - params.mT) * math.log(x) + (H_s - 1.0) * math.log(z) - log_is

    z_lo = max(0.0, d.support_lower - xi_s)
    q = ContinuousDensity(
        density=lambda z: math.exp(log_q(z)),
        log_density=log_q,
        support_lower=z_lo,
        support_upper=d.support_upper - xi_s,
        length_scale=d.length_scale,
        edge_exponent=(H_s - 1.0) if z_lo == 0.0 else d.edge_exponent,
        breakpoints=tuple(b - xi_s for b in d.breakpoints if b > xi_s),
    )
    beta = params.m * (params.T - t)
    l2, e2 = _log_integral(q, H_s, eta_t, beta, 2.0, spec)
    l1, e1 = _log_integral(q, H_s, eta_t, beta, 1.0, spec)
    if l1 == -math.inf:
        raise NoMassError("no re-initialized mass above eta_t")
    reserve = xi_s + math.exp(l2 - l1)
    price = curve.P(t, params.T) * reserve
    return PriceResult(price, curve.P(t, params.T) * math.exp(l2 - l1) * (e1 + e2), None,
                       "quadrature")


def gains_char_fn(lam: float, t: float, prior: Prior, params: ModelParams) -> complex:
    """``E[exp(i lam xi_t)]`` as the beta average of the prior characteristic function."""
    if not 0 < t < params.T:
        raise DomainError("gains_char_fn requires 0 < t < T")
    if lam == 0.0:
        return 1.0 + 0.0j
    a = params.m * t
    b = params.m * (params.T - t)

    @functools.lru_cache(maxsize=None)
    def phi(u):
        return prior_char_fn(prior, lam * u)

    kw = dict(weight="alg", wvar=(a - 1.0, b - 1.0), epsabs=1e-13, epsrel=1e-11, limit=200)
    re = integrate.quad(lambda u: phi(u).real, 0.0, 1.0, **kw)[0]
    im = integrate.quad(lambda u: phi(u).imag, 0.0, 1.0, **kw)[0]
    return complex(re, im) / math.exp(ln_beta(a, b))


def increment_covariance(s: float, t: float, prior: Prior, params: ModelParams) -> float:
    """``Cov[xi_s, xi_t - xi_s]`` from the first two prior moments."""
    if not 0 <= s < t <= params.T:
        raise DomainError("increment_covariance requires 0 <= s < t <= T")
    T, mT = params.T, params.mT
    m2 = prior_second_moment(prior)
    m1 = prior_mean(prior)
    return params.m * s * (t - s) / (T * (mT + 1.0)) * m2 - s * (t - s) / T ** 2 * m1 ** 2
