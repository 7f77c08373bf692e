"""Monte Carlo oracle for the pricing formulas.

Paths are generated from the model's definition alone: draw ``X_T`` from the
prior, draw a gamma bridge independently and set ``xi_t = X_T gamma_tT``.
Conditioning on an observed ``xi_t`` uses band rejection.  Conditioning on
``xi_s`` for forward-start prices samples the time-``s`` law of ``X_T`` and
restarts the bridge over ``[s, T]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import interpolate

from . import discrete, pricing
from .bridge import sample_bridge_marginal, sample_bridge_path
from .errors import DomainError, InsufficientSampleError
from .gamma_model import ModelParams, split_rng
from .market import DiscountCurve, MarketState
from .priors import DiscreteAtoms, GammaPrior, Prior, prior_mean

__all__ = [
    "MCEstimate",
    "MCDistribution",
    "ReservePaths",
    "sample_gains",
    "mc_distribution",
    "mc_value",
    "mc_option",
    "tabulated_reserve",
    "simulate_reserve_paths",
]

_MIN_PATHS = 10_000


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    std_error: float
    n_paths: int
    n_accepted: int | None = None
    band: float | None = None
    widened: bool = False


@dataclass(frozen=True)
class MCDistribution:
    samples: np.ndarray
    mean: float
    std: float
    std_error: float

    def ecf(self, lam: float) -> tuple[complex, float, float]:
        """Empirical characteristic function with the standard errors of its parts."""
        ph = lam * self.samples
        c, s = np.cos(ph), np.sin(ph)
        n = self.samples.size
        return complex(c.mean(), s.mean()), float(c.std(ddof=1) / math.sqrt(n)), \
            float(s.std(ddof=1) / math.sqrt(n))


def _check_paths(n_paths: int):
    if n_paths < _MIN_PATHS:
        raise DomainError(f"Monte Carlo oracle needs at least {_MIN_PATHS} paths")


def _sample_prior(prior: Prior, rng, n):
    return prior.sample(rng, n)


def sample_gains(t: float, prior: Prior, params: ModelParams, n: int,
                 rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Joint draws of ``(X_T, xi_t)``."""
    if not 0 <= t <= params.T:
        raise DomainError("sample_gains requires 0 <= t <= T")
    X = _sample_prior(prior, rng, n)
    if t == 0:
        return X, np.zeros(n)
    if t == params.T:
        return X, X.copy()
    g, _ = sample_bridge_marginal(t, params, rng, size=n)
    return X, X * g


def mc_distribution(t: float, prior: Prior, params: ModelParams, n_paths: int,
                    rng: np.random.Generator) -> MCDistribution:
    _check_paths(n_paths)
    _, xi = sample_gains(t, prior, params, n_paths, rng)
    xi = np.sort(xi)
    std = float(xi.std(ddof=1))
    return MCDistribution(xi, float(xi.mean()), std, std / math.sqrt(n_paths))


def mc_value(t: float, xi_target: float, prior: Prior, params: ModelParams, n_paths: int,
             rng: np.random.Generator, band: float = 0.005, min_accept: int = 100,
             max_band: float = 0.5) -> MCEstimate:
    """Band-conditional mean of ``X_T`` given ``|xi_t - target| <= band * target``.

    The estimate is undiscounted.  Its bias is of the order of the band
    width.  ``band = inf`` accepts every path.  The band doubles until
    ``min_accept`` paths fall inside it, up to ``max_band``.
    """
    _check_paths(n_paths)
    if not band > 0:
        raise DomainError("band must be positive")
    X, xi = sample_gains(t, prior, params, n_paths, rng)
    ref = xi_target if xi_target > 0 else prior_mean(prior)
    width = band
    widened = False
    while True:
        keep = np.abs(xi - xi_target) <= width * ref if math.isfinite(width) else np.ones(n_paths, bool)
        n_acc = int(keep.sum())
        if n_acc >= min_accept:
            break
        if width >= max_band:
            raise InsufficientSampleError(
                f"only {n_acc} of {n_paths} paths within {width:g} of xi={xi_target!r}")
        width = min(2.0 * width, max_band)
        widened = True
    sel = X[keep]
    return MCEstimate(float(sel.mean()), float(sel.std(ddof=1) / math.sqrt(n_acc)), n_paths,
                      n_acc, width, widened)


# --------------------------------------------------------------------------- #
# Reserve evaluation along simulated gains
# --------------------------------------------------------------------------- #

def tabulated_reserve(t: float, ys: np.ndarray, prior: Prior, params: ModelParams,
                      curve: DiscountCurve) -> Callable[[np.ndarray], np.ndarray]:
    """Cubic interpolant of the quadrature reserve ``S(t, .)`` through nodes ``ys``.

    Outside the nodes the interpolant continues linearly.
    """
    ys = np.unique(np.asarray(ys, dtype=float))
    vals = np.array([pricing.value(MarketState(t, float(y)), prior, params, curve).price for y in ys])
    spline = interpolate.CubicSpline(ys, vals)
    lo, hi = ys[0], ys[-1]
    s_lo, s_hi = (vals[1] - vals[0]) / (ys[1] - ys[0]), (vals[-1] - vals[-2]) / (ys[-1] - ys[-2])

    def f(y):
        y = np.asarray(y, dtype=float)
        out = spline(np.clip(y, lo, hi))
        out = np.where(y > hi, vals[-1] + s_hi * (y - hi), out)
        return np.where(y < lo, vals[0] + s_lo * (y - lo), out)

    return f


def _pilot_nodes(samples: np.ndarray, floor: float, n_nodes: int = 201) -> np.ndarray:
    qs = np.quantile(samples, np.linspace(0.0, 1.0, n_nodes))
    return np.unique(np.concatenate([[floor], qs]))


def _reserve_fn(t, prior, params, curve, pilot_xi, floor):
    if isinstance(prior, DiscreteAtoms):
        return lambda y: discrete.reserve_discrete(t, y, prior, params, curve)
    return tabulated_reserve(t, _pilot_nodes(pilot_xi, floor), prior, params, curve)


def _posterior_sampler(s: float, xi_s: float, prior: Prior, params: ModelParams):
    """Sampler for ``X_T`` given ``xi_s``."""
    if s == 0.0 and xi_s == 0.0:
        return lambda rng, n: _sample_prior(prior, rng, n)
    if isinstance(prior, DiscreteAtoms):
        w = discrete.posterior_weights(s, xi_s, prior, params)
        post = DiscreteAtoms.from_arrays(prior.xs, w)
        return lambda rng, n: post.sample(rng, n)
    post = pricing.conditional_law(MarketState(s, xi_s), prior, params)
    return lambda rng, n: post.sample(rng, n)


def mc_option(s: float, t: float, K: float, prior: Prior, params: ModelParams,
              curve: DiscountCurve, n_paths: int, rng: np.random.Generator, *,
              xi_s: float = 0.0, value_fn: Callable | None = None,
              n_chunks: int = 4) -> MCEstimate:
    """``P_st E_s[(S(t, xi_t) - K)^+]`` from simulated ``xi_t``.

    ``value_fn`` maps an array of gains to reserves at ``t``.  By default it
    is exact for discrete priors and a cubic table of quadrature reserves
    otherwise.  Paths are split into ``n_chunks`` independent streams and
    merged by count.
    """
    _check_paths(n_paths)
    if not 0 <= s < t < params.T:
        raise DomainError("mc_option requires 0 <= s < t < T")
    draw_x = _posterior_sampler(s, xi_s, prior, params)
    sub = ModelParams(params.m, params.kappa, params.T - s)
    pilot_rng, *chunk_rngs = split_rng(rng, n_chunks + 1)

    def draw_xi(r, n):
        X = draw_x(r, n)
        delta, _ = sample_bridge_marginal(t - s, sub, r, size=n)
        return xi_s + (X - xi_s) * delta

    if value_fn is None:
        value_fn = _reserve_fn(t, prior, params, curve, draw_xi(pilot_rng, 20_000), xi_s)
    sizes = np.full(n_chunks, n_paths // n_chunks)
    sizes[: n_paths % n_chunks] += 1
    total = total_sq = 0.0
    for r, n in zip(chunk_rngs, sizes):
        pay = np.maximum(value_fn(draw_xi(r, int(n))) - K, 0.0)
        total += float(pay.sum())
        total_sq += float(np.dot(pay, pay))
    mean = total / n_paths
    var = max(total_sq / n_paths - mean ** 2, 0.0) * n_paths / (n_paths - 1)
    P_st = curve.P(s, t)
    return MCEstimate(P_st * mean, P_st * math.sqrt(var / n_paths), n_paths)


# --------------------------------------------------------------------------- #
# Path simulation
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class ReservePaths:
    times: np.ndarray
    X: np.ndarray
    xi: np.ndarray
    reserve: np.ndarray
    meta: dict = field(default_factory=dict)


def simulate_reserve_paths(prior: Prior, params: ModelParams, curve: DiscountCurve, times,
                           n_paths: int, rng: np.random.Generator, *,
                           closed_form: bool = True) -> ReservePaths:
    """Gains paths ``X_T gamma_tT`` on ``times`` with the reserve along each path.

    Discrete priors use the exact terminal-limit evaluation from the bridge
    remainder.  Gamma priors use the linear closed form unless
    ``closed_form`` is False.  Other priors use per-time cubic tables of
    quadrature reserves.
    """
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0:
        times = np.concatenate([[0.0], times])
    if times[-1] != params.T:
        times = np.concatenate([times, [params.T]])
    if isinstance(prior, DiscreteAtoms):
        idx = prior.sample_index(rng, n_paths)
        X = prior.xs[idx]
    else:
        idx = None
        X = _sample_prior(prior, rng, n_paths)
    path = sample_bridge_path(times, params, rng, n_paths=n_paths)
    xi = X[:, None] * path.values
    reserve = np.empty_like(xi)
    for j, t in enumerate(times):
        if t == params.T:
            reserve[:, j] = X
        elif isinstance(prior, DiscreteAtoms):
            reserve[:, j] = discrete.reserve_from_bridge(t, idx, path.log_remaining[:, j], prior,
                                                         params, curve)
        elif isinstance(prior, GammaPrior) and closed_form:
            P = curve.P(t, params.T)
            reserve[:, j] = P * (xi[:, j] + params.kappa * params.m * (params.T - t))
        elif t == 0.0:
            reserve[:, j] = pricing.value(MarketState(0.0, 0.0), prior, params, curve).price
        else:
            f = tabulated_reserve(t, _pilot_nodes(xi[:, j], 0.0), prior, params, curve)
            reserve[:, j] = f(xi[:, j])
    return ReservePaths(times, X, xi, reserve, {"closed_form": closed_form})

