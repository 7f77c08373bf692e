"""The standard gamma bridge ``gamma_tT = gamma_t / gamma_T``.

Its time-t marginal is Beta(m t, m (T - t)).  Paths are sampled forward:
given ``gamma_sT`` the normalized increment to the next grid time ``t`` is
Beta(m (t - s), m (T - t)), drawn as ``A / (A + B)`` from two independent
gamma variates.  The remaining gap ``1 - gamma_tT`` is tracked in logs so
that paths close to the terminal time keep their resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .gamma_model import ModelParams, sample_log_gamma
from .specfun import ln_beta, pochhammer

__all__ = [
    "BridgePath",
    "BridgeDecomposition",
    "bridge_density",
    "bridge_moment",
    "bridge_central_moment",
    "sample_bridge_path",
    "sample_bridge_marginal",
    "decompose_at",
]


@dataclass(frozen=True)
class BridgePath:
    """Bridge values on ``times``; ``values`` has shape ``(..., len(times))``.

    ``log_remaining`` holds ``log(1 - values)`` at full precision when the
    path was sampled (``-inf`` at the terminal time).
    """

    times: np.ndarray
    values: np.ndarray
    log_remaining: np.ndarray | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or values.shape[-1] != times.size:
            raise DomainError("BridgePath values must end with an axis matching times")
        if times.size > 1:
            if np.any(np.diff(times) <= 0):
                raise DomainError("BridgePath times must increase strictly")
            if np.any(values[..., 0] != 0.0) or np.any(values[..., -1] != 1.0):
                raise DomainError("BridgePath must start at 0 and end at 1")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class BridgeDecomposition:
    """``xi_t = xi_s + Z_T * delta_tT`` for ``t >= s``."""

    s: float
    xi_s: float
    Z_T: float
    delta_path: BridgePath

    def reconstruct(self) -> np.ndarray:
        return self.xi_s + self.Z_T * self.delta_path.values


def _check_interior(t: float, params: ModelParams):
    if not 0 < t < params.T:
        raise DomainError(f"bridge time must lie in (0, T), got t={t!r}")


def bridge_density(y, t: float, params: ModelParams):
    """Beta(m t, m (T - t)) density of ``gamma_tT``."""
    _check_interior(t, params)
    a = params.m * t
    b = params.m * (params.T - t)
    y = np.asarray(y, dtype=float)
    inside = (y > 0) & (y < 1)
    ys = np.where(inside, y, 0.5)
    logd = (a - 1.0) * np.log(ys) + (b - 1.0) * np.log1p(-ys) - ln_beta(a, b)
    out = np.where(inside, np.exp(logd), 0.0)
    return float(out) if out.ndim == 0 else out


def bridge_moment(n: int, t: float, params: ModelParams) -> float:
    if not 0 <= t <= params.T:
        raise DomainError("bridge_moment requires 0 <= t <= T")
    return pochhammer(params.m * t, n) / pochhammer(params.mT, n)


def bridge_central_moment(n: int, t: float, params: ModelParams) -> float:
    """Central moment via the terminating hypergeometric sum F(-n, m t; m T; T/t)."""
    if not 0 < t <= params.T:
        raise DomainError("bridge_central_moment requires 0 < t <= T")
    a, c, z = params.m * t, params.mT, params.T / t
    total = 0.0
    for k in range(n + 1):
        total += pochhammer(-n, k) * pochhammer(a, k) * z ** k / (math.factorial(k) * pochhammer(c, k))
    return (-t / params.T) ** n * total


def _validate_grid(times, params: ModelParams) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise DomainError("bridge grid needs at least two times")
    if times[0] < 0 or not math.isclose(times[-1], params.T, rel_tol=0, abs_tol=1e-14):
        raise DomainError("bridge grid must start at s >= 0 and end at T")
    if np.any(np.diff(times) <= 0):
        raise DomainError("bridge grid must increase strictly")
    times = times.copy()
    times[-1] = params.T
    return times


def sample_bridge_path(times, params: ModelParams, rng: np.random.Generator,
                       n_paths: int | None = None) -> BridgePath:
    """Sample a standard gamma bridge over ``[times[0], T]`` on the given grid.

    With ``times[0] == 0`` this is ``gamma_tT``; with ``times[0] = s > 0`` it
    is the restarted bridge ``delta_tT`` over ``[s, T]``.
    """
    times = _validate_grid(times, params)
    size = () if n_paths is None else (n_paths,)
    n = times.size
    log_rem = np.empty(size + (n,))
    log_rem[..., 0] = 0.0
    for i in range(n - 1):
        t_next = times[i + 1]
        if i == n - 2:
            log_rem[..., i + 1] = -np.inf
            break
        log_a = sample_log_gamma(params.m * (t_next - times[i]), rng, size=size)
        log_b = sample_log_gamma(params.m * (params.T - t_next), rng, size=size)
        log_rem[..., i + 1] = log_rem[..., i] + log_b - np.logaddexp(log_a, log_b)
    values = -np.expm1(log_rem) + 0.0  # no negative zeros
    return BridgePath(times, values, log_rem)


def sample_bridge_marginal(t: float, params: ModelParams, rng: np.random.Generator,
                           size=None) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``gamma_tT`` directly; returns ``(values, log(1 - values))``."""
    _check_interior(t, params)
    log_a = sample_log_gamma(params.m * t, rng, size=size)
    log_b = sample_log_gamma(params.m * (params.T - t), rng, size=size)
    log_rem = log_b - np.logaddexp(log_a, log_b)
    return -np.expm1(log_rem), log_rem


def decompose_at(times, xi, s: float, X_T: float) -> BridgeDecomposition:
    """Split a gains path at grid time ``s`` into ``xi_s`` and a bridge over ``[s, T]``."""
    times = np.asarray(times, dtype=float)
    xi = np.asarray(xi, dtype=float)
    hits = np.flatnonzero(times == s)
    if hits.size != 1:
        raise DomainError(f"s={s!r} is not a grid time")
    if not X_T > 0 or not math.isclose(xi[-1], X_T, rel_tol=1e-12):
        raise DomainError("X_T must be positive and equal the terminal gain")
    i = int(hits[0])
    xi_s = float(xi[i])
    Z_T = X_T - xi_s
    if i == times.size - 1:
        # s = T: everything has been revealed
        delta = BridgePath(times[i:], np.ones(1))
    elif Z_T <= 0.0:
        raise DomainError("xi_s must stay below X_T before the terminal time")
    else:
        delta_vals = (xi[i:] - xi_s) / Z_T
        delta_vals[0] = 0.0
        delta_vals[-1] = 1.0
        delta = BridgePath(times[i:], delta_vals)
    return BridgeDecomposition(s, xi_s, Z_T, delta)
