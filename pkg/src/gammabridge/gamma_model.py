"""Standard and scaled gamma processes.

A standard gamma process with growth rate ``m`` has independent increments
and ``gamma_t ~ Gamma(shape=m t, scale=1)``; the scaled process multiplies
it by ``kappa``.  Sampling always takes an explicit
:class:`numpy.random.Generator`; use :func:`make_rng` / :func:`split_rng` to
obtain reproducible, independent, counter-based (Philox) streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError
from .specfun import pochhammer

__all__ = [
    "ModelParams",
    "GammaPath",
    "make_rng",
    "split_rng",
    "gamma_density",
    "log_gamma_density",
    "char_fn_gamma",
    "sample_gamma_variate",
    "sample_log_gamma",
    "sample_gamma_path",
    "exp_gamma_martingale",
    "scaled_measure_density",
    "laguerre_assoc",
]


@dataclass(frozen=True)
class ModelParams:
    """Growth rate ``m`` (1/time), scale ``kappa`` (cash units), horizon ``T``."""

    m: float
    kappa: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        for name in ("m", "kappa", "T"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"ModelParams.{name} must be a positive finite number, got {v!r}")

    @property
    def mT(self) -> float:
        return self.m * self.T


@dataclass(frozen=True)
class GammaPath:
    """Gamma path(s) on a grid; ``values`` has shape ``(..., len(times))``."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or values.shape[-1] != times.size:
            raise DomainError("GammaPath values must end with an axis matching times")
        if times[0] != 0 or np.any(np.diff(times) <= 0):
            raise DomainError("GammaPath times must start at 0 and increase strictly")
        if np.any(values[..., 0] != 0.0) or np.any(np.diff(values, axis=-1) < 0):
            raise DomainError("GammaPath values must start at 0 and never decrease")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def split_rng(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Independent child streams; the parent stream is advanced."""
    return list(rng.spawn(n))


def _check_shape_scale(shape, scale):
    if np.any(~(np.asarray(shape, dtype=float) > 0)) or np.any(~(np.asarray(scale, dtype=float) > 0)):
        raise DomainError("gamma shape and scale must be positive")


def log_gamma_density(x, shape: float, scale: float):
    _check_shape_scale(shape, scale)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (-shape * math.log(scale) + (shape - 1.0) * np.log(x) - x / scale
               - special.gammaln(shape))
    out = np.where(x > 0, out, -np.inf)
    return float(out) if out.ndim == 0 else out


def gamma_density(x, shape: float, scale: float):
    """Density ``1{x>0} scale^-a x^(a-1) e^(-x/scale) / Gamma(a)``."""
    return np.exp(log_gamma_density(x, shape, scale))


def char_fn_gamma(lam, shape: float, scale: float):
    """``(1 - i scale lam)^(-shape)`` on the principal branch."""
    _check_shape_scale(shape, scale)
    lam = np.asarray(lam, dtype=float)
    out = np.exp(-shape * np.log(1.0 - 1j * scale * lam))
    return complex(out) if out.ndim == 0 else out


def sample_log_gamma(shape, rng: np.random.Generator, size=None):
    """``log`` of standard gamma variates, accurate for tiny shapes.

    Shapes >= 1 use numpy's squeeze/rejection sampler directly; smaller
    shapes use the boost ``G(a) = G(a + 1) U^(1/a)`` evaluated in logs, so
    variates far below the smallest double are still represented.
    """
    shape = np.asarray(shape, dtype=float)
    if np.any(~(shape > 0)):
        raise DomainError("gamma shape must be positive")
    if size is None:
        size = shape.shape
    small = shape < 1.0
    boosted = np.where(small, shape + 1.0, shape)
    g = np.log(rng.standard_gamma(boosted, size=size))
    if np.any(small):
        u = rng.random(size=size)
        g = np.where(small, g + np.log(u) / np.where(small, shape, 1.0), g)
    return g


def sample_gamma_variate(shape: float, scale: float, rng: np.random.Generator, size=None):
    _check_shape_scale(shape, scale)
    out = scale * np.exp(sample_log_gamma(shape, rng, size=size))
    return float(out) if np.ndim(out) == 0 else out


def sample_gamma_path(times, params: ModelParams, rng: np.random.Generator,
                      n_paths: int | None = None) -> GammaPath:
    """Scaled gamma path(s) on ``times`` with independent gamma increments."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or times[0] != 0 or np.any(np.diff(times) <= 0):
        raise DomainError("times must start at 0 and increase strictly")
    shapes = params.m * np.diff(times)
    size = (len(shapes),) if n_paths is None else (n_paths, len(shapes))
    incr = params.kappa * np.exp(sample_log_gamma(np.broadcast_to(shapes, size), rng, size=size))
    values = np.concatenate([np.zeros(size[:-1] + (1,)), np.cumsum(incr, axis=-1)], axis=-1)
    return GammaPath(times, values)


def exp_gamma_martingale(alpha: float, gamma_t, shape_t):
    """``(1 + alpha)^(m t) exp(-alpha gamma_t)`` with ``shape_t = m t``."""
    if not alpha > -1:
        raise DomainError(f"exp_gamma_martingale requires alpha > -1, got {alpha!r}")
    return np.exp(np.asarray(shape_t) * math.log1p(alpha) - alpha * np.asarray(gamma_t))


def scaled_measure_density(gamma_T, params: ModelParams):
    """Likelihood ratio turning the standard process into the kappa-scaled one.

    This is the exponential martingale at ``alpha = (1 - kappa)/kappa``:
    ``kappa^(-m T) exp(-(1 - kappa)/kappa * gamma_T)``.
    """
    alpha = (1.0 - params.kappa) / params.kappa
    return exp_gamma_martingale(alpha, gamma_T, params.mT)


def laguerre_assoc(n: int, k: float, z):
    """Associated Laguerre polynomial ``L_n^(k)(z)`` by its explicit finite sum.

    ``L_n^(k)(z) = sum_j (-1)^j (k + j + 1)_(n - j) / ((n - j)! j!) z^j``, valid for
    real (including negative) ``k``.
    """
    if n < 0 or int(n) != n:
        raise DomainError("laguerre_assoc requires a nonnegative integer degree")
    n = int(n)
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    for j in range(n + 1):
        coef = (-1) ** j * pochhammer(k + j + 1.0, n - j) / (math.factorial(n - j) * math.factorial(j))
        out = out + coef * z ** j
    return float(out) if out.ndim == 0 else out
