"""A priori laws for the terminal cash flow ``X_T``.

Three variants are supported: a generic continuous density with explicit
support bounds, finitely many atoms, and the gamma family tied to the
model parameters (mean ``kappa m T``, variance ``kappa^2 m T``).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError
from .gamma_model import ModelParams
from .specfun import QuadratureSpec, integrate_log_tail

__all__ = [
    "ContinuousDensity",
    "DiscreteAtoms",
    "GammaPrior",
    "Prior",
    "ValidationCheck",
    "ValidationReport",
    "lognormal_prior",
    "as_continuous",
    "prior_mean",
    "prior_second_moment",
    "prior_char_fn",
    "validate",
    "prior_from_config",
    "prior_to_config",
]

_TAIL_MASS = 1e-13


@dataclass(frozen=True, eq=False)
class ContinuousDensity:
    """Density ``p`` on ``(support_lower, support_upper)``.

    ``log_density`` (scalar, optional) is preferred by the pricing
    integrals.  ``edge_exponent`` ``c`` declares ``p(x) ~ (x - lower)^c`` at
    the lower edge so normalization and moments absorb that singularity.
    ``breakpoints`` mark narrow features the quadrature must not miss.
    """

    density: Callable[[float], float]
    support_lower: float = 0.0
    support_upper: float = math.inf
    log_density: Callable[[float], float] | None = None
    length_scale: float = 1.0
    edge_exponent: float = 0.0
    breakpoints: tuple[float, ...] = ()
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None
    config: dict | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def logpdf(self, x: float) -> float:
        if not self.support_lower < x < self.support_upper:
            return -math.inf
        if self.log_density is not None:
            return self.log_density(x)
        v = self.density(x)
        return math.log(v) if v > 0 else -math.inf

    def pdf(self, x):
        if isinstance(x, float):
            return math.exp(self.logpdf(x))
        x = np.asarray(x, dtype=float)
        out = np.array([math.exp(self.logpdf(float(v))) for v in x.ravel()]).reshape(x.shape)
        return float(out) if out.ndim == 0 else out

    def effective_upper(self) -> float:
        """Point beyond which the remaining mass is below ``1e-13``."""
        if math.isfinite(self.support_upper):
            return self.support_upper
        if "upper" not in self._cache:
            lo = self.support_lower
            hi = lo + self.length_scale
            while integrate.quad(self.pdf, hi, math.inf, limit=200)[0] >= _TAIL_MASS:
                hi = lo + 2.0 * (hi - lo)
            self._cache["upper"] = hi
        return self._cache["upper"]

    def integrate_power(self, k: float, spec: QuadratureSpec | None = None) -> float:
        """``int x^k p(x) dx`` over the support."""
        key = ("power", k)
        if key not in self._cache:
            c = self.edge_exponent if math.isfinite(self.edge_exponent) else 0.0
            lo = self.support_lower

            def log_f(x):
                lp = self.logpdf(x)
                if lp == -math.inf:
                    return lp
                return lp + (k * math.log(x) if k else 0.0) - c * math.log(x - lo)

            log_v, _ = integrate_log_tail(log_f, lo, c + 1.0, spec, upper=self.support_upper,
                                          scale=self.length_scale, points=self.breakpoints)
            self._cache[key] = math.exp(log_v)
        return self._cache[key]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.sampler is not None:
            return np.asarray(self.sampler(rng, n), dtype=float)
        grid, cdf = self._cdf_table()
        return np.interp(rng.random(n), cdf, grid)

    def _cdf_table(self, n_cells: int = 4096):
        if "cdf" in self._cache:
            return self._cache["cdf"]
        lo = self.support_lower
        hi = self.effective_upper()
        grid = np.unique(np.concatenate([np.linspace(lo, hi, n_cells + 1),
                                         [b for b in self.breakpoints if lo < b < hi]]))
        cells = [integrate.quad(self.pdf, a, b, limit=100)[0] for a, b in zip(grid[:-1], grid[1:])]
        cdf = np.concatenate([[0.0], np.cumsum(cells)])
        cdf /= cdf[-1]
        self._cache["cdf"] = (grid, cdf)
        return grid, cdf


@dataclass(frozen=True)
class DiscreteAtoms:
    """Cash flow taking values ``x_i`` with probabilities ``p_i``."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple((float(x), float(p)) for x, p in self.atoms)
        if not atoms:
            raise DomainError("DiscreteAtoms needs at least one atom")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_arrays(cls, xs, ps) -> "DiscreteAtoms":
        return cls(tuple(zip(xs, ps)))

    @property
    def xs(self) -> np.ndarray:
        return np.array([a[0] for a in self.atoms])

    @property
    def ps(self) -> np.ndarray:
        return np.array([a[1] for a in self.atoms])

    def __len__(self) -> int:
        return len(self.atoms)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.xs[self.sample_index(rng, n)]

    def sample_index(self, rng: np.random.Generator, n: int) -> np.ndarray:
        cdf = np.cumsum(self.ps)
        cdf /= cdf[-1]
        return np.searchsorted(cdf, rng.random(n), side="right")


@dataclass(frozen=True)
class GammaPrior:
    """``X_T ~ Gamma(shape = m T, scale = kappa)`` for the model parameters."""

    params: ModelParams

    def as_continuous(self) -> ContinuousDensity:
        return self._continuous

    @functools.cached_property
    def _continuous(self) -> ContinuousDensity:
        shape, scale = self.params.mT, self.params.kappa
        norm = shape * math.log(scale) + math.lgamma(shape)

        def log_density(x):
            return (shape - 1.0) * math.log(x) - x / scale - norm

        return ContinuousDensity(
            density=lambda x: math.exp(log_density(x)) if x > 0 else 0.0,
            log_density=log_density,
            length_scale=scale * max(1.0, math.sqrt(shape)),
            edge_exponent=shape - 1.0,
            sampler=lambda rng, n: scale * rng.standard_gamma(shape, size=n),
            config=prior_to_config(self),
        )

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.params.kappa * rng.standard_gamma(self.params.mT, size=n)


Prior = Union[ContinuousDensity, DiscreteAtoms, GammaPrior]


def lognormal_prior(mu: float, sigma: float) -> ContinuousDensity:
    if not sigma > 0:
        raise DomainError("lognormal sigma must be positive")
    norm = math.log(sigma) + 0.5 * math.log(2.0 * math.pi)

    def log_density(x):
        lx = math.log(x)
        return -0.5 * ((lx - mu) / sigma) ** 2 - lx - norm

    mean = math.exp(mu + 0.5 * sigma ** 2)
    std = mean * math.sqrt(math.expm1(sigma ** 2))
    return ContinuousDensity(
        density=lambda x: math.exp(log_density(x)) if x > 0 else 0.0,
        log_density=log_density,
        length_scale=std,
        edge_exponent=math.inf,
        sampler=lambda rng, n: rng.lognormal(mu, sigma, size=n),
        config={"type": "lognormal", "mu": mu, "sigma": sigma},
    )


def as_continuous(prior: Prior) -> ContinuousDensity:
    if isinstance(prior, ContinuousDensity):
        return prior
    if isinstance(prior, GammaPrior):
        return prior.as_continuous()
    raise TypeError(f"{type(prior).__name__} has no continuous density")


def prior_mean(prior: Prior, spec: QuadratureSpec | None = None) -> float:
    if isinstance(prior, GammaPrior):
        return prior.params.kappa * prior.params.mT
    if isinstance(prior, DiscreteAtoms):
        return float(np.dot(prior.xs, prior.ps))
    return prior.integrate_power(1.0, spec)


def prior_second_moment(prior: Prior, spec: QuadratureSpec | None = None) -> float:
    if isinstance(prior, GammaPrior):
        mean = prior.params.kappa * prior.params.mT
        return prior.params.kappa * mean + mean ** 2
    if isinstance(prior, DiscreteAtoms):
        return float(np.dot(prior.xs ** 2, prior.ps))
    try:
        value = prior.integrate_power(2.0, spec)
    except QuadratureError as exc:
        raise DomainError("prior has no finite second moment") from exc
    if not math.isfinite(value):
        raise DomainError("prior has no finite second moment")
    return value


def prior_char_fn(prior: Prior, lam: float) -> complex:
    """Characteristic function of ``X_T``; quadrature for continuous priors.

    The range is truncated where the remaining mass drops below ``1e-13``
    and the oscillatory factor is handled by QUADPACK's Fourier weights.
    """
    if isinstance(prior, DiscreteAtoms):
        return complex(np.dot(prior.ps, np.exp(1j * lam * prior.xs)))
    dens = as_continuous(prior)
    if lam == 0.0:
        return 1.0 + 0.0j
    lo, hi = dens.support_lower, dens.effective_upper()
    cuts = [lo] + sorted(b for b in dens.breakpoints if lo < b < hi) + [hi]
    kw = dict(wvar=abs(lam), limit=400, epsabs=1e-14, epsrel=1e-12)
    re = im = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        re += integrate.quad(dens.pdf, a, b, weight="cos", **kw)[0]
        im += integrate.quad(dens.pdf, a, b, weight="sin", **kw)[0]
    return complex(re, math.copysign(1.0, lam) * im)


# --------------------------------------------------------------------------- #
# Validation
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    defect: float = 0.0
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ValidationCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[ValidationCheck]:
        return [c for c in self.checks if not c.passed]


def validate(prior: Prior) -> ValidationReport:
    checks: list[ValidationCheck] = []
    if isinstance(prior, GammaPrior):
        checks.append(ValidationCheck("params", True))
        return ValidationReport(tuple(checks))
    if isinstance(prior, DiscreteAtoms):
        xs, ps = prior.xs, prior.ps
        bad_x = xs[~(xs > 0)]
        checks.append(ValidationCheck("positive_atoms", bad_x.size == 0,
                                      float(-bad_x.min()) if bad_x.size else 0.0,
                                      "X_T must be strictly positive"))
        inc = bool(np.all(np.diff(xs) > 0))
        checks.append(ValidationCheck("increasing_atoms", inc, 0.0 if inc else 1.0))
        neg = ps[ps < 0]
        checks.append(ValidationCheck("nonnegative_probabilities", neg.size == 0,
                                      float(-neg.min()) if neg.size else 0.0))
        defect = abs(float(ps.sum()) - 1.0)
        checks.append(ValidationCheck("normalization", defect <= 1e-12, defect))
        return ValidationReport(tuple(checks))

    checks.append(ValidationCheck("positive_support", prior.support_lower >= 0,
                                  max(0.0, -prior.support_lower)))
    probes = prior.support_lower + prior.length_scale * np.array([1e-3, 0.1, 0.5, 1, 2, 5])
    probes = probes[probes < prior.support_upper]
    dens = np.array([prior.density(float(x)) for x in probes])
    neg = dens[dens < 0]
    checks.append(ValidationCheck("nonnegative_density", neg.size == 0,
                                  float(-neg.min()) if neg.size else 0.0))
    try:
        total = prior.integrate_power(0.0)
        defect = abs(total - 1.0)
        checks.append(ValidationCheck("normalization", defect <= 1e-8, defect))
    except QuadratureError as exc:
        checks.append(ValidationCheck("normalization", False, math.inf, str(exc)))
    if prior.support_lower < 0:
        checks.append(ValidationCheck("finite_mean", False, math.inf, "support not positive"))
        return ValidationReport(tuple(checks))
    try:
        mean = prior.integrate_power(1.0)
        checks.append(ValidationCheck("finite_mean", math.isfinite(mean), 0.0))
    except QuadratureError as exc:
        checks.append(ValidationCheck("finite_mean", False, math.inf, str(exc)))
    return ValidationReport(tuple(checks))


# --------------------------------------------------------------------------- #
# Config round-trip
# --------------------------------------------------------------------------- #

def prior_from_config(cfg: dict) -> Prior:
    kind = cfg.get("type")
    if kind == "gamma":
        return GammaPrior(ModelParams(float(cfg["m"]), float(cfg["kappa"]), float(cfg["T"])))
    if kind == "discrete":
        return DiscreteAtoms(tuple((float(x), float(p)) for x, p in cfg["atoms"]))
    if kind == "lognormal":
        return lognormal_prior(float(cfg["mu"]), float(cfg["sigma"]))
    raise DomainError(f"unknown prior type {kind!r}")


def prior_to_config(prior: Prior) -> dict:
    if isinstance(prior, GammaPrior):
        p = prior.params
        return {"type": "gamma", "m": p.m, "kappa": p.kappa, "T": p.T}
    if isinstance(prior, DiscreteAtoms):
        return {"type": "discrete", "atoms": [list(a) for a in prior.atoms]}
    if prior.config is None:
        raise DomainError("this continuous prior has no config representation")
    return dict(prior.config)
