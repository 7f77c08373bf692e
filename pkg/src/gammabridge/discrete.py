"""Pricing when ``X_T`` takes finitely many values.

With atoms ``x_i`` and probabilities ``p_i`` the reserve is a ratio of
finite sums with weights

    w_i(y) = p_i x_i^(1 - mT) (x_i - y)^(m(T-t) - 1) 1{x_i > y}.

``S(t, .)`` is increasing when ``m (T - t) > 1``.  When ``m (T - t) < 1`` it
decreases on every open segment between consecutive atoms and jumps up at
each atom.  Option prices therefore integrate the beta law of ``xi_t`` over
the set where ``S(t, .) >= K``.  That set is a finite union of intervals,
so every term is a difference of complementary incomplete beta values.

A gain exactly equal to an atom is read as the limit from below; at the
largest atom this gives ``S = P_tT x_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, NoMassError
from .gamma_model import ModelParams
from .market import DiscountCurve, MarketState, PriceResult
from .priors import DiscreteAtoms
from .specfun import comp_beta, ln_beta

__all__ = [
    "CaseTag",
    "CriticalValue",
    "value_discrete",
    "reserve_discrete",
    "reserve_from_bridge",
    "posterior_weights",
    "ad_discrete",
    "ad_integral_discrete",
    "critical_value_discrete",
    "binary_critical_value",
    "option_discrete",
    "option_binary",
    "option_discrete_quadrature",
    "stop_loss_discrete",
    "reinitialized_value_discrete",
]

_SNAP = 1e-10
_QUAD = dict(epsabs=1e-13, epsrel=1e-11, limit=200)


@dataclass(frozen=True)
class CaseTag:
    """``IncreasingAtRoot``, ``RootAtAtom`` (with atom index ``k``) or ``DecreasingAtRoot``."""

    kind: str
    k: int | None = None

    def __post_init__(self):
        if self.kind not in ("IncreasingAtRoot", "RootAtAtom", "DecreasingAtRoot"):
            raise DomainError(f"unknown case tag {self.kind!r}")

    def __str__(self) -> str:
        return f"RootAtAtom({self.k})" if self.kind == "RootAtAtom" else self.kind


@dataclass(frozen=True)
class CriticalValue:
    """``y_star`` (``0``/``inf`` sentinels), its case tag and the in-the-money set."""

    y_star: float
    tag: CaseTag
    itm: tuple[tuple[float, float], ...]


def _base(atoms: DiscreteAtoms, H: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(atoms.ps) + (1.0 - H) * np.log(atoms.xs)


def _ratio_rows(xs, logw, pinned, P):
    """Weighted mean of ``xs`` per row; ``pinned`` rows collapse onto one atom."""
    out = np.empty(logw.shape[0])
    has_pin = pinned >= 0
    out[has_pin] = xs[pinned[has_pin]]
    rest = ~has_pin
    if rest.any():
        lw = logw[rest]
        top = lw.max(axis=1)
        if np.any(top == -np.inf):
            raise NoMassError("no atom above the observed gain")
        w = np.exp(lw - top[:, None])
        out[rest] = (w @ xs) / w.sum(axis=1)
    return P * out


def _log_weights(xs, base, beta, log_d, zero, pos):
    """Row-wise log weights given ``log(x_i - y)`` and the sign pattern of ``x_i - y``."""
    n = xs.size
    with np.errstate(invalid="ignore"):
        logw = np.where(pos, base + (beta - 1.0) * np.where(pos, log_d, 0.0), -np.inf)
    pinned = np.full(logw.shape[0], -1)
    rows, cols = np.nonzero(zero)
    for r, c in zip(rows, cols):
        if beta < 1.0 or c == n - 1:
            pinned[r] = c
        elif beta == 1.0:
            logw[r, c] = base[c]
    return logw, pinned


def reserve_discrete(t: float, xi, atoms: DiscreteAtoms, params: ModelParams,
                     curve: DiscountCurve) -> np.ndarray:
    """Vectorized ``S(t, xi)`` for ``0 <= t < T``."""
    if not 0 <= t < params.T:
        raise DomainError("reserve_discrete requires 0 <= t < T")
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    xs = atoms.xs
    d = xs[None, :] - xi_arr[:, None]
    pos = d > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_d = np.log(np.where(pos, d, 1.0))
    logw, pinned = _log_weights(xs, _base(atoms, params.mT), params.m * (params.T - t),
                                log_d, d == 0, pos)
    out = _ratio_rows(xs, logw, pinned, curve.P(t, params.T))
    return out.reshape(np.shape(xi)) if np.ndim(xi) else out


def reserve_from_bridge(t: float, atom_index, log_remaining, atoms: DiscreteAtoms,
                        params: ModelParams, curve: DiscountCurve) -> np.ndarray:
    """Reserve along paths with ``X_T = x_k`` and ``log(1 - gamma_tT)`` known.

    Near ``T`` the gain ``x_k (1 - gamma_tT)`` rounds onto the atom; the
    gap ``x_k - xi_t = x_k exp(log_remaining)`` is rebuilt in logs here.
    """
    if not 0 <= t < params.T:
        raise DomainError("reserve_from_bridge requires 0 <= t < T")
    idx = np.atleast_1d(np.asarray(atom_index, dtype=int))
    lr = np.atleast_1d(np.asarray(log_remaining, dtype=float))
    xs = atoms.xs
    xk = xs[idx]
    gap = xk * np.exp(lr)
    d = (xs[None, :] - xk[:, None]) + gap[:, None]
    own = np.arange(xs.size)[None, :] == idx[:, None]
    d = np.where(own, gap[:, None], d)
    pos = d > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_d = np.where(own, np.log(xk)[:, None] + lr[:, None], np.log(np.where(pos, d, 1.0)))
    logw, pinned = _log_weights(xs, _base(atoms, params.mT), params.m * (params.T - t),
                                log_d, d == 0, pos)
    return _ratio_rows(xs, logw, pinned, curve.P(t, params.T))


def value_discrete(state: MarketState, atoms: DiscreteAtoms, params: ModelParams,
                   curve: DiscountCurve) -> PriceResult:
    if not 0 <= state.t <= params.T:
        raise DomainError("value_discrete requires 0 <= t <= T")
    if state.t == params.T:
        return PriceResult(state.xi, 0.0, None, "closed_form")
    if state.xi > atoms.xs[-1]:
        raise NoMassError(f"xi={state.xi!r} lies above the largest atom")
    price = float(reserve_discrete(state.t, np.array([state.xi]), atoms, params, curve)[0])
    return PriceResult(price, 0.0, None, "closed_form")


def posterior_weights(s: float, xi_s: float, atoms: DiscreteAtoms, params: ModelParams) -> np.ndarray:
    """Probabilities of each atom given ``xi_s``."""
    if s == 0.0 and xi_s == 0.0:
        ps = atoms.ps
        return ps / ps.sum()
    xs = atoms.xs
    d = xs - xi_s
    pos = d > 0
    with np.errstate(divide="ignore"):
        log_d = np.log(np.where(pos, d, 1.0))
    logw, pinned = _log_weights(xs, _base(atoms, params.mT), params.m * (params.T - s),
                                log_d[None, :], (d == 0)[None, :], pos[None, :])
    if pinned[0] >= 0:
        w = np.zeros(xs.size)
        w[pinned[0]] = 1.0
        return w
    lw = logw[0]
    if lw.max() == -np.inf:
        raise NoMassError("no atom above xi_s")
    w = np.exp(lw - lw.max())
    return w / w.sum()


# --------------------------------------------------------------------------- #
# Arrow-Debreu density
# --------------------------------------------------------------------------- #

def _ad_setup(s, t, xi_s, atoms, params, curve):
    if not 0 <= s < t < params.T:
        raise DomainError("discrete Arrow-Debreu prices require 0 <= s < t < T")
    a = params.m * (t - s)
    b = params.m * (params.T - t)
    base = _base(atoms, params.mT)
    xs = atoms.xs
    above = xs > xi_s
    if not above.any():
        raise NoMassError("no atom above xi_s")
    log_den = special.logsumexp(base[above] + (params.m * (params.T - s) - 1.0)
                                * np.log(xs[above] - xi_s))
    const = math.log(curve.P(s, t)) - ln_beta(a, b) - log_den
    return a, b, base, const


def ad_discrete(t: float, y: float, atoms: DiscreteAtoms, params: ModelParams,
                curve: DiscountCurve, s: float = 0.0, xi_s: float = 0.0) -> float:
    """State-price density of ``xi_t`` at ``y``, seen from ``(s, xi_s)``."""
    a, b, base, const = _ad_setup(s, t, xi_s, atoms, params, curve)
    xs = atoms.xs
    if y <= xi_s or y >= xs[-1]:
        return 0.0
    above = xs > y
    terms = base[above] + (b - 1.0) * np.log(xs[above] - y)
    return float(np.exp(const + (a - 1.0) * math.log(y - xi_s) + special.logsumexp(terms)))


def ad_integral_discrete(s: float, t: float, g: Callable[[float], float], state_s: MarketState,
                         atoms: DiscreteAtoms, params: ModelParams, curve: DiscountCurve,
                         points=()) -> tuple[float, float]:
    """``int A_st(y) g(y) dy`` by quadrature between atoms.

    Integrable singularities at ``xi_s`` (when ``m(t-s) < 1``) and at each
    atom (when ``m(T-t) < 1``) are moved into QUADPACK's algebraic weight.
    ``points`` are extra breakpoints such as discontinuities of ``g``.
    """
    xi_s = state_s.xi
    a, b, base, const = _ad_setup(s, t, xi_s, atoms, params, curve)
    xs = atoms.xs
    edges = [xi_s] + [float(x) for x in xs if x > xi_s]
    extra = sorted(float(p) for p in points if xi_s < p < xs[-1])
    total = err = 0.0
    for u, v in zip(edges[:-1], edges[1:]):
        k = int(np.flatnonzero(xs == v)[0])
        cuts = [u] + [p for p in extra if u < p < v] + [v]
        left_sing = u == xi_s and a < 1.0
        right_sing = b < 1.0

        def f(y, alpha, beta_w, k=k):
            # atoms below x_k sit at or left of u, so only i >= k are active
            gap = xs[k:] - y
            terms = base[k:] + special.xlogy(b - 1.0, gap)
            if beta_w:
                terms[1:] += special.xlogy(1.0 - b, gap[0])
                terms[0] = base[k]
            tot = special.logsumexp(terms)
            if tot == -np.inf:
                return 0.0
            lead = special.xlogy(a - 1.0 - alpha, y - xi_s)
            return math.exp(const + lead + tot) * g(y)

        for j, (lo, hi) in enumerate(zip(cuts[:-1], cuts[1:])):
            alpha = a - 1.0 if (left_sing and j == 0) else 0.0
            beta_w = right_sing and j == len(cuts) - 2
            wv = (alpha, b - 1.0 if beta_w else 0.0)
            fn = (lambda y, al=alpha, bw=beta_w: f(y, al, bw))
            if wv != (0.0, 0.0):
                res = integrate.quad(fn, lo, hi, weight="alg", wvar=wv, **_QUAD)
            else:
                res = integrate.quad(fn, lo, hi, **_QUAD)
            total += res[0]
            err += res[1]
    return total, err


# --------------------------------------------------------------------------- #
# Critical value and in-the-money set
# --------------------------------------------------------------------------- #

def _segment_value(y: float, k: int, xs, base, beta, P) -> float:
    """Reserve at ``y`` using only atoms ``i >= k`` (``y <= x_k``)."""
    d = xs[k:] - y
    with np.errstate(divide="ignore"):
        lw = base[k:] + special.xlogy(beta - 1.0, np.maximum(d, 0.0))
    if np.any(lw == np.inf):
        return P * float(xs[k])
    top = lw.max()
    if top == -np.inf:
        return P * float(xs[-1])
    w = np.exp(lw - top)
    return P * float(w @ xs[k:] / w.sum())


def critical_value_discrete(t: float, K: float, atoms: DiscreteAtoms, params: ModelParams,
                            curve: DiscountCurve) -> CriticalValue:
    """Locate ``{y : S(t, y) >= K}`` and the critical value that bounds it.

    Each inter-atom segment is monotone, so roots are bracketed by the
    segment's one-sided limits and refined with Brent's method.  The tag
    follows the largest interior root (snapped onto an atom within
    ``1e-10 x_k`` when ``m (T - t) <= 1``).  Without one the tag is the atom where ``S`` jumps
    across ``K``.  The always and never in-the-money sentinels use
    ``y_star = 0`` and ``inf`` with tag ``IncreasingAtRoot``.
    """
    if not 0 < t < params.T:
        raise DomainError("critical_value_discrete requires 0 < t < T")
    xs = atoms.xs
    P = curve.P(t, params.T)
    inc = CaseTag("IncreasingAtRoot")
    if K <= P * xs[0]:
        return CriticalValue(0.0, inc, ((0.0, float(xs[-1])),))
    if K >= P * xs[-1]:
        return CriticalValue(math.inf, inc, ())
    base = _base(atoms, params.mT)
    beta = params.m * (params.T - t)

    intervals = []
    roots = []
    for k in range(xs.size):
        lo = 0.0 if k == 0 else float(xs[k - 1])
        hi = float(xs[k])
        g = (lambda y, k=k: _segment_value(y, k, xs, base, beta, P) - K)
        gl, gr = g(lo), g(hi)
        if gl >= 0 and gr >= 0:
            intervals.append((lo, hi))
        elif gl < 0 and gr < 0:
            continue
        else:
            r = optimize.brentq(g, lo, hi, xtol=1e-14 * max(1.0, hi), rtol=4 * np.finfo(float).eps)
            if gl < 0:
                intervals.append((r, hi))
                roots.append((r, k, "IncreasingAtRoot"))
            else:
                intervals.append((lo, r))
                roots.append((r, k, "DecreasingAtRoot"))

    merged: list[list[float]] = []
    for lo, hi in intervals:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    itm = tuple((float(a), float(b)) for a, b in merged)
    if itm == ((0.0, float(xs[-1])),):
        return CriticalValue(0.0, inc, itm)

    if roots:
        r, k, kind = max(roots)
        # S is continuous at the atoms when beta > 1, so only snap where it jumps
        near = np.flatnonzero(np.abs(xs - r) < _SNAP * xs) if beta <= 1.0 else ()
        if len(near):
            return CriticalValue(float(xs[near[0]]), CaseTag("RootAtAtom", int(near[0])), itm)
        return CriticalValue(float(r), CaseTag(kind), itm)
    y_star = itm[-1][0]
    k = int(np.argmin(np.abs(xs - y_star)))
    return CriticalValue(y_star, CaseTag("RootAtAtom", k), itm)


def binary_critical_value(t: float, K: float, atoms: DiscreteAtoms, params: ModelParams,
                          curve: DiscountCurve) -> float:
    """Closed-form root for two atoms when ``m (T - t) > 1``.

    With ``theta = [p1 (K - P x1) / (p0 (P x0 - K)) (x1/x0)^(1-mT)]^(1/(m(T-t)-1))``
    the root is ``(theta x1 - x0) / (theta - 1)``.  ``theta >= x0/x1`` means
    ``S(t, 0) >= K`` and returns the always in-the-money sentinel 0.
    """
    if len(atoms) != 2:
        raise DomainError("binary closed form needs exactly two atoms")
    beta = params.m * (params.T - t)
    if not beta > 1.0:
        raise DomainError("binary closed form requires m(T - t) > 1")
    (x0, x1), (p0, p1) = atoms.xs, atoms.ps
    P = curve.P(t, params.T)
    if K <= P * x0:
        return 0.0
    if K >= P * x1:
        return math.inf
    log_theta = (math.log(p1 * (K - P * x1) / (p0 * (P * x0 - K)))
                 + (1.0 - params.mT) * math.log(x1 / x0)) / (beta - 1.0)
    theta = math.exp(log_theta)
    # theta = (x0 - y*)/(x1 - y*) falls below x0/x1 only for a root y* > 0
    if theta >= x0 / x1:
        return 0.0
    return (theta * x1 - x0) / (theta - 1.0)


# --------------------------------------------------------------------------- #
# Options and stop-loss
# --------------------------------------------------------------------------- #

def _clip01(z):
    return min(1.0, max(0.0, z))


def option_binary(t: float, K: float, atoms: DiscreteAtoms, params: ModelParams,
                  curve: DiscountCurve) -> PriceResult:
    """Two-atom option price from the binary closed form (requires ``m (T - t) > 1``)."""
    y_star = binary_critical_value(t, K, atoms, params, curve)
    if y_star == math.inf:
        return PriceResult(0.0, 0.0, y_star, "closed_form")
    a, b = params.m * t, params.m * (params.T - t)
    P0T, P0t = curve.P(0.0, params.T), curve.P(0.0, t)
    price = 0.0
    for x, p in zip(atoms.xs, atoms.ps):
        price += p * (P0T * x - P0t * K) * comp_beta(_clip01(y_star / x), a, b)
    return PriceResult(float(price), 0.0, y_star, "closed_form")


def option_discrete(t: float, K: float, atoms: DiscreteAtoms, params: ModelParams,
                    curve: DiscountCurve, s: float = 0.0, xi_s: float = 0.0) -> PriceResult:
    """Call on ``S_t`` struck at ``K``, priced at ``(s, xi_s)``.

    ``C_st = P_st sum_i w_i (P_tT x_i - K) Prob(xi_t in ITM | X_T = x_i)``.
    Given ``x_i``, the quantity ``(xi_t - xi_s) / (x_i - xi_s)`` is
    Beta(m(t-s), m(T-t)), so each interval of the in-the-money set
    contributes a difference of complementary beta values.
    """
    if not 0 <= s < t < params.T:
        raise DomainError("option_discrete requires 0 <= s < t < T")
    if not K >= 0:
        raise DomainError("strike must be nonnegative")
    if (len(atoms) == 2 and s == 0.0 and xi_s == 0.0 and params.m * (params.T - t) > 1.0):
        return option_binary(t, K, atoms, params, curve)
    cv = critical_value_discrete(t, K, atoms, params, curve)
    w = posterior_weights(s, xi_s, atoms, params)
    a, b = params.m * (t - s), params.m * (params.T - t)
    P_st, P_tT = curve.P(s, t), curve.P(t, params.T)
    price = 0.0
    for x, wi in zip(atoms.xs, w):
        if wi == 0.0 or x <= xi_s:
            continue
        prob = 0.0
        for lo, hi in cv.itm:
            if hi <= xi_s or lo >= x:
                continue
            zl = _clip01((lo - xi_s) / (x - xi_s))
            zh = _clip01((hi - xi_s) / (x - xi_s))
            prob += comp_beta(zl, a, b) - comp_beta(zh, a, b)
        price += wi * (P_tT * x - K) * prob
    return PriceResult(float(P_st * price), 0.0, cv.y_star, "closed_form")


def option_discrete_quadrature(t: float, K: float, atoms: DiscreteAtoms, params: ModelParams,
                               curve: DiscountCurve, s: float = 0.0,
                               xi_s: float = 0.0) -> PriceResult:
    """Independent check: ``int A_st(y) (S(t, y) - K)^+ dy`` by quadrature."""
    cv = critical_value_discrete(t, K, atoms, params, curve)
    P = curve.P(t, params.T)
    xs, base, beta = atoms.xs, _base(atoms, params.mT), params.m * (params.T - t)

    def payoff(y):
        k = int(np.searchsorted(xs, y, side="left"))
        if k >= xs.size:
            return 0.0
        return max(_segment_value(y, k, xs, base, beta, P) - K, 0.0)

    cuts = [p for iv in cv.itm for p in iv]
    val, err = ad_integral_discrete(s, t, payoff, MarketState(s, xi_s), atoms, params, curve,
                                    points=cuts)
    return PriceResult(val, err, cv.y_star, "quadrature")


def stop_loss_discrete(state: MarketState, K: float, atoms: DiscreteAtoms, params: ModelParams,
                       curve: DiscountCurve) -> PriceResult:
    if not K >= 0:
        raise DomainError("strike must be nonnegative")
    if not 0 <= state.t <= params.T:
        raise DomainError("stop_loss_discrete requires 0 <= t <= T")
    if state.t == params.T:
        return PriceResult(max(state.xi - K, 0.0), 0.0, None, "closed_form")
    P = curve.P(state.t, params.T)
    if state.xi >= K:
        v = value_discrete(state, atoms, params, curve)
        return PriceResult(v.price - P * K, 0.0, None, "closed_form")
    w = posterior_weights(state.t, state.xi, atoms, params)
    price = P * float(np.dot(w, np.maximum(atoms.xs - K, 0.0)))
    return PriceResult(price, 0.0, None, "closed_form")


def reinitialized_value_discrete(s: float, xi_s: float, eta_t: float, t: float,
                                 atoms: DiscreteAtoms, params: ModelParams,
                                 curve: DiscountCurve) -> PriceResult:
    """Restarted representation: atoms ``x_i - xi_s`` weighted by the law at ``s``."""
    w = posterior_weights(s, xi_s, atoms, params)
    keep = (atoms.xs > xi_s) & (w > 0)
    z_atoms = DiscreteAtoms.from_arrays(atoms.xs[keep] - xi_s, w[keep])
    sub = ModelParams(params.m, params.kappa, params.T - s)
    rel = reserve_discrete(t - s, np.array([eta_t]), z_atoms, sub, DiscountCurve())[0]
    return PriceResult(curve.P(t, params.T) * (xi_s + float(rel)), 0.0, None, "closed_form")
