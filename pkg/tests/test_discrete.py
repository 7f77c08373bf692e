from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.integrate import IntegrationWarning

from conftest import zscore
from gammabridge import (ContinuousDensity, DiscountCurve, DiscreteAtoms, MarketState, ModelParams,
                         make_rng, discrete, pricing)
from gammabridge.bridge import bridge_density, sample_bridge_path
from gammabridge.discrete import CaseTag
from gammabridge.errors import DomainError, NoMassError
from gammabridge.oracle_mc import mc_option

CURVE = DiscountCurve.flat(0.05)
G2 = ModelParams(2.0, 1.0, 1.0)
FIG1 = DiscreteAtoms(((1.0, 0.5), (2.0, 0.2), (3.0, 0.2), (4.0, 0.1)))
BINARY = DiscreteAtoms(((1.0, 0.6), (3.0, 0.4)))


def gaussian_mollifier(atoms: DiscreteAtoms, rel_width: float = 1e-4) -> ContinuousDensity:
    """Atoms replaced by normals with sd ``rel_width * x_i``, truncated at zero."""
    xs, ps = atoms.xs, atoms.ps
    sds = rel_width * xs

    def log_density(x):
        terms = [math.log(p) - 0.5 * ((x - c) / s) ** 2 - math.log(s * math.sqrt(2 * math.pi))
                 for c, p, s in zip(xs, ps, sds)]
        return float(np.logaddexp.reduce(terms))

    return ContinuousDensity(density=lambda x: math.exp(log_density(x)), log_density=log_density,
                             length_scale=1.0, edge_exponent=math.inf, support_lower=0.0,
                             breakpoints=tuple(float(c + k * s) for c, s in zip(xs, sds)
                                               for k in (-10, -4, -1, 0, 1, 4, 10)))


# --------------------------------------------------------------------------- #
# value
# --------------------------------------------------------------------------- #

def test_value_at_origin_is_discounted_mean():
    v = discrete.value_discrete(MarketState(0, 0), FIG1, G2, CURVE)
    assert v.price == pytest.approx(CURVE.P(0, 1) * 1.9, rel=1e-14)
    assert v.method == "closed_form"


@pytest.mark.parametrize("t", [0.25, 0.75])
def test_value_single_reachable_atom(t):
    v = discrete.value_discrete(MarketState(t, 3.5), FIG1, G2, CURVE).price
    assert v == pytest.approx(CURVE.P(t, 1) * 4.0, rel=1e-14)


def test_value_above_max_atom_is_error():
    with pytest.raises(NoMassError):
        discrete.value_discrete(MarketState(0.5, 4.2), FIG1, G2, CURVE)


def test_value_formula_direct():
    t, xi = 0.4, 1.3
    b = 2.0 * (1 - t)
    xs, ps = FIG1.xs, FIG1.ps
    m = xs > xi
    w = ps[m] * xs[m] ** (1 - 2.0) * (xs[m] - xi) ** (b - 1)
    want = CURVE.P(t, 1) * float(w @ xs[m] / w.sum())
    assert discrete.value_discrete(MarketState(t, xi), FIG1, G2, CURVE).price == pytest.approx(want, rel=1e-13)


def test_value_log_domain_survives_large_horizon_shape():
    params = ModelParams(400.0, 1.0, 1.0)
    v = discrete.value_discrete(MarketState(0.3, 1.5), FIG1, params, CURVE).price
    assert math.isfinite(v) and CURVE.P(0.3, 1) * 2.0 <= v <= CURVE.P(0.3, 1) * 4.0


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_value_terminal_limit_recovers_atom(k):
    t = 1.0 - 1e-4
    rng = make_rng(10 + k)
    path = sample_bridge_path(np.array([0.0, 0.5, t, 1.0]), G2, rng, n_paths=2000)
    x = FIG1.xs[k]
    idx = np.full(2000, k)
    exact = discrete.reserve_from_bridge(t, idx, path.log_remaining[:, 2], FIG1, G2, CURVE)
    # a bridge may still be visibly short of 1 at T - 1e-4 (remainder ~ U^(1/(m(T-t))))
    assert np.mean(np.abs(exact - x) <= 1e-3 * x) >= 0.99
    assert np.median(np.abs(exact - x)) <= 1e-5 * x
    # the plain gain representation agrees wherever the remainder is resolvable
    xi = x * path.values[:, 2]
    ok = xi < x
    direct = discrete.reserve_discrete(t, xi[ok], FIG1, G2, CURVE)
    assert np.allclose(direct, exact[ok], rtol=1e-9)


def test_reserve_vectorized_matches_scalar():
    ys = np.linspace(0.0, 3.9, 17)
    vec = discrete.reserve_discrete(0.6, ys, FIG1, G2, CURVE)
    for y, v in zip(ys, vec):
        assert v == pytest.approx(discrete.value_discrete(MarketState(0.6, float(y)), FIG1, G2, CURVE).price,
                                  rel=1e-15)


@pytest.mark.parametrize("t", [0.25, 0.75])
def test_shape_on_dense_grid(t):
    ys = np.linspace(0.0, 3.999, 4000)
    S = discrete.reserve_discrete(t, ys, FIG1, G2, CURVE)
    if G2.m * (1 - t) > 1:
        assert np.all(np.diff(S) >= -1e-13)
    else:
        for lo, hi in zip(FIG1.xs[:-1], FIG1.xs[1:]):
            seg = S[(ys > lo) & (ys < hi)]
            assert np.all(np.diff(seg) <= 1e-13)


def test_atom_limit_consistency():
    nearly = DiscreteAtoms(((1.0, 1e-9), (2.0, 1.0 - 2e-9), (3.0, 1e-9)))
    v = discrete.value_discrete(MarketState(0.4, 0.5), nearly, G2, CURVE).price
    assert v == pytest.approx(CURVE.P(0.4, 1) * 2.0, rel=1e-7)


@pytest.mark.parametrize("t, xi", [(0.25, 0.5), (0.25, 1.5), (0.25, 2.5), (0.75, 0.5), (0.75, 2.5)])
def test_mollification_consistency(t, xi):
    a = pricing.value(MarketState(t, xi), gaussian_mollifier(FIG1), G2, CURVE).price
    b = discrete.value_discrete(MarketState(t, xi), FIG1, G2, CURVE).price
    assert a == pytest.approx(b, rel=1e-3)


# --------------------------------------------------------------------------- #
# Arrow-Debreu
# --------------------------------------------------------------------------- #

def test_ad_zero_above_atoms():
    assert discrete.ad_discrete(0.5, 4.0, FIG1, G2, CURVE) == 0.0
    assert discrete.ad_discrete(0.5, 5.0, FIG1, G2, CURVE) == 0.0


@pytest.mark.parametrize("t", [0.25, 0.5, 0.75])
def test_ad_normalization(t):
    val, _ = discrete.ad_integral_discrete(0.0, t, lambda y: 1.0, MarketState(0, 0), FIG1, G2, CURVE)
    assert val == pytest.approx(CURVE.P(0, t), abs=1e-6)


@pytest.mark.parametrize("y", [0.3, 1.1, 1.9])
def test_ad_single_atom_is_scaled_bridge(y):
    c, t = 2.0, 0.4
    point = DiscreteAtoms(((c, 1.0),))
    want = CURVE.P(0, t) / c * bridge_density(y / c, t, G2)
    assert discrete.ad_discrete(t, y, point, G2, CURVE) == pytest.approx(want, rel=1e-12)


def test_ad_forward_start_normalization():
    val, _ = discrete.ad_integral_discrete(0.3, 0.6, lambda y: 1.0, MarketState(0.3, 0.7), FIG1, G2, CURVE)
    assert val == pytest.approx(CURVE.P(0.3, 0.6), abs=1e-6)


# --------------------------------------------------------------------------- #
# critical value
# --------------------------------------------------------------------------- #

@pytest.mark.parametrize("t, K", [(0.0, 1.2), (0.3, 1.2), (0.3, 2.6), (0.45, 2.0)])
def test_binary_critical_value_matches_scan(t, K):
    if t == 0.0:
        with pytest.raises(DomainError):
            discrete.critical_value_discrete(t, K, BINARY, G2, CURVE)
        return
    closed = discrete.binary_critical_value(t, K, BINARY, G2, CURVE)
    scan = discrete.critical_value_discrete(t, K, BINARY, G2, CURVE).y_star
    assert closed == pytest.approx(scan, rel=1e-9, abs=1e-12)


def test_binary_theta_formula():
    t, K = 0.3, 2.0
    P = CURVE.P(t, 1)
    (x0, p0), (x1, p1) = (1.0, 0.6), (3.0, 0.4)
    theta = (p1 * (K - P * x1) / (p0 * (P * x0 - K)) * (x1 / x0) ** (1 - 2.0)) ** (1 / (2.0 * (1 - t) - 1))
    want = (theta * x1 - x0) / (theta - 1)
    assert discrete.binary_critical_value(t, K, BINARY, G2, CURVE) == pytest.approx(want, rel=1e-12)


def test_binary_always_in_the_money_sentinel():
    # S(t, 0) is above K: theta >= x0/x1
    assert discrete.binary_critical_value(0.3, 1.0, BINARY, G2, CURVE) == 0.0


def test_binary_requires_large_shape():
    with pytest.raises(DomainError):
        discrete.binary_critical_value(0.75, 2.0, BINARY, G2, CURVE)


@given(st.floats(0.05, 0.45), st.floats(1.7, 3.7))
def test_increasing_tag_when_shape_exceeds_one(t, K):
    cv = discrete.critical_value_discrete(t, K, FIG1, G2, CURVE)
    assert cv.tag == CaseTag("IncreasingAtRoot")


def test_root_inside_cusp_below_atom_stays_increasing():
    # m(T - t) = 1.125: S is continuous but rises like (x_k - y)^(1/8) just below x_k
    t, K = 0.4375, 2.5
    cv = discrete.critical_value_discrete(t, K, FIG1, G2, CURVE)
    assert cv.tag == CaseTag("IncreasingAtRoot") and abs(cv.y_star - 1.0) < 1e-12
    a = discrete.option_discrete(t, K, FIG1, G2, CURVE).price
    with warnings.catch_warnings():
        # the in-the-money piece below x_1 is only ~1e-14 wide
        warnings.simplefilter("ignore", IntegrationWarning)
        b = discrete.option_discrete_quadrature(t, K, FIG1, G2, CURVE).price
    assert a == pytest.approx(b, rel=1e-8)


def test_fig1_midrange_root():
    t, K = 0.25, 2.5
    cv = discrete.critical_value_discrete(t, K, FIG1, G2, CURVE)
    assert 0 < cv.y_star < 4
    S = discrete.value_discrete(MarketState(t, cv.y_star), FIG1, G2, CURVE).price
    assert S == pytest.approx(K, rel=1e-8)


def test_case_tags_below_unit_shape():
    P = CURVE.P(0.75, 1)
    assert discrete.critical_value_discrete(0.75, 1.3, FIG1, G2, CURVE).tag == CaseTag("RootAtAtom", 0)
    dec = discrete.critical_value_discrete(0.75, 2.06, FIG1, G2, CURVE)
    assert dec.tag == CaseTag("DecreasingAtRoot")
    assert len(dec.itm) == 2 and dec.itm[1][0] == 2.0
    assert discrete.value_discrete(MarketState(0.75, dec.y_star), FIG1, G2, CURVE).price == \
        pytest.approx(2.06, rel=1e-8)
    assert P * 1.0 < 2.06 < P * 4.0


def test_case_tag_rejects_unknown():
    with pytest.raises(DomainError):
        CaseTag("Sideways")
    assert str(CaseTag("RootAtAtom", 2)) == "RootAtAtom(2)"


def test_never_in_the_money_sentinel():
    cv = discrete.critical_value_discrete(0.5, 5.0, FIG1, G2, CURVE)
    assert cv.y_star == math.inf and cv.itm == ()


# --------------------------------------------------------------------------- #
# options
# --------------------------------------------------------------------------- #

@pytest.mark.parametrize("t", [0.25, 0.75])
def test_option_zero_strike_is_discounted_mean(t):
    c = discrete.option_discrete(t, 0.0, FIG1, G2, CURVE).price
    assert c == pytest.approx(CURVE.P(0, 1) * 1.9, rel=1e-12)


@pytest.mark.parametrize("t, K", [(0.3, 1.2), (0.3, 2.0), (0.4, 2.5)])
def test_binary_option_closed_form(t, K):
    a = discrete.option_binary(t, K, BINARY, G2, CURVE).price
    b = discrete.option_discrete(t, K, BINARY, G2, CURVE).price
    assert a == pytest.approx(b, rel=1e-10)


@pytest.mark.parametrize("t, K", [(0.25, 2.5), (0.25, 3.3),      # increasing at root
                                  (0.75, 1.3), (0.75, 2.6),      # root at an atom
                                  (0.75, 1.03), (0.75, 2.06), (0.75, 3.08)])  # decreasing at root
def test_option_closed_form_matches_quadrature(t, K):
    a = discrete.option_discrete(t, K, FIG1, G2, CURVE).price
    b = discrete.option_discrete_quadrature(t, K, FIG1, G2, CURVE).price
    assert a == pytest.approx(b, rel=1e-8)


def test_option_forward_start_matches_quadrature():
    a = discrete.option_discrete(0.6, 2.0, FIG1, G2, CURVE, s=0.3, xi_s=0.9).price
    b = discrete.option_discrete_quadrature(0.6, 2.0, FIG1, G2, CURVE, s=0.3, xi_s=0.9).price
    assert a == pytest.approx(b, rel=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize("t, K", [(0.25, 2.5), (0.75, 1.3), (0.75, 2.06)])
def test_option_matches_mc(t, K):
    est = mc_option(0.0, t, K, FIG1, G2, CURVE, 1_000_000, make_rng(int(100 * t + 10 * K)))
    c = discrete.option_discrete(t, K, FIG1, G2, CURVE).price
    assert abs(est.estimate - c) < 4 * est.std_error


@given(st.floats(0.05, 0.95), st.floats(0.5, 4.0))
def test_option_bounds(t, K):
    c = discrete.option_discrete(t, K, FIG1, G2, CURVE).price
    S0 = CURVE.P(0, 1) * 1.9
    assert max(0.0, S0 - CURVE.P(0, t) * K) - 1e-12 <= c <= S0 + 1e-12


# --------------------------------------------------------------------------- #
# stop-loss and re-initialization
# --------------------------------------------------------------------------- #

def test_stop_loss_matches_posterior_mc():
    t, xi, K = 0.4, 1.2, 2.5
    w = discrete.posterior_weights(t, xi, FIG1, G2)
    want = CURVE.P(t, 1) * float(w @ np.maximum(FIG1.xs - K, 0))
    assert discrete.stop_loss_discrete(MarketState(t, xi), K, FIG1, G2, CURVE).price == pytest.approx(want, rel=1e-12)
    X = FIG1.xs[make_rng(7).choice(4, 200_000, p=w)]
    assert zscore(CURVE.P(t, 1) * np.maximum(X - K, 0), want) < 4


def test_posterior_weights_sum_to_one():
    for s, xi in [(0.0, 0.0), (0.2, 0.3), (0.7, 2.5), (0.7, 3.0)]:
        w = discrete.posterior_weights(s, xi, FIG1, G2)
        assert w.sum() == pytest.approx(1.0, abs=1e-14) and np.all(w >= 0)
        assert np.all(w[FIG1.xs < xi] == 0)


@given(st.floats(0.05, 0.5), st.floats(0.05, 0.4), st.floats(0.0, 1.5), st.floats(0.0, 1.5))
def test_reinitialization_identity(s, dt, xi_s, eta):
    t = s + dt
    # within a few ulps of an atom the kernel (x - xi)^(m(T-t)-1) is ill-conditioned,
    # and the two representations round x - xi differently
    assume(xi_s + eta < 4.0 and np.min(np.abs(FIG1.xs - (xi_s + eta))) > 1e-9)
    a = discrete.reinitialized_value_discrete(s, xi_s, eta, t, FIG1, G2, CURVE).price
    b = discrete.value_discrete(MarketState(t, xi_s + eta), FIG1, G2, CURVE).price
    assert a == pytest.approx(b, rel=1e-10)
