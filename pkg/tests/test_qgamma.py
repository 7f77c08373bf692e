from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from gammabridge import DiscountCurve, GammaPrior, MarketState, ModelParams, make_rng, pricing, qgamma
from gammabridge.errors import DomainError
from gammabridge.oracle_mc import mc_option, sample_gains

CURVE = DiscountCurve.flat(0.05)
PARAMS = ModelParams(2.0, 1.5, 1.0)
PRIOR = GammaPrior(PARAMS)


# --------------------------------------------------------------------------- #
# value and stop-loss
# --------------------------------------------------------------------------- #

def test_value_examples():
    assert qgamma.value_qgamma(MarketState(1.0, 2.7), PARAMS, CURVE).price == 2.7
    v0 = qgamma.value_qgamma(MarketState(0, 0), PARAMS, CURVE)
    assert v0.price == pytest.approx(CURVE.P(0, 1) * 1.5 * 2.0, rel=1e-15)
    assert v0.method == "closed_form" and v0.err_estimate == 0.0
    unit = ModelParams(1.0, 1.0, 1.0)
    assert qgamma.value_qgamma(MarketState(0.5, 0.3), unit, DiscountCurve.flat(0.0)).price == pytest.approx(0.8, abs=1e-15)


def test_stop_loss_zero_strike_is_value():
    st_ = MarketState(0.4, 0.6)
    assert qgamma.stop_loss_qgamma(st_, 0.0, PARAMS, CURVE).price == pytest.approx(
        qgamma.value_qgamma(st_, PARAMS, CURVE).price, rel=1e-14)


def test_stop_loss_decreases_to_zero():
    Ks = np.linspace(0, 60, 121)
    vals = [qgamma.stop_loss_qgamma(MarketState(0.3, 0.5), K, PARAMS, CURVE).price for K in Ks]
    assert np.all(np.diff(vals) <= 1e-15) and vals[-1] < 1e-12


def test_stop_loss_in_the_money_branch():
    st_ = MarketState(0.5, 2.0)
    got = qgamma.stop_loss_qgamma(st_, 1.5, PARAMS, CURVE).price
    assert got == pytest.approx(qgamma.value_qgamma(st_, PARAMS, CURVE).price - CURVE.P(0.5, 1) * 1.5, rel=1e-14)


def test_stop_loss_rejects_horizon():
    with pytest.raises(DomainError):
        qgamma.stop_loss_qgamma(MarketState(1.0, 0.0), 1.0, PARAMS, CURVE)


# --------------------------------------------------------------------------- #
# Arrow-Debreu
# --------------------------------------------------------------------------- #

def test_ad_support_and_normalization():
    st_ = MarketState(0.2, 0.4)
    assert qgamma.ad_qgamma(0.2, 0.7, 0.4, st_, PARAMS, CURVE) == 0.0
    from scipy import integrate
    val = integrate.quad(lambda y: qgamma.ad_qgamma(0.2, 0.7, y, st_, PARAMS, CURVE), 0.4, np.inf)[0]
    assert val == pytest.approx(CURVE.P(0.2, 0.7), rel=1e-9)


def test_ad_closed_form():
    s, t, y, xi_s = 0.1, 0.6, 1.4, 0.2
    a, k = PARAMS.m * (t - s), PARAMS.kappa
    want = CURVE.P(s, t) * k ** (-a) / math.gamma(a) * (y - xi_s) ** (a - 1) * math.exp(-(y - xi_s) / k)
    assert qgamma.ad_qgamma(s, t, y, MarketState(s, xi_s), PARAMS, CURVE) == pytest.approx(want, rel=1e-12)


# --------------------------------------------------------------------------- #
# option
# --------------------------------------------------------------------------- #

def test_option_deep_in_the_money_is_forward_intrinsic():
    s, t, K = 0.2, 0.6, 0.5
    st_ = MarketState(s, 1.0)
    c = qgamma.option_qgamma(s, t, K, st_, PARAMS, CURVE).price
    S_s = qgamma.value_qgamma(st_, PARAMS, CURVE).price
    assert c == pytest.approx(S_s - CURVE.P(s, t) * K, rel=1e-13)


def test_option_critical_value():
    c = qgamma.option_qgamma(0.0, 0.5, 2.5, MarketState(0, 0), PARAMS, CURVE)
    y = c.critical_value
    assert qgamma.value_qgamma(MarketState(0.5, y), PARAMS, CURVE).price == pytest.approx(2.5, rel=1e-14)
    assert qgamma.critical_value_qgamma(0.5, 0.1, PARAMS, CURVE) == 0.0


@given(st.floats(0.0, 0.9), st.floats(0.01, 0.09), st.floats(0.0, 5.0))
def test_option_within_arbitrage_bounds(s, dt, K):
    t = s + dt
    st_ = MarketState(s, 1.5 * s)
    c = qgamma.option_qgamma(s, t, K, st_, PARAMS, CURVE).price
    S_s = qgamma.value_qgamma(st_, PARAMS, CURVE).price
    assert max(0.0, S_s - CURVE.P(s, t) * K) - 1e-12 <= c <= S_s + 1e-12


@pytest.mark.slow
@pytest.mark.parametrize("s, xi_s, t, K", [(0.0, 0.0, 0.4, 2.4), (0.3, 0.9, 0.7, 2.2)])
def test_option_matches_mc(s, xi_s, t, K):
    est = mc_option(s, t, K, PRIOR, PARAMS, CURVE, 1_000_000, make_rng(31),
                    xi_s=xi_s, value_fn=lambda y: CURVE.P(t, 1) * (y + 1.5 * 2.0 * (1 - t)))
    c = qgamma.option_qgamma(s, t, K, MarketState(s, xi_s), PARAMS, CURVE).price
    assert abs(est.estimate - c) < 4 * est.std_error


def test_literal_display_disagrees_with_corrected_form():
    # the literal variant mixes the discounted price S_s into R_s and is far from quadrature
    s, t, K = 0.0, 0.4, 2.4
    st_ = MarketState(s, 0.0)
    corrected = qgamma.option_qgamma(s, t, K, st_, PARAMS, CURVE).price
    literal = qgamma.option_qgamma(s, t, K, st_, PARAMS, CURVE, literal=True).price
    quad = pricing.option_price(s, t, K, st_, PRIOR, PARAMS, CURVE).price
    assert corrected == pytest.approx(quad, rel=1e-7)
    assert abs(literal - quad) > 1e-2 * quad


def test_option_domain():
    with pytest.raises(DomainError):
        qgamma.option_qgamma(0.5, 0.5, 1.0, MarketState(0.5, 0.0), PARAMS, CURVE)
    with pytest.raises(DomainError):
        qgamma.option_qgamma(0.0, 0.5, -1.0, MarketState(0, 0), PARAMS, CURVE)


# --------------------------------------------------------------------------- #
# law identity, covariance, grid agreement with quadrature
# --------------------------------------------------------------------------- #

def test_gains_are_gamma_distributed():
    t = 0.35
    _, xi = sample_gains(t, PRIOR, PARAMS, 100_000, make_rng(32))
    assert stats.kstest(xi, stats.gamma(PARAMS.m * t, scale=PARAMS.kappa).cdf).pvalue > 0.01


def test_increments_uncorrelated():
    assert pricing.increment_covariance(0.2, 0.9, PRIOR, PARAMS) == pytest.approx(0.0, abs=1e-13)


TS = [0.1, 0.3, 0.5, 0.7, 0.9]
XIS = [0.0, 0.4, 1.0, 2.0, 3.5]
KS = [0.3, 1.0, 1.8, 2.7, 4.0]


@pytest.mark.parametrize("t", TS)
def test_grid_value_and_stop_loss_match_quadrature(t):
    for xi, K in itertools.product(XIS, KS):
        st_ = MarketState(t, xi)
        assert pricing.value(st_, PRIOR, PARAMS, CURVE).price == pytest.approx(
            qgamma.value_qgamma(st_, PARAMS, CURVE).price, rel=1e-8)
        assert pricing.stop_loss(st_, K, PRIOR, PARAMS, CURVE).price == pytest.approx(
            qgamma.stop_loss_qgamma(st_, K, PARAMS, CURVE).price, rel=1e-8, abs=1e-14)


@pytest.mark.parametrize("t", TS)
def test_grid_ad_matches_quadrature(t):
    s = 0.05
    for xi_s, y in itertools.product(XIS[:3], [0.2, 0.9, 1.7, 2.6, 4.0]):
        st_ = MarketState(s, xi_s)
        assert pricing.ad_price(s, t, y, st_, PRIOR, PARAMS, CURVE) == pytest.approx(
            qgamma.ad_qgamma(s, t, y, st_, PARAMS, CURVE), rel=1e-8, abs=1e-300)


@pytest.mark.parametrize("t", TS)
def test_grid_option_matches_quadrature(t):
    s = 0.0 if t < 0.2 else 0.1
    for xi_s, K in itertools.product(XIS[:3], KS):
        st_ = MarketState(s, xi_s)
        a = pricing.option_price(s, t, K, st_, PRIOR, PARAMS, CURVE).price
        b = qgamma.option_qgamma(s, t, K, st_, PARAMS, CURVE).price
        assert a == pytest.approx(b, rel=1e-7, abs=1e-15)
