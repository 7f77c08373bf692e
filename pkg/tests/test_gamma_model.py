from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from conftest import zscore
from gammabridge.errors import DomainError
from gammabridge.gamma_model import (GammaPath, ModelParams, char_fn_gamma, exp_gamma_martingale,
                                     gamma_density, laguerre_assoc, make_rng, sample_gamma_path,
                                     sample_gamma_variate, sample_log_gamma,
                                     scaled_measure_density, split_rng)


def test_model_params_validation():
    with pytest.raises(DomainError):
        ModelParams(0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        ModelParams(1.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        ModelParams(1.0, 1.0, 0.0)
    assert ModelParams(2.0, 1.0, 3.0).mT == 6.0


def test_gamma_density_examples():
    assert gamma_density(0.0, 2.0, 1.0) == 0.0
    assert gamma_density(-1.0, 2.0, 1.0) == 0.0
    for x in (0.1, 1.0, 4.0):
        assert gamma_density(x, 1.0, 1.0) == pytest.approx(math.exp(-x), rel=1e-14)
    with pytest.raises(DomainError):
        gamma_density(1.0, 0.0, 1.0)


@pytest.mark.parametrize("shape, scale", [(0.4, 1.0), (2.0, 3.0), (7.5, 0.2)])
def test_gamma_density_normalized_with_correct_mean(shape, scale):
    mass = integrate.quad(lambda x: gamma_density(x, shape, scale), 0, np.inf)[0]
    mean = integrate.quad(lambda x: x * gamma_density(x, shape, scale), 0, np.inf)[0]
    assert mass == pytest.approx(1.0, rel=1e-8)
    assert mean == pytest.approx(shape * scale, rel=1e-8)


def test_gamma_density_matches_scipy():
    x = np.linspace(0.01, 10, 50)
    assert np.allclose(gamma_density(x, 2.3, 1.7), stats.gamma(2.3, scale=1.7).pdf(x), rtol=1e-12)


def test_char_fn_examples():
    assert char_fn_gamma(0.0, 3.0, 2.0) == 1.0
    lam, mt = 0.7, 1.3
    assert char_fn_gamma(lam, mt, 1.0) == pytest.approx((1 - 1j * lam) ** (-mt), rel=1e-14)


def test_char_fn_second_moment():
    mt, h = 1.6, 1e-4
    d2 = (char_fn_gamma(h, mt, 1.0) - 2 * char_fn_gamma(0.0, mt, 1.0) + char_fn_gamma(-h, mt, 1.0)) / h**2
    assert -d2.real == pytest.approx(mt + mt**2, rel=1e-6)


@pytest.mark.parametrize("lam", [0.1, 1.0, 5.0])
def test_char_fn_modulus_matches_fourier_transform(lam):
    shape, scale = 2.0, 1.0
    re = integrate.quad(lambda x: gamma_density(x, shape, scale), 0, np.inf, weight="cos", wvar=lam)[0]
    im = integrate.quad(lambda x: gamma_density(x, shape, scale), 0, np.inf, weight="sin", wvar=lam)[0]
    phi = char_fn_gamma(lam, shape, scale)
    assert abs(phi) ** 2 == pytest.approx(re**2 + im**2, rel=1e-6)


def test_sample_gamma_variate_moments():
    rng = make_rng(1)
    x = sample_gamma_variate(2.0, 1.0, rng, size=100_000)
    assert zscore(x, 2.0) < 4
    y = sample_gamma_variate(2.0, 3.0, rng, size=100_000)
    # standard error of the sample variance from the fourth central moment
    mu4 = np.mean((y - y.mean()) ** 4)
    se = math.sqrt((mu4 - y.var() ** 2) / y.size)
    assert abs(y.var(ddof=1) - 18.0) < 4 * se


def test_small_shape_variates_keep_resolution_in_logs():
    lg = sample_log_gamma(0.01, make_rng(3), size=10_000)
    assert np.all(np.isfinite(lg))
    assert lg.min() < -700  # far below the smallest double
    assert zscore(np.exp(lg), 0.01) < 4


def test_seeded_draws_repeat():
    a = sample_gamma_variate(1.5, 1.0, make_rng(42), size=5)
    b = sample_gamma_variate(1.5, 1.0, make_rng(42), size=5)
    assert np.array_equal(a, b)


def test_split_rng_streams_independent_and_reproducible():
    s1 = [r.random(3) for r in split_rng(make_rng(7), 3)]
    s2 = [r.random(3) for r in split_rng(make_rng(7), 3)]
    assert all(np.array_equal(a, b) for a, b in zip(s1, s2))
    assert not np.array_equal(s1[0], s1[1])


def test_gamma_path_start_and_monotone():
    params = ModelParams(1.5, 2.0, 1.0)
    times = np.linspace(0, 1, 11)
    path = sample_gamma_path(times, params, make_rng(0), n_paths=200)
    assert np.all(path.values[:, 0] == 0.0)
    assert np.all(np.diff(path.values, axis=1) >= 0)


def test_gamma_path_rejects_bad_grids():
    params = ModelParams(1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        sample_gamma_path(np.array([0.0, 0.5, 0.5]), params, make_rng(0))
    with pytest.raises(DomainError):
        sample_gamma_path(np.array([0.1, 0.5]), params, make_rng(0))
    with pytest.raises(DomainError):
        GammaPath(np.array([0.0, 1.0]), np.array([0.0, -1.0]))


def test_gamma_path_mean_and_covariance():
    kappa, m = 1.0, 2.0
    params = ModelParams(m, kappa, 1.0)
    times = np.array([0.0, 0.3, 0.7, 1.0])
    v = sample_gamma_path(times, params, make_rng(11), n_paths=100_000).values
    assert zscore(v[:, -1], kappa * m * 1.0) < 4
    prod = (v[:, 1] - v[:, 1].mean()) * (v[:, 2] - v[:, 2].mean())
    assert zscore(prod, kappa**2 * m * 0.3) < 4


def test_increments_stationary():
    params = ModelParams(2.0, 1.0, 2.0)
    rng = make_rng(5)
    v = sample_gamma_path(np.array([0.0, 0.2, 0.5, 1.2, 1.5]), params, rng, n_paths=10_000).values
    first, later = v[:, 2] - v[:, 1], v[:, 4] - v[:, 3]
    assert stats.ks_2samp(first, later).pvalue > 0.01


def test_exp_martingale_examples():
    g = np.array([0.0, 1.0, 3.0])
    assert np.all(exp_gamma_martingale(0.0, g, 2.0) == 1.0)
    with pytest.raises(DomainError):
        exp_gamma_martingale(-1.0, g, 2.0)
    params = ModelParams(2.0, 1.0, 1.0)
    t = 0.6
    x = sample_gamma_path(np.array([0.0, t]), params, make_rng(2), n_paths=100_000).values[:, 1]
    assert zscore(exp_gamma_martingale(0.5, x, params.m * t), 1.0) < 4


def test_scaled_measure_density_changes_the_scale():
    kappa = 2.0
    params = ModelParams(1.5, kappa, 1.0)
    std = sample_gamma_path(np.array([0.0, 1.0]), ModelParams(1.5, 1.0, 1.0), make_rng(4),
                            n_paths=200_000).values[:, 1]
    w = scaled_measure_density(std, params)
    assert zscore(w, 1.0) < 4
    # under the new measure gamma_T has mean kappa m T
    assert zscore(w * std, kappa * params.mT) < 4


def test_laguerre_examples():
    z, k = 0.7, 1.3
    assert laguerre_assoc(0, k, z) == 1.0
    assert laguerre_assoc(1, k, z) == pytest.approx(-z + k + 1)
    assert laguerre_assoc(2, k, z) == pytest.approx(0.5 * (z**2 - 2 * (k + 2) * z + (k + 1) * (k + 2)))
    with pytest.raises(DomainError):
        laguerre_assoc(-1, k, z)


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_laguerre_matches_scipy(n):
    from scipy.special import eval_genlaguerre
    z = np.linspace(0, 5, 7)
    assert np.allclose(laguerre_assoc(n, 0.8, z), eval_genlaguerre(n, 0.8, z), rtol=1e-12)


@given(st.floats(-0.5, 0.5), st.floats(0.0, 3.0), st.floats(0.5, 3.0))
def test_laguerre_generating_function(alpha, z, h):
    approx = sum(laguerre_assoc(n, h - n, z) * alpha**n for n in range(25))
    exact = (1 + alpha) ** h * math.exp(-z * alpha)
    assert approx == pytest.approx(exact, rel=1e-6, abs=1e-9)


def test_laguerre_martingales():
    params = ModelParams(2.0, 1.0, 1.0)
    times = np.array([0.0, 0.4, 1.0])
    v = sample_gamma_path(times, params, make_rng(9), n_paths=100_000).values
    for j in (1, 2):
        mt = params.m * times[j]
        assert zscore(laguerre_assoc(1, mt - 1, v[:, j]), 0.0) < 4
        assert zscore(laguerre_assoc(2, mt - 2, v[:, j]), 0.0) < 4
