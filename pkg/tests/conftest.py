from __future__ import annotations

import math
import os
import sys

import numpy as np
import pytest
from hypothesis import settings

from gammabridge import DiscountCurve, GammaPrior, ModelParams
from gammabridge.config import bundled_config, parse_scenario
from gammabridge.priors import lognormal_prior

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.register_profile("stress", deadline=None, max_examples=300)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def zscore(samples, target) -> float:
    samples = np.asarray(samples, dtype=float)
    return abs(samples.mean() - target) / (samples.std(ddof=1) / math.sqrt(samples.size))


@pytest.fixture
def curve():
    return DiscountCurve.flat(0.05)


@pytest.fixture
def gparams():
    return ModelParams(2.0, 1.0, 1.0)


@pytest.fixture
def gamma_prior(gparams):
    return GammaPrior(gparams)


@pytest.fixture
def lognormal():
    return lognormal_prior(0.0, 0.5)


@pytest.fixture
def fig1():
    return parse_scenario(bundled_config("fig1"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "SUMMARY", None):
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.SUMMARY):
        terminalreporter.write_line(mod.SUMMARY[k])
