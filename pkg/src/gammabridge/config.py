"""Scenario configuration files.

A scenario is a JSON object holding a prior (nested under ``"prior"``, or
given flat at the top level), the model constants ``m`` and ``T`` (and
optionally ``kappa``), plus a discount curve::

    {"prior": {"type": "discrete", "atoms": [[1, 0.5], [2, 0.5]]},
     "m": 2.0, "T": 1.0, "discount": {"type": "flat", "r": 0.05}}

For a gamma prior the prior's own ``m``, ``kappa`` and ``T`` are the model
parameters; top-level values, when present, must agree with them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import DomainError
from .gamma_model import ModelParams
from .market import DiscountCurve
from .priors import GammaPrior, Prior, prior_from_config, prior_to_config, validate

__all__ = ["ConfigError", "Scenario", "parse_scenario", "load_scenario", "bundled_config",
           "scenario_to_config"]

_PRIOR_KEYS = {"type", "atoms", "mu", "sigma", "m", "kappa", "T"}


class ConfigError(DomainError):
    """The scenario file is malformed or describes an invalid prior."""


@dataclass(frozen=True)
class Scenario:
    prior: Prior
    params: ModelParams
    curve: DiscountCurve

    @property
    def is_gamma(self) -> bool:
        return isinstance(self.prior, GammaPrior)


def parse_scenario(cfg: dict) -> Scenario:
    if not isinstance(cfg, dict):
        raise ConfigError("scenario must be a JSON object")
    prior_cfg = cfg.get("prior")
    if prior_cfg is None:
        prior_cfg = {k: v for k, v in cfg.items() if k in _PRIOR_KEYS}
    try:
        prior = prior_from_config(prior_cfg)
        if isinstance(prior, GammaPrior):
            params = prior.params
            for key in ("m", "kappa", "T"):
                if key in cfg and not math.isclose(float(cfg[key]), getattr(params, key)):
                    raise ConfigError(f"top-level {key!r} disagrees with the gamma prior")
        else:
            if "m" not in cfg or "T" not in cfg:
                raise ConfigError("scenario needs 'm' and 'T'")
            params = ModelParams(float(cfg["m"]), float(cfg.get("kappa", 1.0)), float(cfg["T"]))
        curve = DiscountCurve.from_config(cfg.get("discount"))
    except ConfigError:
        raise
    except (DomainError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc
    report = validate(prior)
    if not report.passed:
        names = ", ".join(f"{c.name} (defect {c.defect:.3g})" for c in report.failures)
        raise ConfigError(f"prior failed validation: {names}")
    return Scenario(prior, params, curve)


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return parse_scenario(cfg)


def bundled_config(name: str = "fig1") -> dict:
    with resources.files("gammabridge.data").joinpath(f"{name}.json").open() as fh:
        return json.load(fh)


def scenario_to_config(sc: Scenario) -> dict:
    out = {"prior": prior_to_config(sc.prior), "m": sc.params.m, "T": sc.params.T,
           "discount": sc.curve.to_config()}
    if sc.params.kappa != 1.0:
        out["kappa"] = sc.params.kappa
    return out
