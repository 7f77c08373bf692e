"""Command-line interface.

    gammabridge price {value|stoploss|option|ad} --config F [--t X] [--xi X]
                      [--strike K] [--s X] [--y X] [--force-quadrature]
    gammabridge surface --config F --t-grid a:b:n --y-grid a:b:n --out F
    gammabridge simulate --config F --paths N --grid a:b:n --seed S --out F
    gammabridge selfcheck [--full] [--inject-error E]

Exit codes: 0 success, 1 failed self-check, 2 invalid configuration or
arguments, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from typing import Sequence

import numpy as np

from . import discrete, oracle_mc, pricing, qgamma
from .config import ConfigError, Scenario, load_scenario
from .errors import (DomainError, InsufficientSampleError, NoMassError, QuadratureError,
                     UnsupportedConfigurationError)
from .gamma_model import make_rng
from .market import MarketState
from .priors import DiscreteAtoms

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def fmt(x) -> str:
    """17 significant digits, with ``nan``/``inf`` spelled as JSON extensions."""
    if x is None:
        return "null"
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dump_json(obj: dict) -> str:
    parts = []
    for k, v in obj.items():
        if isinstance(v, float) or v is None:
            parts.append(f"{json.dumps(k)}: {fmt(v)}")
        else:
            parts.append(f"{json.dumps(k)}: {json.dumps(v)}")
    return "{" + ", ".join(parts) + "}"


def parse_grid(spec: str) -> np.ndarray:
    """``a:b:n`` -> ``n`` equally spaced points from ``a`` to ``b`` inclusive."""
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must look like a:b:n, got {spec!r}") from exc
    if n < 1 or (n > 1 and not b > a):
        raise argparse.ArgumentTypeError(f"grid {spec!r} needs n >= 1 and b > a")
    return np.linspace(a, b, n) if n > 1 else np.array([a])


# --------------------------------------------------------------------------- #
# price
# --------------------------------------------------------------------------- #

def price(sc: Scenario, what: str, *, t: float, xi: float, strike: float | None, s: float,
          y: float | None, force_quadrature: bool = False) -> dict:
    prior, params, curve = sc.prior, sc.params, sc.curve
    closed = sc.is_gamma and not force_quadrature
    if what in ("stoploss", "option") and strike is None:
        raise DomainError(f"'{what}' needs --strike")
    if what == "value":
        st = MarketState(t, xi)
        res = qgamma.value_qgamma(st, params, curve) if closed else pricing.value(st, prior, params, curve)
    elif what == "stoploss":
        st = MarketState(t, xi)
        res = (qgamma.stop_loss_qgamma(st, strike, params, curve) if closed
               else pricing.stop_loss(st, strike, prior, params, curve))
    elif what == "option":
        st = MarketState(s, xi)
        res = (qgamma.option_qgamma(s, t, strike, st, params, curve) if closed
               else pricing.option_price(s, t, strike, st, prior, params, curve))
    elif what == "ad":
        if y is None:
            raise DomainError("'ad' needs --y")
        st = MarketState(s, xi)
        if closed:
            val, method = qgamma.ad_qgamma(s, t, y, st, params, curve), "closed_form"
        else:
            val = pricing.ad_price(s, t, y, st, prior, params, curve)
            method = "closed_form" if isinstance(prior, DiscreteAtoms) else "quadrature"
        return {"price": float(val), "err_estimate": 0.0, "critical_value": None, "method": method}
    else:
        raise DomainError(f"unknown price kind {what!r}")
    return res.to_dict()


def cmd_price(args) -> int:
    sc = load_scenario(args.config)
    t = args.t
    if t is None:
        t = 0.0 if args.what in ("value", "stoploss") else 0.5 * sc.params.T
    out = price(sc, args.what, t=t, xi=args.xi, strike=args.strike, s=args.s, y=args.y,
                force_quadrature=args.force_quadrature)
    print(dump_json(out))
    return EXIT_OK


# --------------------------------------------------------------------------- #
# surface
# --------------------------------------------------------------------------- #

def surface_rows(sc: Scenario, t_grid, y_grid, force_quadrature: bool = False) -> list[tuple]:
    """Rows ``(t, y, S(t, y))``; infeasible states give ``nan``.

    At ``t = 0`` nothing has been observed, so every cell of that row holds
    ``S_0 = P_0T E[X_T]``.  At ``t = T`` the reserve equals the gain.
    """
    prior, params, curve = sc.prior, sc.params, sc.curve
    rows = []
    for t in np.asarray(t_grid, dtype=float):
        t = float(t)
        ys = np.asarray(y_grid, dtype=float)
        if t == 0.0:
            s0 = price(sc, "value", t=0.0, xi=0.0, strike=None, s=0.0, y=None,
                       force_quadrature=force_quadrature)["price"]
            vals = np.full(ys.shape, s0)
        elif t >= params.T:
            vals = ys.copy()
        elif isinstance(prior, DiscreteAtoms):
            vals = np.full(ys.shape, np.nan)
            ok = ys <= prior.xs[-1]
            if ok.any():
                vals[ok] = discrete.reserve_discrete(t, ys[ok], prior, params, curve)
        else:
            vals = np.empty(ys.shape)
            for i, y in enumerate(ys):
                try:
                    vals[i] = price(sc, "value", t=t, xi=float(y), strike=None, s=0.0, y=None,
                                    force_quadrature=force_quadrature)["price"]
                except NoMassError:
                    vals[i] = np.nan
        rows.extend((t, float(y), float(v)) for y, v in zip(ys, vals))
    return rows


def write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([v if isinstance(v, (int, np.integer)) else fmt(v) for v in r])


def cmd_surface(args) -> int:
    sc = load_scenario(args.config)
    rows = surface_rows(sc, args.t_grid, args.y_grid, args.force_quadrature)
    write_csv(args.out, ("t", "y", "price"), rows)
    return EXIT_OK


# --------------------------------------------------------------------------- #
# simulate
# --------------------------------------------------------------------------- #

def cmd_simulate(args) -> int:
    sc = load_scenario(args.config)
    grid = np.asarray(args.grid, dtype=float)
    if grid[0] < 0 or grid[-1] > sc.params.T:
        raise DomainError("simulation grid must lie in [0, T]")
    paths = oracle_mc.simulate_reserve_paths(sc.prior, sc.params, sc.curve, grid, args.paths,
                                             make_rng(args.seed),
                                             closed_form=not args.force_quadrature)
    rows = ((i, t, paths.xi[i, j], paths.reserve[i, j])
            for i in range(args.paths) for j, t in enumerate(paths.times))
    write_csv(args.out, ("path_id", "t", "xi", "reserve"), rows)
    return EXIT_OK


# --------------------------------------------------------------------------- #
# selfcheck
# --------------------------------------------------------------------------- #

def cmd_selfcheck(args) -> int:
    from . import selfcheck

    level = "full" if args.full else "fast"
    results = selfcheck.run(level, inject_error=args.inject_error)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed ({level})")
    if failed:
        print("failed: " + ", ".join(r.name for r in failed))
        return EXIT_CHECK
    return EXIT_OK


# --------------------------------------------------------------------------- #

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gammabridge", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="price one contract and print JSON")
    p.add_argument("what", choices=["value", "stoploss", "option", "ad"])
    p.add_argument("--config", required=True)
    p.add_argument("--t", type=float, default=None, help="valuation (value/stoploss) or exercise time")
    p.add_argument("--xi", type=float, default=0.0, help="observed gain at the valuation time")
    p.add_argument("--strike", type=float, default=None)
    p.add_argument("--s", type=float, default=0.0, help="pricing time for option/ad")
    p.add_argument("--y", type=float, default=None, help="gain level for ad")
    p.add_argument("--force-quadrature", action="store_true")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("surface", help="write S(t, y) on a grid as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--t-grid", type=parse_grid, required=True)
    p.add_argument("--y-grid", type=parse_grid, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force-quadrature", action="store_true")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("simulate", help="simulate gains and reserve paths as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--paths", type=int, required=True)
    p.add_argument("--grid", type=parse_grid, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force-quadrature", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("selfcheck", help="run the acceptance checks")
    p.add_argument("--full", action="store_true", help="include the Monte Carlo suites")
    p.add_argument("--inject-error", type=float, default=0.0,
                   help="perturb every measured quantity by this relative amount")
    p.set_defaults(func=cmd_selfcheck)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, UnsupportedConfigurationError, InsufficientSampleError) as exc:
        partial = {"price": getattr(exc, "value", None), "err_estimate": getattr(exc, "err_estimate", None),
                   "critical_value": None, "method": "quadrature"}
        print(dump_json(partial))
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
