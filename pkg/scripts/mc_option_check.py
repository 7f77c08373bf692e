"""Compare closed-form and quadrature option prices with the Monte Carlo oracle.

    python3 scripts/mc_option_check.py --paths 1000000 --seed 1
"""

from __future__ import annotations

import argparse

from gammabridge import (DiscountCurve, DiscreteAtoms, GammaPrior, MarketState, ModelParams,
                         make_rng, discrete, pricing, qgamma)
from gammabridge.oracle_mc import mc_option
from gammabridge.priors import lognormal_prior


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    curve = DiscountCurve.flat(0.05)
    g2 = ModelParams(2.0, 1.0, 1.0)
    gp = ModelParams(2.0, 1.5, 1.0)
    fig1 = DiscreteAtoms(((1.0, 0.5), (2.0, 0.2), (3.0, 0.2), (4.0, 0.1)))
    binary = DiscreteAtoms(((1.0, 0.6), (3.0, 0.4)))
    ln = lognormal_prior(0.0, 0.5)
    origin = MarketState(0.0, 0.0)

    cases = [
        ("binary t=0.3 K=1.8", binary, g2, 0.3, 1.8,
         lambda: discrete.option_binary(0.3, 1.8, binary, g2, curve).price),
        ("fig1 t=0.75 K=2.06", fig1, g2, 0.75, 2.06,
         lambda: discrete.option_discrete(0.75, 2.06, fig1, g2, curve).price),
        ("gamma t=0.4 K=2.4", GammaPrior(gp), gp, 0.4, 2.4,
         lambda: qgamma.option_qgamma(0.0, 0.4, 2.4, origin, gp, curve).price),
        ("lognormal t=0.5 K=1.0", ln, g2, 0.5, 1.0,
         lambda: pricing.option_price(0.0, 0.5, 1.0, origin, ln, g2, curve).price),
    ]
    rng = make_rng(args.seed)
    print(f"{'case':24s} {'formula':>12s} {'MC':>12s} {'SE':>10s} {'z':>6s}")
    for label, prior, params, t, K, formula in cases:
        c = formula()
        est = mc_option(0.0, t, K, prior, params, curve, args.paths, rng)
        z = (est.estimate - c) / est.std_error
        print(f"{label:24s} {c:12.8f} {est.estimate:12.8f} {est.std_error:10.2e} {z:6.2f}")


if __name__ == "__main__":
    main()
