"""Gamma-prior option: the literal R_s variant against the corrected form.

The literal variant defines R_s through the discounted price S_s and drops
the kappa factor on the bracket.  This script prints both next to direct
quadrature and Monte Carlo so the discrepancy can be inspected.

    python3 scripts/qgamma_literal_vs_corrected.py
"""

from __future__ import annotations

import argparse

from gammabridge import DiscountCurve, GammaPrior, MarketState, ModelParams, make_rng, pricing, qgamma
from gammabridge.oracle_mc import mc_option


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=400_000)
    ap.add_argument("--seed", type=int, default=2)
    args = ap.parse_args()
    curve = DiscountCurve.flat(0.05)
    rng = make_rng(args.seed)
    print(f"{'kappa':>6s} {'s':>4s} {'t':>4s} {'K':>5s} {'corrected':>11s} {'literal':>11s} "
          f"{'quadrature':>11s} {'MC':>11s} {'SE':>9s}")
    for kappa in (1.0, 1.5):
        params = ModelParams(2.0, kappa, 1.0)
        prior = GammaPrior(params)
        for s, xi_s, t, K in [(0.0, 0.0, 0.4, 2.0 * kappa), (0.3, 0.6 * kappa, 0.7, 2.2 * kappa)]:
            st = MarketState(s, xi_s)
            corr = qgamma.option_qgamma(s, t, K, st, params, curve).price
            lit = qgamma.option_qgamma(s, t, K, st, params, curve, literal=True).price
            quad = pricing.option_price(s, t, K, st, prior, params, curve).price
            P = curve.P(t, params.T)
            est = mc_option(s, t, K, prior, params, curve, args.paths, rng, xi_s=xi_s,
                            value_fn=lambda y, P=P, t=t, k=kappa: P * (y + k * 2.0 * (1 - t)))
            print(f"{kappa:6.2f} {s:4.1f} {t:4.1f} {K:5.2f} {corr:11.7f} {lit:11.7f} {quad:11.7f} "
                  f"{est.estimate:11.7f} {est.std_error:9.2e}")


if __name__ == "__main__":
    main()
