"""Calibrate the three market-price-of-risk kinds to rate forecasts.

All three reproduce the same short-horizon forecasts, so their premium
trajectories intersect at the switch time; beyond it the step and linear
kinds are pulled toward the long-horizon forecasts while the constant
kind extrapolates the short-horizon fit forever.
Run: python3 demos/03_risk_premium_kinds.py
"""

import numpy as np

from g2pp import (
    DiscountCurve,
    G2Params,
    RateForecast,
    calibrate_p,
    expected_rate_p,
    expected_rate_q,
    rp_x,
    rp_y,
)

PILLARS = np.array([0.25, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0])
ZERO_RATES = np.array([-0.004, -0.003, -0.002, -0.001, 0.0, 0.001, 0.004, 0.006,
                       0.007, 0.008, 0.0085, 0.0085])

SHORT = [RateForecast(1.0, 1.25, 0.0108), RateForecast(2.0, 2.25, 0.0108)]
LONG = [RateForecast(30.0, 40.0, 0.0184), RateForecast(40.0, 50.0, 0.0184)]
TAU = 2.0


def main():
    curve = DiscountCurve(PILLARS, np.exp(-ZERO_RATES * PILLARS))
    p = G2Params(a=0.2997, b=0.0407, sigma=0.0114, eta=0.0114, rho=-0.9998)

    specs = {}
    for kind in ("constant", "step", "linear"):
        long_ = None if kind == "constant" else LONG
        tau = None if kind == "constant" else TAU
        specs[kind] = calibrate_p(curve, p, kind, SHORT, long_, tau)
        worst = max(abs(expected_rate_p(curve, p, specs[kind], fc.horizon_years,
                                        fc.maturity_years) - fc.rate)
                    for fc in SHORT + (long_ or []))
        print(f"{kind:9s} fitted, worst forecast residual {worst:.1e}")

    print("\ntotal premium RP_x + RP_y along the horizon")
    print("  t    " + "".join(f"{k:>12s}" for k in specs))
    for t in (0.5, 1.0, TAU, 5.0, 10.0, 20.0, 40.0):
        row = "".join(f"{rp_x(p, s, t) + rp_y(p, s, t):+12.5f}"
                      for s in specs.values())
        mark = "  <- switch" if t == TAU else ""
        print(f"{t:5.1f}  {row}{mark}")

    print("\nexpected 10y rate in 40 years (the long forecasts say 1.84%)")
    eq = expected_rate_q(curve, p, 40.0, 50.0)
    print(f"  risk-neutral  {eq:+.4%}")
    for kind, spec in specs.items():
        ep = expected_rate_p(curve, p, spec, 40.0, 50.0)
        print(f"  {kind:12s}  {ep:+.4%}")
    print("\nthe constant kind has no long-horizon information, so the premium"
          "\nimplied by two short forecasts compounds into nonsense at 40 years;"
          "\nthe step and linear kinds hit the long forecasts instead.")


if __name__ == "__main__":
    main()
