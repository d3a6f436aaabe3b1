"""Price a swaption panel and recover the parameters that generated it.

Prices a small ATM payer panel from known parameters, then runs the
downhill-simplex fit from a perturbed start and reports the recovery.
Takes a few seconds. Run: python3 demos/02_swaption_calibration.py
"""

import numpy as np

from g2pp import (
    DiscountCurve,
    G2Params,
    SimplexConfig,
    SwaptionQuote,
    atm_forward_swap_rate,
    calibrate_q,
    price_swaption_g2,
)
from g2pp.pricing import SwaptionSpec

TRUTH = G2Params(a=0.25, b=0.05, sigma=0.012, eta=0.009, rho=-0.6)
GRID = [(5.0, 5.0), (5.0, 10.0), (10.0, 5.0), (10.0, 10.0), (7.0, 7.0)]


def main():
    ts = np.arange(1.0, 31.0)
    curve = DiscountCurve(ts, np.exp(-0.01 * ts))

    quotes = []
    print("expiry  tenor   ATM strike   price")
    for expiry, tenor in GRID:
        strike = atm_forward_swap_rate(curve, expiry, tenor)
        spec = SwaptionSpec.annual(expiry, tenor, strike, kind="payer")
        price = price_swaption_g2(curve, TRUTH, spec)
        quotes.append(SwaptionQuote(expiry, tenor, price, "price", strike=strike))
        print(f"{expiry:5.0f}  {tenor:5.0f}   {strike:+.5f}    {price:.6f}")

    start = G2Params(TRUTH.a * 1.2, TRUTH.b * 1.2, TRUTH.sigma * 1.2,
                     TRUTH.eta * 1.2, TRUTH.rho / 1.2)
    res = calibrate_q(curve, quotes, SimplexConfig(start=start, max_iter=2000,
                                                   restarts=2))
    print(f"\nconverged={res.converged} after {res.iterations} iterations, "
          f"objective {res.objective:.2e}")
    for name in ("a", "b", "sigma", "eta", "rho"):
        got, want = getattr(res.params, name), getattr(TRUTH, name)
        print(f"  {name:5s}  fitted {got:+.6f}   true {want:+.6f}")


if __name__ == "__main__":
    main()
