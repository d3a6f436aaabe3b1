"""Replay a multi-snapshot calibration through the command line interface.

Builds a synthetic four-quarter history where the curve's short end
moves but the survey numbers stay put, then runs the backtest
subcommand and prints how far the 40-year expected 10-year rate drifts
under each premium kind. Everything lands in demos/out/.
Run: python3 demos/05_quarterly_replay.py
"""

import csv
import os

import numpy as np

from g2pp import G2Params
from g2pp.cli import main as cli_main
from g2pp.cli import write_params_csv

PILLARS = [0.25, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0]
ZERO_RATES = [-0.004, -0.003, -0.002, -0.001, 0.0, 0.001, 0.004, 0.006,
              0.007, 0.008, 0.0085, 0.0085]
DATES = ["2019-03-29", "2019-06-28", "2019-09-30", "2019-12-31"]


def main():
    base = os.path.join(os.path.dirname(__file__), "out", "replay")
    os.makedirs(base, exist_ok=True)

    p = G2Params(a=0.2997, b=0.0407, sigma=0.0114, eta=0.0114, rho=-0.9998)
    write_params_csv(os.path.join(base, "params.csv"), p, 0.0)
    with open(os.path.join(base, "forecasts.csv"), "w") as fh:
        fh.write("horizon_years,maturity_years,rate\n")
        fh.write("1.0,1.25,0.0108\n2.0,2.25,0.0108\n")
        fh.write("30.0,40.0,0.0184\n35.0,45.0,0.0184\n")

    rng = np.random.default_rng(7)
    lines = ["tau_months = 24", "kinds = constant,step,linear",
             "horizon_years = 40", "tenor_years = 10",
             "params = params.csv", "forecasts = forecasts.csv", ""]
    for date in DATES:
        shift = float(rng.normal(0.0, 1e-4))
        with open(os.path.join(base, f"curve_{date}.csv"), "w") as fh:
            fh.write("maturity_years,zero_rate\n")
            for t, r in zip(PILLARS, ZERO_RATES):
                fh.write(f"{t},{(r + shift if t <= 2.0 else r)!r}\n")
        lines += ["[snapshot]", f"date = {date}", f"curve = curve_{date}.csv", ""]
    manifest = os.path.join(base, "manifest.txt")
    with open(manifest, "w") as fh:
        fh.write("\n".join(lines))

    out = os.path.join(base, "results")
    code = cli_main(["backtest", "--manifest", manifest, "--out", out])
    print(f"backtest exit code {code}\n")

    with open(os.path.join(out, "backtest.csv"), newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    print("date         variant    E[10y rate in 40y]")
    for date, variant, rate in rows:
        print(f"{date}   {variant:9s}  {float(rate):+.4%}")

    with open(os.path.join(out, "summary.csv"), newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    print("\nvariant    dispersion over the four quarters")
    for variant, _, _, disp in rows:
        print(f"{variant:9s}  {float(disp):.2e}")
    print("\nanchoring the long end (step, linear) keeps the scenarios stable"
          "\nwhile the constant kind follows every wiggle of the curve.")


if __name__ == "__main__":
    main()
