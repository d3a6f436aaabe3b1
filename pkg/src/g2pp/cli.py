"""Command line interface.

Subcommands cover the full workflow: fit the risk-neutral parameters to a
swaption panel, fit drift targets to rate forecasts, project expected
rates, dump risk premium trajectories, generate scenarios, replay a
multi-snapshot backtest from a manifest, and average a rate history.

Exit codes: 0 on success, 1 on numeric or convergence failures, 2 on bad
inputs. All outputs are plain CSV with full-precision floats and no
timestamps, so identical inputs reproduce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from .calibration import CalibrationQResult, SimplexConfig, calibrate_q, objective
from .errors import G2Error, InputError, NumericError
from .market import (
    load_curve,
    load_forecasts,
    load_swaption_quotes,
)
from .model import G2Params
from .premium import PremiumSpec, calibrate_p, expected_rate_p, expected_rate_q, rp_x, rp_y
from .pricing import SwaptionSpec, _price_batch, annuity, atm_forward_swap_rate, bachelier_price
from .simulate import SimConfig, scenario_to_binary, scenario_to_csv, simulate

PARAMS_HEADER = ["a", "b", "sigma", "eta", "rho", "objective"]
PREMIUM_HEADER = ["kind", "d_x", "d_y", "l_x", "l_y"]
PROJECT_HEADER = ["horizon_years", "tenor_years", "expected_q", "expected_p"]
RP_HEADER = ["t", "variant", "rp_x", "rp_y", "rp_total"]

CONFIG_KEYS = {
    "start.a": float,
    "start.b": float,
    "start.sigma": float,
    "start.eta": float,
    "start.rho": float,
    "simplex.max_iter": int,
    "simplex.tol_x": float,
    "simplex.tol_f": float,
    "simplex.restarts": int,
    "premium.kind": str,
    "premium.tau_months": int,
}


def _fmt(value) -> str:
    return repr(float(value))


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _out_dir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def parse_config(path) -> dict:
    """Read a key=value config file; unknown keys are rejected."""
    values = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise InputError(f"{path}:{lineno}: expected key=value")
                key, _, val = line.partition("=")
                key, val = key.strip(), val.strip()
                if key not in CONFIG_KEYS:
                    raise InputError(f"{path}:{lineno}: unknown config key {key!r}")
                try:
                    values[key] = CONFIG_KEYS[key](val)
                except ValueError as exc:
                    raise InputError(f"{path}:{lineno}: bad value for {key}") from exc
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    return values


def _simplex_config(cfg: dict) -> SimplexConfig:
    base = SimplexConfig()
    start = G2Params(
        a=cfg.get("start.a", base.start.a),
        b=cfg.get("start.b", base.start.b),
        sigma=cfg.get("start.sigma", base.start.sigma),
        eta=cfg.get("start.eta", base.start.eta),
        rho=cfg.get("start.rho", base.start.rho),
    )
    return SimplexConfig(
        start=start,
        max_iter=cfg.get("simplex.max_iter", base.max_iter),
        tol_x=cfg.get("simplex.tol_x", base.tol_x),
        tol_f=cfg.get("simplex.tol_f", base.tol_f),
        restarts=cfg.get("simplex.restarts", base.restarts),
    )


def write_params_csv(path, p: G2Params, objective_value: float) -> None:
    _write_csv(path, PARAMS_HEADER,
               [[_fmt(p.a), _fmt(p.b), _fmt(p.sigma), _fmt(p.eta), _fmt(p.rho),
                 _fmt(objective_value)]])


def load_params_csv(path) -> tuple[G2Params, float]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if len(rows) != 2 or [c.strip() for c in rows[0]] != PARAMS_HEADER:
        raise InputError(f"{path}: expected header {','.join(PARAMS_HEADER)} and one row")
    try:
        vals = [float(c) for c in rows[1]]
    except ValueError as exc:
        raise InputError(f"{path}: bad parameter value") from exc
    return G2Params(*vals[:5]), vals[5]


def write_premium_csv(path, spec: PremiumSpec) -> None:
    row = [spec.kind, _fmt(spec.d_x), _fmt(spec.d_y),
           "" if spec.l_x is None else _fmt(spec.l_x),
           "" if spec.l_y is None else _fmt(spec.l_y)]
    _write_csv(path, PREMIUM_HEADER + ["tau"],
               [row + ["" if spec.tau is None else _fmt(spec.tau)]])


def load_premium_csv(path) -> PremiumSpec:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if len(rows) != 2 or [c.strip() for c in rows[0]] != PREMIUM_HEADER + ["tau"]:
        raise InputError(f"{path}: expected header {','.join(PREMIUM_HEADER)},tau and one row")
    kind = rows[1][0].strip()
    def opt(cell):
        return None if cell.strip() == "" else float(cell)
    try:
        d_x, d_y = float(rows[1][1]), float(rows[1][2])
        l_x, l_y, tau = opt(rows[1][3]), opt(rows[1][4]), opt(rows[1][5])
    except ValueError as exc:
        raise InputError(f"{path}: bad premium value") from exc
    return PremiumSpec(kind, d_x, d_y, l_x, l_y, tau)


def cmd_calibrate_q(args) -> int:
    cfg = parse_config(args.config) if args.config else {}
    curve = load_curve(args.curve, extrapolate=args.extrapolate)
    quotes = load_swaption_quotes(args.swaptions)
    out = _out_dir(args)
    if args.params:
        # pre-baked parameters bypass the fit and are echoed with their fit table
        p, obj = load_params_csv(args.params)
        write_params_csv(os.path.join(out, "params.csv"), p, obj)
        _write_csv(os.path.join(out, "fit.csv"),
                   ["expiry_years", "tenor_years", "market", "model", "rel_error"],
                   _fit_rows(curve, quotes, p))
        print(f"echoed parameters from {args.params}")
        return 0
    result = calibrate_q(curve, quotes, _simplex_config(cfg))
    write_params_csv(os.path.join(out, "params.csv"), result.params, result.objective)
    fit_rows = _fit_rows(curve, quotes, result.params)
    _write_csv(os.path.join(out, "fit.csv"),
               ["expiry_years", "tenor_years", "market", "model", "rel_error"], fit_rows)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"objective {result.objective:.6e} after {result.iterations} iterations, "
          f"{result.restarts_used} restarts, converged={result.converged}")
    return 0 if result.converged else 1


def _fit_rows(curve, quotes, p: G2Params):
    rows = []
    specs, targets = [], []
    for q in quotes:
        atm = atm_forward_swap_rate(curve, q.expiry_years, q.tenor_years)
        strike = atm if q.strike is None else q.strike
        spec = SwaptionSpec.annual(q.expiry_years, q.tenor_years, strike, kind="payer")
        specs.append(spec)
        if q.quote_kind == "price":
            targets.append(q.quote)
        else:
            targets.append(bachelier_price(atm, strike, q.quote, q.expiry_years,
                                           annuity(curve, spec), kind="payer"))
    model = _price_batch(curve, p, specs)
    for q, target, price in zip(quotes, targets, model):
        rel = (price - target) / target if abs(target) >= 1e-12 else price - target
        rows.append([_fmt(q.expiry_years), _fmt(q.tenor_years), _fmt(target),
                     _fmt(price), _fmt(rel)])
    return rows


def _select_forecasts(forecasts, kind):
    ordered = sorted(forecasts, key=lambda f: f.horizon_years)
    if kind == "constant":
        if len(ordered) < 2:
            raise InputError("constant kind needs two forecasts")
        return ordered[:2], None
    if len(ordered) != 4:
        raise InputError(f"{kind} kind needs exactly four forecasts")
    return ordered[:2], ordered[2:]


def _premium_settings(args, cfg: dict) -> tuple[str, float | None]:
    kind = args.kind or cfg.get("premium.kind", "constant")
    tau_months = args.tau_months if args.tau_months is not None else cfg.get("premium.tau_months")
    tau = None if tau_months is None else tau_months / 12.0
    return kind, tau


def cmd_calibrate_p(args) -> int:
    cfg = parse_config(args.config) if args.config else {}
    curve = load_curve(args.curve, extrapolate=args.extrapolate)
    p, _ = load_params_csv(args.params)
    forecasts = load_forecasts(args.forecasts)
    kind, tau = _premium_settings(args, cfg)
    short, long_ = _select_forecasts(forecasts, kind)
    spec = calibrate_p(curve, p, kind, short, long_, tau)
    out = _out_dir(args)
    write_premium_csv(os.path.join(out, "premium.csv"), spec)
    reproduced = [expected_rate_p(curve, p, spec, f.horizon_years, f.maturity_years)
                  for f in short + (long_ or [])]
    worst = max(abs(r - f.rate) for r, f in zip(reproduced, short + (long_ or [])))
    print(f"{kind} premium calibrated, worst forecast residual {worst:.3e}")
    return 0


def cmd_project(args) -> int:
    cfg = parse_config(args.config) if args.config else {}
    curve = load_curve(args.curve, extrapolate=args.extrapolate)
    p, _ = load_params_csv(args.params)
    spec = load_premium_csv(args.premium)
    try:
        tenors = [float(t) for t in args.tenors.split(",")]
    except ValueError as exc:
        raise InputError(f"bad --tenors value {args.tenors!r}") from exc
    if any(t <= 0.0 for t in tenors):
        raise InputError("tenors must be positive")
    months = round(args.horizon_years * 12)
    rows = []
    for m in range(months + 1):
        t = m / 12.0
        for tenor in tenors:
            T = t + tenor
            eq = expected_rate_q(curve, p, t, T)
            ep = expected_rate_p(curve, p, spec, t, T)
            rows.append([_fmt(t), _fmt(tenor), _fmt(eq), _fmt(ep)])
    out = _out_dir(args)
    _write_csv(os.path.join(out, "projection.csv"), PROJECT_HEADER, rows)
    print(f"wrote {len(rows)} projected rates")
    return 0


def cmd_rp_trajectory(args) -> int:
    p, _ = load_params_csv(args.params)
    specs = [load_premium_csv(path) for path in args.premium]
    months = round(args.horizon_years * 12)
    ts = np.arange(months + 1) / 12.0
    rows = []
    seen = {}
    for spec in specs:
        seen[spec.kind] = seen.get(spec.kind, 0) + 1
        variant = spec.kind if seen[spec.kind] == 1 else f"{spec.kind}-{seen[spec.kind]}"
        rx = rp_x(p, spec, ts)
        ry = rp_y(p, spec, ts)
        for t, vx, vy in zip(ts, rx, ry):
            rows.append([_fmt(t), variant, _fmt(vx), _fmt(vy), _fmt(vx + vy)])
    out = _out_dir(args)
    _write_csv(os.path.join(out, "rp_trajectory.csv"), RP_HEADER, rows)
    print(f"wrote {len(rows)} premium points")
    return 0


def cmd_simulate(args) -> int:
    curve = load_curve(args.curve, extrapolate=args.extrapolate)
    p, _ = load_params_csv(args.params)
    spec = load_premium_csv(args.premium) if args.premium else None
    measure = "P" if spec is not None else "Q"
    config = SimConfig(
        n_paths=args.n_paths,
        horizon=args.horizon_years,
        step=args.step_months / 12.0,
        seed=args.seed,
        measure=measure,
        antithetic=args.antithetic,
    )
    sset = simulate(p, config, spec)
    out = _out_dir(args)
    if args.format == "csv":
        scenario_to_csv(sset, curve, p, os.path.join(out, "scenarios.csv"))
    else:
        scenario_to_binary(sset, os.path.join(out, "scenarios.bin"))
    print(f"simulated {config.n_paths} paths over {config.horizon} years under {measure}")
    return 0


def cmd_average(args) -> int:
    try:
        with open(args.history, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {args.history}: {exc}") from exc
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise InputError(f"{args.history}: need a header and at least one row")
    header, body = rows[0], rows[1:]
    out_rows = []
    for col, name in enumerate(header):
        vals = []
        numeric = True
        for row in body:
            if col >= len(row):
                raise InputError(f"{args.history}: ragged row")
            try:
                vals.append(float(row[col]))
            except ValueError:
                numeric = False
                break
        if numeric:
            out_rows.append([name.strip(), _fmt(np.mean(vals))])
    if not out_rows:
        raise InputError(f"{args.history}: no numeric columns to average")
    out = _out_dir(args)
    _write_csv(os.path.join(out, "averages.csv"), ["series", "average"], out_rows)
    print(f"averaged {len(out_rows)} series over {len(body)} rows")
    return 0


_MANIFEST_KEYS = frozenset([
    "date", "curve", "forecasts", "params", "swaptions",
    "horizon_years", "tenor_years", "tau_months", "kinds", "extrapolate",
])


def _parse_manifest(path):
    """Manifest: key=value lines grouped into [snapshot] sections; lines
    before the first section set defaults."""
    defaults = {}
    snapshots = []
    current = None
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if line == "[snapshot]":
                    current = dict(defaults)
                    snapshots.append(current)
                    continue
                if "=" not in line:
                    raise InputError(f"{path}:{lineno}: expected key=value")
                key, _, val = line.partition("=")
                key = key.strip()
                if key not in _MANIFEST_KEYS:
                    raise InputError(f"{path}:{lineno}: unknown manifest key {key!r}")
                target = defaults if current is None else current
                target[key] = val.strip()
    except OSError as exc:
        raise InputError(f"cannot read manifest {path}: {exc}") from exc
    if not snapshots:
        raise InputError(f"{path}: no [snapshot] sections")
    return snapshots


def _snap_float(snap, key, default):
    raw = snap.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise InputError(f"bad {key} value {raw!r}") from exc


def cmd_backtest(args) -> int:
    cfg = parse_config(args.config) if args.config else {}
    snapshots = _parse_manifest(args.manifest)
    base = os.path.dirname(os.path.abspath(args.manifest))
    out = _out_dir(args)
    horizon = None
    tenor = None
    rows = []
    failures = []
    dispersions: dict[str, list[float]] = {}
    for idx, snap in enumerate(snapshots):
        date = snap.get("date", f"snapshot-{idx}")
        try:
            missing = [k for k in ("date", "curve", "forecasts") if k not in snap]
            if missing:
                raise InputError(f"manifest snapshot lacks keys: {', '.join(missing)}")
            horizon = _snap_float(snap, "horizon_years", 40.0)
            tenor = _snap_float(snap, "tenor_years", 10.0)
            extrap = snap.get("extrapolate", "false").lower() == "true" or args.extrapolate
            curve = load_curve(os.path.join(base, snap["curve"]), extrapolate=extrap,
                               valuation_date=date)
            snap_dir = os.path.join(out, date)
            os.makedirs(snap_dir, exist_ok=True)
            if "params" in snap:
                p, obj = load_params_csv(os.path.join(base, snap["params"]))
            elif "swaptions" in snap:
                quotes = load_swaption_quotes(os.path.join(base, snap["swaptions"]))
                result = calibrate_q(curve, quotes, _simplex_config(cfg))
                if not result.converged:
                    raise NumericError(f"snapshot {date}: calibration did not converge")
                p, obj = result.params, result.objective
            else:
                raise InputError(f"snapshot {date}: needs either params or swaptions")
            write_params_csv(os.path.join(snap_dir, "params.csv"), p, obj)
            forecasts = load_forecasts(os.path.join(base, snap["forecasts"]))
            tau_months = _snap_float(snap, "tau_months", None)
            tau = tau_months / 12.0 if tau_months is not None else None
            kinds = [k.strip() for k in snap.get("kinds", "constant,step,linear").split(",")]
            for kind in kinds:
                short, long_ = _select_forecasts(forecasts, kind)
                spec = calibrate_p(curve, p, kind, short, long_, tau)
                write_premium_csv(os.path.join(snap_dir, f"premium_{kind}.csv"), spec)
                rate = expected_rate_p(curve, p, spec, horizon, horizon + tenor)
                rows.append([date, kind, _fmt(rate)])
                dispersions.setdefault(kind, []).append(rate)
        except G2Error as exc:
            # a broken snapshot is recorded and the replay continues
            failures.append([date, str(exc)])
            print(f"snapshot {date} failed: {exc}", file=sys.stderr)
    _write_csv(os.path.join(out, "backtest.csv"),
               ["date", "variant", "expected_rate"], rows)
    summary = []
    for kind, values in dispersions.items():
        summary.append([kind, _fmt(min(values)), _fmt(max(values)),
                        _fmt(max(values) - min(values))])
    _write_csv(os.path.join(out, "summary.csv"),
               ["variant", "min", "max", "dispersion"], summary)
    if failures:
        _write_csv(os.path.join(out, "failures.csv"), ["date", "error"], failures)
        print(f"backtest over {len(snapshots)} snapshots, {len(failures)} failed")
        return 1
    print(f"backtest over {len(snapshots)} snapshots, horizon {horizon}y tenor {tenor}y")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--seed", type=int, default=0, help="RNG seed")
    common.add_argument("--out", help="output directory (default: current)")
    common.add_argument("--tau-months", type=int, help="premium switch time in months")
    common.add_argument("--kind", choices=["constant", "step", "linear"],
                        help="premium kind")
    common.add_argument("--extrapolate", action="store_true",
                        help="allow flat-forward extrapolation past the last pillar")

    parser = argparse.ArgumentParser(prog="g2pp",
                                     description="two-factor Gaussian short-rate toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    cq = sub.add_parser("calibrate-q", parents=[common],
                        help="fit model parameters to a swaption panel")
    cq.add_argument("--curve", required=True)
    cq.add_argument("--swaptions", required=True)
    cq.add_argument("--params", help="pre-baked parameter csv, skips the fit")
    cq.set_defaults(fn=cmd_calibrate_q)

    cp = sub.add_parser("calibrate-p", parents=[common],
                        help="fit drift targets to rate forecasts")
    cp.add_argument("--curve", required=True)
    cp.add_argument("--params", required=True)
    cp.add_argument("--forecasts", required=True)
    cp.set_defaults(fn=cmd_calibrate_p)

    pj = sub.add_parser("project", parents=[common],
                        help="expected zero rates under both measures")
    pj.add_argument("--curve", required=True)
    pj.add_argument("--params", required=True)
    pj.add_argument("--premium", required=True)
    pj.add_argument("--horizon-years", type=float, default=40.0)
    pj.add_argument("--tenors", default="0.25,10,20",
                    help="comma-separated tenors in years")
    pj.set_defaults(fn=cmd_project)

    rp = sub.add_parser("rp-trajectory", parents=[common],
                        help="risk premium paths for one or more premium specs")
    rp.add_argument("--params", required=True)
    rp.add_argument("--premium", required=True, action="append",
                    help="premium csv, repeatable")
    rp.add_argument("--horizon-years", type=float, default=40.0)
    rp.set_defaults(fn=cmd_rp_trajectory)

    sim = sub.add_parser("simulate", parents=[common],
                         help="generate factor scenarios")
    sim.add_argument("--curve", required=True)
    sim.add_argument("--params", required=True)
    sim.add_argument("--premium", help="premium csv; presence selects the real-world measure")
    sim.add_argument("--n-paths", type=int, required=True)
    sim.add_argument("--horizon-years", type=float, required=True)
    sim.add_argument("--step-months", type=float, default=1.0)
    sim.add_argument("--antithetic", action="store_true")
    sim.add_argument("--format", choices=["csv", "bin"], default="csv")
    sim.set_defaults(fn=cmd_simulate)

    bt = sub.add_parser("backtest", parents=[common],
                        help="replay calibrations over a manifest of snapshots")
    bt.add_argument("--manifest", required=True)
    bt.set_defaults(fn=cmd_backtest)

    av = sub.add_parser("average", parents=[common],
                        help="arithmetic averages of a rate history csv")
    av.add_argument("--history", required=True)
    av.set_defaults(fn=cmd_average)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except G2Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
