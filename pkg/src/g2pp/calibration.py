"""Risk-neutral parameter calibration to a swaption panel.

The five parameters are fitted by Nelder-Mead in a transformed space,
log for the positive parameters and atanh for the correlation, so the
search is unconstrained and the rho = +-1 boundary saturates smoothly
instead of being clipped. The objective is the relative price RMSE;
quotes supplied as normal vols are converted to prices once, up front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .errors import InputError
from .market import SwaptionQuote
from .model import G2Params
from .pricing import (
    SwaptionSpec,
    annuity,
    atm_forward_swap_rate,
    bachelier_price,
    _price_batch,
)

_RHO_CAP = 1.0 - 1e-12
_ABS_QUOTE_FLOOR = 1e-12


@dataclass(frozen=True)
class SimplexConfig:
    """Start point and stopping rules for the simplex search."""

    start: G2Params = field(default_factory=lambda: G2Params(0.1, 0.05, 0.01, 0.01, -0.5))
    max_iter: int = 2000
    tol_x: float = 1e-8
    tol_f: float = 1e-10
    restarts: int = 5

    def __post_init__(self):
        if self.max_iter < 1 or self.restarts < 0:
            raise InputError("max_iter must be >= 1 and restarts >= 0")
        if self.tol_x <= 0.0 or self.tol_f <= 0.0:
            raise InputError("tolerances must be positive")


@dataclass(frozen=True)
class CalibrationQResult:
    params: G2Params
    objective: float
    iterations: int
    converged: bool
    restarts_used: int
    warnings: tuple[str, ...] = ()


def _to_unconstrained(p: G2Params) -> np.ndarray:
    if min(p.a, p.b, p.sigma, p.eta) <= 0.0:
        raise InputError("calibration start needs strictly positive a, b, sigma, eta")
    rho = min(max(p.rho, -_RHO_CAP), _RHO_CAP)
    return np.array([math.log(p.a), math.log(p.b), math.log(p.sigma),
                     math.log(p.eta), math.atanh(rho)])


def _from_unconstrained(z: np.ndarray) -> G2Params:
    return G2Params(math.exp(z[0]), math.exp(z[1]), math.exp(z[2]),
                    math.exp(z[3]), math.tanh(z[4]))


def _canonicalize(p: G2Params) -> G2Params:
    """Order the factors so a >= b; the model is symmetric under the swap."""
    if p.a >= p.b:
        return p
    return replace(p, a=p.b, b=p.a, sigma=p.eta, eta=p.sigma)


def _build_specs(curve, quotes) -> tuple[list[SwaptionSpec], np.ndarray]:
    specs, targets = [], []
    for q in quotes:
        atm = atm_forward_swap_rate(curve, q.expiry_years, q.tenor_years)
        strike = atm if q.strike is None else q.strike
        spec = SwaptionSpec.annual(q.expiry_years, q.tenor_years, strike, kind="payer")
        if q.quote_kind == "price":
            target = q.quote
        else:
            target = bachelier_price(atm, strike, q.quote, q.expiry_years,
                                     annuity(curve, spec), kind="payer")
        specs.append(spec)
        targets.append(target)
    return specs, np.array(targets)


def _rmse(model: np.ndarray, targets: np.ndarray) -> float:
    # quotes close to zero are compared absolutely to avoid exploding ratios
    denom = np.where(np.abs(targets) < _ABS_QUOTE_FLOOR, 1.0, targets)
    err = (model - targets) / denom
    return float(np.sqrt(np.mean(err**2)))


def objective(curve, quotes, candidate: G2Params) -> float:
    """Relative price RMSE of the candidate parameters over the quotes."""
    if not quotes:
        raise InputError("objective needs at least one quote")
    specs, targets = _build_specs(curve, quotes)
    return _rmse(_price_batch(curve, candidate, specs), targets)


def _initial_simplex(z: np.ndarray) -> np.ndarray:
    simplex = np.tile(z, (len(z) + 1, 1))
    for k in range(len(z)):
        bump = 0.1 * abs(z[k])
        simplex[k + 1, k] += bump if bump > 1e-12 else 0.1
    return simplex


def calibrate_q(curve, quotes, config: SimplexConfig | None = None) -> CalibrationQResult:
    """Fit (a, b, sigma, eta, rho) to the quoted swaption panel.

    Runs the simplex search from the configured start, then restarts from
    the best vertex with a fresh simplex until no restart improves the
    objective or the restart budget is spent. The best parameters seen
    are returned, canonicalized so a >= b.
    """
    if not quotes:
        raise InputError("calibration needs at least one quote")
    for q in quotes:
        if not isinstance(q, SwaptionQuote):
            raise InputError("quotes must be SwaptionQuote instances")
    cfg = config or SimplexConfig()
    warnings = ()
    if len(quotes) < 5:
        warnings = ("fewer quotes than parameters, the fit is under-determined",)

    specs, targets = _build_specs(curve, quotes)

    def fn(z):
        return _rmse(_price_batch(curve, _from_unconstrained(z), specs), targets)

    best_z = _to_unconstrained(cfg.start)
    best_f = fn(best_z)
    total_iter = 0
    restarts_used = 0
    converged = False
    for round_no in range(cfg.restarts + 1):
        res = minimize(
            fn,
            best_z,
            method="Nelder-Mead",
            options={
                "initial_simplex": _initial_simplex(best_z),
                "xatol": cfg.tol_x,
                "fatol": cfg.tol_f,
                "maxiter": cfg.max_iter,
                "maxfev": 4 * cfg.max_iter,
            },
        )
        total_iter += int(res.nit)
        if round_no > 0:
            restarts_used += 1
        improved = res.fun < best_f - cfg.tol_f
        if res.fun <= best_f:
            best_z, best_f = np.asarray(res.x), float(res.fun)
        converged = bool(res.success)
        if converged and not improved and round_no > 0:
            break
        if best_f <= cfg.tol_f:
            break
    params = _canonicalize(_from_unconstrained(best_z))
    return CalibrationQResult(
        params=params,
        objective=best_f,
        iterations=total_iter,
        converged=converged,
        restarts_used=restarts_used,
        warnings=warnings,
    )
