"""Swap and swaption pricing under the two-factor Gaussian model.

European swaptions are priced by the standard reduction to a single
integral: under the expiry-forward measure the factor pair at expiry is
bivariate normal, the inner factor is integrated out analytically after
locating the critical exercise value by a root search, and the outer
factor is integrated by Gauss-Legendre quadrature over +-8 standard
deviations with node doubling until the price stabilizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr

from .errors import InputError, NumericError
from .model import G2Params, b_loading, integrated_variance, transition_covariance

_STDEV_SPAN = 8.0
_NODES_START = 64
_NODES_MAX = 1024
_REL_TOL = 1e-8
_EXP_CAP = 500.0  # caps exponents during bracketing so the search cannot overflow

_leggauss_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_nodes(n: int):
    if n not in _leggauss_cache:
        _leggauss_cache[n] = leggauss(n)
    return _leggauss_cache[n]


@dataclass(frozen=True)
class SwaptionSpec:
    """European swaption on a fixed-for-float swap starting at expiry.

    payment_times are the absolute fixed-leg payment dates; the year
    fraction of the first period runs from expiry.
    """

    expiry: float
    payment_times: tuple[float, ...]
    fixed_rate: float
    notional: float = 1.0
    kind: str = "payer"

    def __post_init__(self):
        if self.expiry <= 0.0:
            raise InputError("swaption expiry must be positive")
        times = tuple(float(t) for t in self.payment_times)
        if not times:
            raise InputError("swaption needs at least one payment time")
        if times[0] <= self.expiry or np.any(np.diff(times) <= 0.0):
            raise InputError("payment times must increase strictly from the expiry")
        if self.notional <= 0.0:
            raise InputError("notional must be positive")
        if self.kind not in ("payer", "receiver"):
            raise InputError(f"unknown swaption kind {self.kind!r}")
        object.__setattr__(self, "payment_times", times)

    @classmethod
    def annual(cls, expiry: float, tenor: float, fixed_rate: float,
               notional: float = 1.0, kind: str = "payer") -> "SwaptionSpec":
        """Swaption on an annual fixed leg of integral tenor."""
        n = round(tenor)
        if abs(tenor - n) > 1e-9 or n < 1:
            raise InputError("annual fixed leg needs an integral tenor >= 1")
        times = tuple(expiry + i for i in range(1, n + 1))
        return cls(expiry, times, fixed_rate, notional, kind)

    def year_fractions(self) -> np.ndarray:
        times = np.concatenate(([self.expiry], self.payment_times))
        return np.diff(times)


def annuity(curve, spec: SwaptionSpec) -> float:
    """Fixed-leg annuity: sum of year fractions times discount factors."""
    taus = spec.year_fractions()
    dfs = curve.discount(np.asarray(spec.payment_times))
    return float(np.sum(taus * dfs))


def forward_swap_rate(curve, spec: SwaptionSpec) -> float:
    """Par rate of the underlying swap seen from today."""
    df0 = curve.discount(spec.expiry)
    dfn = curve.discount(spec.payment_times[-1])
    return float((df0 - dfn) / annuity(curve, spec))


def atm_forward_swap_rate(curve, expiry: float, tenor: float) -> float:
    """Par rate of the annual-fixed-leg swap from expiry over tenor years."""
    probe = SwaptionSpec.annual(expiry, tenor, 0.0)
    return forward_swap_rate(curve, probe)


def bachelier_price(forward: float, strike: float, normal_vol: float, expiry: float,
                    annuity_value: float, kind: str = "payer") -> float:
    """Bachelier (normal) swaption price per unit notional.

    payer = annuity [ (F-K) N(d) + v n(d) ],  v = vol sqrt(T),  d = (F-K)/v.
    Zero vol degrades to the discounted intrinsic value.
    """
    if kind not in ("payer", "receiver"):
        raise InputError(f"unknown swaption kind {kind!r}")
    if expiry <= 0.0:
        raise InputError("bachelier_price requires expiry > 0")
    if normal_vol < 0.0:
        raise InputError("normal vol must be nonnegative")
    omega = 1.0 if kind == "payer" else -1.0
    moneyness = omega * (forward - strike)
    v = normal_vol * math.sqrt(expiry)
    if v == 0.0:
        return annuity_value * max(moneyness, 0.0)
    d = moneyness / v
    return float(annuity_value * (moneyness * ndtr(d) + v * math.exp(-0.5 * d * d) / math.sqrt(2.0 * math.pi)))


def _forward_measure_means(p: G2Params, T):
    """Means of (x(T), y(T)) under the T-forward measure.

    Starting from x(0) = y(0) = 0 the factors pick up the deterministic
    drift -Cov(dx, dP/P) integrated over [0, T]:

    mu_x = -[(s^2/a^2 + r s e/(a b))(1 - e^{-aT}) - s^2/(2a^2)(1 - e^{-2aT})
             - r s e/(b(a+b))(1 - e^{-(a+b)T})]
    """
    a, b, s, e, r = p.a, p.b, p.sigma, p.eta, p.rho
    ea = -np.expm1(-a * T)
    eb = -np.expm1(-b * T)
    e2a = -np.expm1(-2.0 * a * T)
    e2b = -np.expm1(-2.0 * b * T)
    eab = -np.expm1(-(a + b) * T)
    mu_x = -((s**2 / a**2 + r * s * e / (a * b)) * ea
             - s**2 / (2.0 * a**2) * e2a
             - r * s * e / (b * (a + b)) * eab)
    mu_y = -((e**2 / b**2 + r * s * e / (a * b)) * eb
             - e**2 / (2.0 * b**2) * e2b
             - r * s * e / (a * (a + b)) * eab)
    return mu_x, mu_y


class _SwaptionBatch:
    """Padded arrays for pricing several swaptions under one parameter set."""

    def __init__(self, curve, p: G2Params, specs):
        J = len(specs)
        P = max(len(s.payment_times) for s in specs)
        self.J, self.P = J, P
        self.T0 = np.array([s.expiry for s in specs])
        self.omega = np.array([1.0 if s.kind == "payer" else -1.0 for s in specs])
        self.notional = np.array([s.notional for s in specs])
        # padding replicates the expiry so loadings vanish and c = 0 kills the term
        tpay = np.repeat(self.T0[:, None], P, axis=1)
        c = np.zeros((J, P))
        for j, s in enumerate(specs):
            n = len(s.payment_times)
            tpay[j, :n] = s.payment_times
            taus = s.year_fractions()
            c[j, :n] = s.fixed_rate * taus
            c[j, n - 1] += 1.0
        self.c = c
        self.Ba = b_loading(p.a, self.T0[:, None], tpay)
        self.Bb = b_loading(p.b, self.T0[:, None], tpay)
        v_T0_t = integrated_variance(p, self.T0[:, None], tpay)
        v_0_t = integrated_variance(p, 0.0, tpay)
        v_0_T0 = integrated_variance(p, 0.0, self.T0)
        ln_df_pay = curve.log_discount(tpay)
        self.ln_df_T0 = curve.log_discount(self.T0)
        self.A = np.exp(ln_df_pay - self.ln_df_T0[:, None]
                        + 0.5 * (v_T0_t - v_0_t + v_0_T0[:, None]))
        vx, vy, cxy = transition_covariance(p, self.T0)
        self.mu_x, self.mu_y = _forward_measure_means(p, self.T0)
        self.sx = np.sqrt(vx)
        self.slope = np.where(vx > 0.0, cxy / np.where(vx > 0.0, vx, 1.0), 0.0)
        self.s_cond = np.sqrt(np.maximum(vy - self.slope * cxy, 0.0))

    def inner_value(self, idx, xg):
        """Expected exercise value given outer-factor values xg, rows idx."""
        c = self.c[idx][:, None, :]
        A = self.A[idx][:, None, :]
        Ba = self.Ba[idx][:, None, :]
        Bb = self.Bb[idx][:, None, :]
        omega = self.omega[idx][:, None]
        m = self.mu_y[idx][:, None] + self.slope[idx][:, None] * (xg - self.mu_x[idx][:, None])
        s = self.s_cond[idx][:, None]
        w = c * A * np.exp(np.minimum(-Ba * xg[:, :, None], _EXP_CAP))
        degenerate = self.s_cond[idx] == 0.0
        out = np.empty_like(xg)
        if np.any(~degenerate):
            rows = np.where(~degenerate)[0]
            ybar = _exercise_boundary(w[rows], Bb[rows])
            h1 = (ybar - m[rows]) / s[rows]
            h2 = h1[:, :, None] + Bb[rows] * s[rows][:, :, None]
            kappa = -Bb[rows] * m[rows][:, :, None] + 0.5 * (Bb[rows] * s[rows][:, :, None]) ** 2
            om = omega[rows][:, :, None]
            val = omega[rows] * (ndtr(-omega[rows] * h1)
                                 - np.sum(w[rows] * np.exp(kappa) * ndtr(-om * h2), axis=-1))
            out[rows] = np.maximum(val, 0.0)
        if np.any(degenerate):
            rows = np.where(degenerate)[0]
            swap = 1.0 - np.sum(w[rows] * np.exp(-Bb[rows] * m[rows][:, :, None]), axis=-1)
            out[rows] = np.maximum(omega[rows] * swap, 0.0)
        return out

    def quadrature(self, idx, n_nodes):
        """Price rows idx with an n_nodes Gauss-Legendre rule on the outer factor."""
        prices = np.empty(len(idx))
        sx = self.sx[idx]
        live = sx > 0.0
        if np.any(live):
            rows = np.asarray(idx)[live]
            u, wq = _gl_nodes(n_nodes)
            mu = self.mu_x[rows][:, None]
            sd = self.sx[rows][:, None]
            xg = mu + _STDEV_SPAN * sd * u[None, :]
            dens = np.exp(-0.5 * ((xg - mu) / sd) ** 2) / (sd * math.sqrt(2.0 * math.pi))
            weights = wq[None, :] * dens * _STDEV_SPAN * sd
            inner = self.inner_value(rows, xg)
            prices[live] = np.sum(weights * inner, axis=1)
        if np.any(~live):
            rows = np.asarray(idx)[~live]
            xg = self.mu_x[rows][:, None]
            inner = self.inner_value(rows, xg)
            prices[~live] = inner[:, 0]
        return prices * np.exp(self.ln_df_T0[idx]) * self.notional[idx]


def _exercise_boundary(w, Bb):
    """Solve sum_i w_i exp(-Bb_i y) = 1 for y, vectorized over (rows, nodes).

    Newton steps guarded by a sign-change bracket; the coupon sum is
    decreasing in y for the strikes this pricer meets, and a failure to
    bracket or settle is reported as a numeric error.
    """

    def g(yv):
        return np.sum(w * np.exp(np.minimum(-Bb * yv[:, :, None], _EXP_CAP)), axis=-1)

    shape = w.shape[:2]
    lo = np.full(shape, -5.0)
    hi = np.full(shape, 5.0)
    flo = g(lo) - 1.0
    fhi = g(hi) - 1.0
    for _ in range(6):
        unbracketed = np.sign(flo) == np.sign(fhi)
        if not np.any(unbracketed):
            break
        lo = np.where(unbracketed, lo * 2.0, lo)
        hi = np.where(unbracketed, hi * 2.0, hi)
        flo = np.where(unbracketed, g(lo) - 1.0, flo)
        fhi = np.where(unbracketed, g(hi) - 1.0, fhi)
    if np.any(np.sign(flo) == np.sign(fhi)):
        raise NumericError("cannot bracket the swaption exercise boundary")

    y = 0.5 * (lo + hi)
    for _ in range(100):
        ey = np.exp(np.minimum(-Bb * y[:, :, None], _EXP_CAP))
        f = np.sum(w * ey, axis=-1) - 1.0
        gp = -np.sum(w * Bb * ey, axis=-1)
        lo = np.where(f > 0.0, y, lo)
        hi = np.where(f <= 0.0, y, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / gp
            cand = y - step
        bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi)
        y = np.where(bad, 0.5 * (lo + hi), cand)
        if np.max(hi - lo) < 1e-13 * (1.0 + np.max(np.abs(y))):
            break
    resid = np.abs(g(y) - 1.0)
    if np.max(resid) > 1e-9:
        raise NumericError("swaption exercise boundary search did not settle")
    return y


def _price_batch(curve, p: G2Params, specs) -> np.ndarray:
    batch = _SwaptionBatch(curve, p, specs)
    idx = np.arange(batch.J)
    n = _NODES_START
    prices = batch.quadrature(idx, n)
    pending = idx
    while pending.size:
        n *= 2
        if n > _NODES_MAX:
            raise NumericError(
                f"swaption quadrature did not stabilize to {_REL_TOL} by {_NODES_MAX} nodes"
            )
        refined = batch.quadrature(pending, n)
        old = prices[pending]
        scale = np.maximum(np.maximum(np.abs(old), np.abs(refined)), 1e-16)
        ok = np.abs(refined - old) <= _REL_TOL * scale
        prices[pending] = refined
        pending = pending[~ok]
    return prices


def price_swaption_g2(curve, p: G2Params, spec: SwaptionSpec) -> float:
    """Price one European swaption semi-analytically under the model."""
    return float(_price_batch(curve, p, [spec])[0])
