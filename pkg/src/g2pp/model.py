"""Core quantities of the two-factor Gaussian short-rate model.

The short rate is r(t) = x(t) + y(t) + phi(t) with mean-reverting
Gaussian factors

    dx = -a x dt + sigma dW1,   dy = -b y dt + eta dW2,
    dW1 dW2 = rho dt,           x(0) = y(0) = 0.

Conditional on time t, the integral of r over [t, T] is normal, which
gives the affine bond price

    P(t,T) = exp(-Iphi(t,T) - B(a,t,T) x(t) - B(b,t,T) y(t) + V(t,T)/2)

with B(z,t,T) = (1 - exp(-z (T-t))) / z and V the integrated variance
below. The deterministic shift phi never appears pointwise in pricing:
fitting the initial curve pins down its integral,

    Iphi(t,T) = ln(df(t) / df(T)) + (V(0,T) - V(0,t)) / 2,

so every pillar is repriced exactly by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

__all__ = [
    "G2Params",
    "FactorState",
    "b_loading",
    "integrated_variance",
    "integrated_phi",
    "bond_price",
    "model_rate",
    "phi_value",
    "transition_covariance",
]


@dataclass(frozen=True)
class G2Params:
    """Model parameters. Mean reversions must be positive, vols nonnegative."""

    a: float
    b: float
    sigma: float
    eta: float
    rho: float

    def __post_init__(self):
        if self.a <= 0.0 or self.b <= 0.0:
            raise InputError("mean reversion speeds a, b must be positive")
        if self.sigma < 0.0 or self.eta < 0.0:
            raise InputError("volatilities sigma, eta must be nonnegative")
        if abs(self.rho) > 1.0:
            raise InputError("rho must lie in [-1, 1]")


@dataclass(frozen=True)
class FactorState:
    """Factor values observed at time t."""

    t: float
    x: float
    y: float

    def __post_init__(self):
        if self.t < 0.0:
            raise InputError("state time must be nonnegative")


def b_loading(z, t, T):
    """B(z,t,T) = (1 - exp(-z (T-t))) / z, the affine factor loading.

    Tends to T - t as z -> 0; expm1 keeps that limit accurate without a
    separate branch.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0):
        raise InputError("b_loading requires z > 0")
    dt = np.asarray(T, dtype=float) - np.asarray(t, dtype=float)
    if np.any(dt < 0.0):
        raise InputError("b_loading requires T >= t")
    out = -np.expm1(-z * dt) / z
    return out if out.ndim else float(out)


def integrated_variance(p: G2Params, t, T):
    """Variance of the integral of x + y over [t, T].

    V(t,T) = sigma^2/a^2 [dt + 2/a e^{-a dt} - 1/(2a) e^{-2a dt} - 3/(2a)]
           + eta^2/b^2   [same in b]
           + 2 rho sigma eta/(ab) [dt + (e^{-a dt}-1)/a + (e^{-b dt}-1)/b
                                      - (e^{-(a+b) dt}-1)/(a+b)]

    with dt = T - t. Depends on T - t only.
    """
    dt = np.asarray(T, dtype=float) - np.asarray(t, dtype=float)
    if np.any(dt < 0.0):
        raise InputError("integrated_variance requires T >= t")
    a, b = p.a, p.b
    ea, eb = np.exp(-a * dt), np.exp(-b * dt)
    eab = np.exp(-(a + b) * dt)
    vx = p.sigma**2 / a**2 * (dt + 2.0 / a * ea - 0.5 / a * ea**2 - 1.5 / a)
    vy = p.eta**2 / b**2 * (dt + 2.0 / b * eb - 0.5 / b * eb**2 - 1.5 / b)
    vxy = (2.0 * p.rho * p.sigma * p.eta / (a * b)) * (
        dt + (ea - 1.0) / a + (eb - 1.0) / b - (eab - 1.0) / (a + b)
    )
    out = vx + vy + vxy
    # V is a variance; rounding near dt = 0 must not push it below zero
    out = np.where(dt > 0.0, np.maximum(out, 0.0), 0.0)
    return out if out.ndim else float(out)


def integrated_phi(curve, p: G2Params, t, T):
    """Integral of the deterministic shift phi over [t, T].

    Recovered from the initial curve fit rather than from any pointwise
    phi representation, so it is exact at the pillars.
    """
    dt = np.asarray(T, dtype=float) - np.asarray(t, dtype=float)
    if np.any(dt < 0.0):
        raise InputError("integrated_phi requires T >= t")
    v0 = integrated_variance(p, 0.0, t)
    vT = integrated_variance(p, 0.0, T)
    out = curve.log_discount(t) - curve.log_discount(T) + 0.5 * (vT - v0)
    return out if np.ndim(out) else float(out)


def bond_price(curve, p: G2Params, state: FactorState, T):
    """Zero-coupon bond price P(t,T) given the factor state at t."""
    tt = np.asarray(T, dtype=float)
    if np.any(tt < state.t):
        raise InputError("bond maturity must not precede the state time")
    iphi = integrated_phi(curve, p, state.t, tt)
    ba = b_loading(p.a, state.t, tt)
    bb = b_loading(p.b, state.t, tt)
    v = integrated_variance(p, state.t, tt)
    out = np.exp(-iphi - ba * state.x - bb * state.y + 0.5 * v)
    return out if np.ndim(out) else float(out)


def model_rate(curve, p: G2Params, state: FactorState, T):
    """Continuously compounded zero rate r(t,T) = -ln P(t,T) / (T-t)."""
    tt = np.asarray(T, dtype=float)
    if np.any(tt <= state.t):
        raise InputError("model_rate requires T > t")
    iphi = integrated_phi(curve, p, state.t, tt)
    ba = b_loading(p.a, state.t, tt)
    bb = b_loading(p.b, state.t, tt)
    v = integrated_variance(p, state.t, tt)
    out = (iphi + ba * state.x + bb * state.y - 0.5 * v) / (tt - state.t)
    return out if np.ndim(out) else float(out)


def phi_value(curve, p: G2Params, t):
    """Pointwise deterministic shift phi(t) implied by the fitted curve.

    phi(t) = f(0,t) + [sigma^2 B(a,0,t)^2 + eta^2 B(b,0,t)^2
                       + 2 rho sigma eta B(a,0,t) B(b,0,t)] / 2

    where f is the instantaneous forward of the input curve. Only needed
    when a short-rate path is reported; pricing never touches it.
    """
    ba = b_loading(p.a, 0.0, t)
    bb = b_loading(p.b, 0.0, t)
    conv = 0.5 * (p.sigma**2 * ba**2 + p.eta**2 * bb**2
                  + 2.0 * p.rho * p.sigma * p.eta * ba * bb)
    out = curve.forward_rate(t) + conv
    return out if np.ndim(out) else float(out)


def transition_covariance(p: G2Params, dt):
    """Exact covariance of the factor innovations over a step of length dt.

    Var eps_x = sigma^2 (1 - e^{-2a dt}) / (2a)
    Var eps_y = eta^2   (1 - e^{-2b dt}) / (2b)
    Cov       = rho sigma eta (1 - e^{-(a+b) dt}) / (a + b)
    """
    dt = np.asarray(dt, dtype=float)
    if np.any(dt < 0.0):
        raise InputError("transition_covariance requires dt >= 0")
    vx = p.sigma**2 * -np.expm1(-2.0 * p.a * dt) / (2.0 * p.a)
    vy = p.eta**2 * -np.expm1(-2.0 * p.b * dt) / (2.0 * p.b)
    cxy = p.rho * p.sigma * p.eta * -np.expm1(-(p.a + p.b) * dt) / (p.a + p.b)
    if np.ndim(dt):
        return vx, vy, cxy
    return float(vx), float(vy), float(cxy)
