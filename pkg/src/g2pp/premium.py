"""Local long-run risk premia and the change to the real-world measure.

A deterministic drift target pair (d_x(t), d_y(t)) turns the risk-neutral
factor dynamics into

    dx = a (d_x(t) - x) dt + sigma dW1~,
    dy = b (d_y(t) - y) dt + eta   dW2~,

so each factor reverts to its target instead of to zero. Bond prices keep
their risk-neutral functional form; only the factor law changes. The
premium added to the expected zero rate is carried by

    RP_x(t) = integral_0^t e^{-a (t-u)} a d_x(u) du

and its y counterpart:

    E_P[r(t,T)] = E_Q[r(t,T)] + B(a,t,T)/(T-t) RP_x(t)
                              + B(b,t,T)/(T-t) RP_y(t).

Three target shapes are supported: constant, a step that switches from
(d_x, d_y) to (l_x, l_y) after tau, and a linear ramp that reaches
(l_x, l_y) at tau and stays there. All three admit closed-form RP, and
RP is linear in (d, l), so calibration to rate forecasts reduces to one
exact linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CalibrationError,
    DegenerateSlopeError,
    InputError,
    SingularityError,
)
from .model import G2Params, b_loading, integrated_phi, integrated_variance

__all__ = [
    "PremiumSpec",
    "d_value",
    "market_price_of_risk",
    "rp_x",
    "rp_y",
    "expected_rate_q",
    "expected_rate_p",
    "calibrate_p",
]

KINDS = ("constant", "step", "linear")

# below this magnitude the linear ramp slope m = (d - l) / (d tau) is unusable
_MIN_LINEAR_D = 1e-12


@dataclass(frozen=True)
class PremiumSpec:
    """Drift target specification for the real-world measure.

    Use the ``constant``, ``step`` and ``linear`` constructors; the slopes
    m_x, m_y of the linear kind are derived, never supplied.
    """

    kind: str
    d_x: float
    d_y: float
    l_x: float | None = None
    l_y: float | None = None
    tau: float | None = None
    m_x: float | None = field(default=None, init=False)
    m_y: float | None = field(default=None, init=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown premium kind {self.kind!r}")
        if self.kind == "constant":
            if self.l_x is not None or self.l_y is not None or self.tau is not None:
                raise InputError("constant kind takes no long-run level or tau")
            return
        if self.l_x is None or self.l_y is None or self.tau is None:
            raise InputError(f"{self.kind} kind needs l_x, l_y and tau")
        if self.tau <= 0.0:
            raise InputError("tau must be positive")
        if self.kind == "linear":
            if abs(self.d_x) < _MIN_LINEAR_D or abs(self.d_y) < _MIN_LINEAR_D:
                raise DegenerateSlopeError(
                    "linear ramp slope is undefined for d near zero; use the step kind"
                )
            object.__setattr__(self, "m_x", (self.d_x - self.l_x) / (self.d_x * self.tau))
            object.__setattr__(self, "m_y", (self.d_y - self.l_y) / (self.d_y * self.tau))

    @classmethod
    def constant(cls, d_x: float, d_y: float) -> "PremiumSpec":
        return cls("constant", d_x, d_y)

    @classmethod
    def step(cls, d_x: float, d_y: float, l_x: float, l_y: float, tau: float) -> "PremiumSpec":
        return cls("step", d_x, d_y, l_x, l_y, tau)

    @classmethod
    def linear(cls, d_x: float, d_y: float, l_x: float, l_y: float, tau: float) -> "PremiumSpec":
        return cls("linear", d_x, d_y, l_x, l_y, tau)


def d_value(spec: PremiumSpec, t):
    """Drift targets (d_x(t), d_y(t)) at time t. The switch to the long-run
    level happens strictly after tau."""
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0.0):
        raise InputError("d_value requires t >= 0")
    if spec.kind == "constant":
        shape = np.broadcast_to(1.0, tt.shape) if tt.ndim else 1.0
        dx, dy = spec.d_x * shape, spec.d_y * shape
    elif spec.kind == "step":
        dx = np.where(tt <= spec.tau, spec.d_x, spec.l_x)
        dy = np.where(tt <= spec.tau, spec.d_y, spec.l_y)
    else:
        dx = np.where(tt <= spec.tau, (1.0 - spec.m_x * tt) * spec.d_x, spec.l_x)
        dy = np.where(tt <= spec.tau, (1.0 - spec.m_y * tt) * spec.d_y, spec.l_y)
    if tt.ndim:
        return dx, dy
    return float(dx), float(dy)


def market_price_of_risk(p: G2Params, spec: PremiumSpec, t):
    """Girsanov kernel Phi(t) mapping the drift targets onto the two
    Brownian drivers.

    Phi_1 = -a d_x(t) / sigma
    Phi_2 = -b d_y(t) / (eta sqrt(1-rho^2)) + rho a d_x(t) / (sigma sqrt(1-rho^2))

    Undefined on the singular boundary |rho| = 1 or when a volatility
    vanishes.
    """
    if abs(p.rho) >= 1.0 - 1e-9:
        raise SingularityError("market price of risk is undefined for |rho| ~ 1")
    if p.sigma <= 0.0 or p.eta <= 0.0:
        raise SingularityError("market price of risk needs sigma > 0 and eta > 0")
    dx, dy = d_value(spec, t)
    root = np.sqrt(1.0 - p.rho**2)
    phi1 = -p.a * dx / p.sigma
    phi2 = -p.b * dy / (p.eta * root) + p.rho * p.a * dx / (p.sigma * root)
    return phi1, phi2


def _rp_coefficients(z: float, spec: PremiumSpec, t):
    """Weights (cd, cl) such that RP(t) = cd * d + cl * l for decay speed z.

    For the linear kind the slope enters only through m d = (d - l) / tau,
    which keeps RP linear in (d, l).
    """
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0.0):
        raise InputError("risk premium functions require t >= 0")
    if spec.kind == "constant":
        cd = -np.expm1(-z * tt)
        return cd, np.zeros_like(cd)
    s = np.minimum(tt, spec.tau)
    e1 = np.exp(-z * (tt - s))
    e2 = np.exp(-z * tt)
    if spec.kind == "step":
        return e1 - e2, 1.0 - e1
    w = ((e1 - e2) / z - s * e1) / spec.tau
    return (e1 - e2) + w, (1.0 - e1) - w


def rp_x(p: G2Params, spec: PremiumSpec, t):
    """Closed form of RP_x(t) = integral_0^t e^{-a(t-u)} a d_x(u) du."""
    cd, cl = _rp_coefficients(p.a, spec, t)
    out = cd * spec.d_x + cl * (spec.l_x if spec.l_x is not None else 0.0)
    return out if np.ndim(out) else float(out)


def rp_y(p: G2Params, spec: PremiumSpec, t):
    """Closed form of RP_y(t), the y-factor analogue of rp_x."""
    cd, cl = _rp_coefficients(p.b, spec, t)
    out = cd * spec.d_y + cl * (spec.l_y if spec.l_y is not None else 0.0)
    return out if np.ndim(out) else float(out)


def d_integral(spec: PremiumSpec, t):
    """Integral of the drift target d_x-shape over [0, t], per component."""
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0.0):
        raise InputError("d_integral requires t >= 0")
    if spec.kind == "constant":
        ix, iy = spec.d_x * tt, spec.d_y * tt
    elif spec.kind == "step":
        s = np.minimum(tt, spec.tau)
        ix = spec.d_x * s + spec.l_x * (tt - s)
        iy = spec.d_y * s + spec.l_y * (tt - s)
    else:
        s = np.minimum(tt, spec.tau)
        ix = spec.d_x * (s - 0.5 * spec.m_x * s**2) + spec.l_x * (tt - s)
        iy = spec.d_y * (s - 0.5 * spec.m_y * s**2) + spec.l_y * (tt - s)
    if tt.ndim:
        return ix, iy
    return float(ix), float(iy)


def expected_rate_q(curve, p: G2Params, t, T):
    """Risk-neutral expectation of the zero rate r(t, T) seen from today."""
    dt = np.asarray(T, dtype=float) - np.asarray(t, dtype=float)
    if np.any(dt <= 0.0):
        raise InputError("expected_rate_q requires T > t")
    out = (integrated_phi(curve, p, t, T) - 0.5 * integrated_variance(p, t, T)) / dt
    return out if np.ndim(out) else float(out)


def expected_rate_p(curve, p: G2Params, spec: PremiumSpec, t, T):
    """Real-world expectation of r(t, T): the risk-neutral expectation plus
    the premium carried by RP_x and RP_y."""
    dt = np.asarray(T, dtype=float) - np.asarray(t, dtype=float)
    if np.any(dt <= 0.0):
        raise InputError("expected_rate_p requires T > t")
    base = expected_rate_q(curve, p, t, T)
    la = b_loading(p.a, t, T) / dt
    lb = b_loading(p.b, t, T) / dt
    out = base + la * rp_x(p, spec, t) + lb * rp_y(p, spec, t)
    return out if np.ndim(out) else float(out)


def _loading_row(curve, p, spec_proto, fc):
    t, T = fc.horizon_years, fc.maturity_years
    la = b_loading(p.a, t, T) / (T - t)
    lb = b_loading(p.b, t, T) / (T - t)
    cda, cla = _rp_coefficients(p.a, spec_proto, t)
    cdb, clb = _rp_coefficients(p.b, spec_proto, t)
    return la, lb, float(cda), float(cla), float(cdb), float(clb)


def calibrate_p(curve, p: G2Params, kind: str, short_forecasts, long_forecasts=None,
                tau: float | None = None) -> PremiumSpec:
    """Solve the drift targets so the model reproduces the rate forecasts.

    The constant kind fits (d_x, d_y) to exactly two forecasts; the step
    and linear kinds additionally fit (l_x, l_y) to two long-horizon
    forecasts, with horizons ordered t1 <= t2 < t3 <= t4 and the switch
    time satisfying t2 <= tau < t3. Each system is linear and solved
    directly; an ill-conditioned system is reported, never least-squared.
    """
    if kind not in KINDS:
        raise InputError(f"unknown premium kind {kind!r}")
    short = list(short_forecasts)
    long = list(long_forecasts) if long_forecasts else []
    if len(short) != 2:
        raise InputError("calibration needs exactly two short-horizon forecasts")
    if kind == "constant":
        if long:
            raise InputError("constant kind takes no long-horizon forecasts")
        proto = PremiumSpec.constant(0.0, 0.0)
        rows = [_loading_row(curve, p, proto, fc) for fc in short]
        mat = np.array([[la * cda, lb * cdb] for la, lb, cda, _, cdb, _ in rows])
        rhs = np.array([fc.rate - expected_rate_q(curve, p, fc.horizon_years, fc.maturity_years)
                        for fc in short])
        _check_conditioning(mat, short)
        d = np.linalg.solve(mat, rhs)
        return PremiumSpec.constant(float(d[0]), float(d[1]))

    if len(long) != 2:
        raise InputError(f"{kind} kind needs exactly two long-horizon forecasts")
    if tau is None or tau <= 0.0:
        raise InputError(f"{kind} kind needs a positive tau")
    t1, t2 = short[0].horizon_years, short[1].horizon_years
    t3, t4 = long[0].horizon_years, long[1].horizon_years
    if not (t1 <= t2 < t3 <= t4):
        raise InputError("forecast horizons must satisfy t1 <= t2 < t3 <= t4")
    if not (t2 <= tau < t3):
        raise InputError("tau must satisfy t2 <= tau < t3")
    # coefficient extraction only touches kind and tau, so placeholder
    # levels are fine here (the linear kind folds its slope into them)
    proto = PremiumSpec("step", 0.0, 0.0, 0.0, 0.0, tau) if kind == "step" \
        else PremiumSpec("linear", 1.0, 1.0, 0.0, 0.0, tau)
    all_fc = short + long
    mat = np.zeros((4, 4))
    rhs = np.zeros(4)
    for i, fc in enumerate(all_fc):
        la, lb, cda, cla, cdb, clb = _loading_row(curve, p, proto, fc)
        mat[i] = [la * cda, lb * cdb, la * cla, lb * clb]
        rhs[i] = fc.rate - expected_rate_q(curve, p, fc.horizon_years, fc.maturity_years)
    _check_conditioning(mat, all_fc)
    sol = np.linalg.solve(mat, rhs)
    d_x_, d_y_, l_x_, l_y_ = (float(v) for v in sol)
    if kind == "step":
        return PremiumSpec.step(d_x_, d_y_, l_x_, l_y_, tau)
    if abs(d_x_) < _MIN_LINEAR_D or abs(d_y_) < _MIN_LINEAR_D:
        raise DegenerateSlopeError(
            "solved d is numerically zero, the linear ramp slope is undefined; "
            "use the step kind for these forecasts"
        )
    return PremiumSpec.linear(d_x_, d_y_, l_x_, l_y_, tau)


def _check_conditioning(mat, forecasts):
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > 1e12:
        norms = np.linalg.norm(mat, axis=1)
        unit = mat / np.where(norms > 0.0, norms, 1.0)[:, None]
        worst, pair = -1.0, (0, 1)
        for i in range(len(mat)):
            for j in range(i + 1, len(mat)):
                c = abs(float(unit[i] @ unit[j]))
                if c > worst:
                    worst, pair = c, (i, j)
        fi, fj = forecasts[pair[0]], forecasts[pair[1]]
        raise CalibrationError(
            f"forecast system is singular (cond {cond:.3g}); forecasts at horizons "
            f"{fi.horizon_years} and {fj.horizon_years} are nearly colinear"
        )
