import math

import numpy as np
import pytest

from g2pp import (
    CalibrationError,
    DegenerateSlopeError,
    G2Params,
    InputError,
    PremiumSpec,
    RateForecast,
    SingularityError,
    b_loading,
    calibrate_p,
    d_integral,
    d_value,
    expected_rate_p,
    expected_rate_q,
    market_price_of_risk,
    rp_x,
    rp_y,
)
from g2pp.premium import _rp_coefficients


def _rp_trapezoid(z, spec, t, nodes=200001):
    """Reference: trapezoid of the defining integral, split at tau."""
    segments = [(0.0, t)]
    if spec.tau is not None and 0.0 < spec.tau < t:
        segments = [(0.0, spec.tau), (spec.tau, t)]
    total = 0.0
    for lo, hi in segments:
        u = np.linspace(lo, hi, nodes)
        # the switch applies strictly after tau, so the post-switch segment
        # must sample its left endpoint on the far side of the jump
        ueval = u.copy()
        if lo == spec.tau:
            ueval[0] = np.nextafter(lo, hi)
        dx, _ = d_value(spec, ueval)
        total += np.trapezoid(np.exp(-z * (t - u)) * z * dx, u)
    return total


def test_rp_step_matches_quadrature_literal():
    spec = PremiumSpec.step(d_x=-0.0112, d_y=-0.0112, l_x=-0.0081, l_y=-0.0081, tau=2.0)
    # oracle: adaptive quadrature of exp(-a(t-u)) a d(u) split at tau
    assert rp_x(G2Params(0.2997, 0.1, 0.01, 0.01, 0.0), spec, 10.0) == pytest.approx(
        -0.007822610884351237, abs=1e-15)


def test_rp_linear_matches_quadrature_literals():
    spec = PremiumSpec.linear(d_x=-0.0151, d_y=-0.0151, l_x=-0.0081, l_y=-0.0081, tau=2.0)
    p = G2Params(0.2997, 0.1, 0.01, 0.01, 0.0)
    assert rp_x(p, spec, 1.0) == pytest.approx(-0.00343450684876019, abs=1e-15)
    assert rp_x(p, spec, 5.0) == pytest.approx(-0.0068683102150721344, abs=1e-15)


def test_slope_literal():
    spec = PremiumSpec.linear(d_x=-0.0151, d_y=-0.02, l_x=-0.0081, l_y=-0.009, tau=2.0)
    assert spec.m_x == pytest.approx(0.2317880794701987, rel=1e-15)


def test_rp_closed_forms_match_trapezoid():
    rng = np.random.default_rng(5)
    for _ in range(8):
        a = float(rng.uniform(0.02, 0.8))
        d, l = rng.uniform(-0.1, 0.1, size=2)
        if abs(d) < 1e-3:
            d = 1e-3
        tau = float(rng.uniform(0.5, 5.0))
        t = float(rng.uniform(0.1, 30.0))
        p = G2Params(a, a, 0.01, 0.01, 0.0)
        for spec in (
            PremiumSpec.constant(d_x=float(d), d_y=float(d)),
            PremiumSpec.step(d_x=float(d), d_y=float(d), l_x=float(l), l_y=float(l), tau=tau),
            PremiumSpec.linear(d_x=float(d), d_y=float(d), l_x=float(l), l_y=float(l), tau=tau),
        ):
            ref = _rp_trapezoid(a, spec, t)
            assert rp_x(p, spec, t) == pytest.approx(ref, abs=2e-9), spec.kind


def test_rp_zero_at_origin():
    p = G2Params(0.3, 0.05, 0.01, 0.01, -0.5)
    for spec in (
        PremiumSpec.constant(d_x=0.02, d_y=-0.01),
        PremiumSpec.step(d_x=0.02, d_y=-0.01, l_x=0.01, l_y=0.0, tau=2.0),
        PremiumSpec.linear(d_x=0.02, d_y=-0.01, l_x=0.01, l_y=0.005, tau=2.0),
    ):
        assert rp_x(p, spec, 0.0) == 0.0
        assert rp_y(p, spec, 0.0) == 0.0


def test_linear_kind_is_smooth_at_tau():
    p = G2Params(0.3, 0.05, 0.01, 0.01, -0.5)
    spec = PremiumSpec.linear(d_x=-0.0151, d_y=0.1672, l_x=-0.0081, l_y=-0.0088, tau=2.0)
    h = 1e-5
    for fn in (rp_x, rp_y):
        left = (fn(p, spec, spec.tau) - fn(p, spec, spec.tau - h)) / h
        right = (fn(p, spec, spec.tau + h) - fn(p, spec, spec.tau)) / h
        assert right == pytest.approx(left, rel=1e-4)
    # the step kind jumps in d, so its premium has a kink at tau
    step = PremiumSpec.step(d_x=-0.0112, d_y=0.0779, l_x=-0.0081, l_y=-0.0088, tau=2.0)
    left = (rp_x(p, step, 2.0) - rp_x(p, step, 2.0 - h)) / h
    right = (rp_x(p, step, 2.0 + h) - rp_x(p, step, 2.0)) / h
    assert abs(right - left) > 1e-4


def test_linear_boundary_identity():
    spec = PremiumSpec.linear(d_x=-0.0151, d_y=0.1672, l_x=-0.0081, l_y=-0.0088, tau=2.0)
    assert (1.0 - spec.m_x * spec.tau) * spec.d_x == pytest.approx(spec.l_x, rel=1e-14)
    assert (1.0 - spec.m_y * spec.tau) * spec.d_y == pytest.approx(spec.l_y, rel=1e-14)


def test_d_value_switch():
    step = PremiumSpec.step(d_x=0.02, d_y=0.03, l_x=-0.01, l_y=-0.02, tau=2.0)
    assert d_value(step, 1.9)[0] == 0.02
    assert d_value(step, 2.0)[0] == 0.02  # switch is strictly after tau
    assert d_value(step, 2.0 + 1e-9)[0] == -0.01
    lin = PremiumSpec.linear(d_x=0.02, d_y=0.03, l_x=-0.01, l_y=-0.02, tau=2.0)
    assert d_value(lin, 0.0)[0] == 0.02
    assert d_value(lin, 2.0)[0] == pytest.approx(-0.01, rel=1e-12)
    assert d_value(lin, 10.0)[1] == -0.02
    const = PremiumSpec.constant(d_x=0.02, d_y=0.03)
    assert d_value(const, 100.0)[1] == 0.03


def test_d_integral_matches_trapezoid():
    rng = np.random.default_rng(9)
    for _ in range(6):
        tau = float(rng.uniform(0.5, 4.0))
        t = float(rng.uniform(0.2, 20.0))
        spec = PremiumSpec.linear(d_x=0.03, d_y=-0.02, l_x=0.01, l_y=0.005, tau=tau)
        ref = 0.0
        segments = [(0.0, min(t, tau))] + ([(tau, t)] if t > tau else [])
        for lo, hi in segments:
            u = np.linspace(lo, hi, 200001)
            ref += np.trapezoid(d_value(spec, u)[0], u)
        ix, _ = d_integral(spec, t)
        assert ix == pytest.approx(ref, abs=1e-10)


def test_spec_validation():
    with pytest.raises(InputError):
        PremiumSpec("step", 0.01, 0.01, None, None, 2.0)  # step needs levels
    with pytest.raises(InputError):
        PremiumSpec("step", 0.01, 0.01, 0.0, 0.0, None)  # and a switch time
    with pytest.raises(InputError):
        PremiumSpec("constant", 0.01, 0.01, 0.0, None, None)
    with pytest.raises(InputError):
        PremiumSpec("linear", 0.01, 0.01, 0.0, 0.0, -1.0)
    with pytest.raises(InputError):
        PremiumSpec("spline", 0.01, 0.01, None, None, None)
    with pytest.raises(DegenerateSlopeError):
        PremiumSpec.linear(d_x=0.0, d_y=0.01, l_x=0.0, l_y=0.0, tau=2.0)


def test_calibrate_p_reproduces_forecasts(params, market_curve,
                                          forecasts_short, forecasts_long):
    for kind in ("constant", "step", "linear"):
        long_ = None if kind == "constant" else forecasts_long
        spec = calibrate_p(market_curve, params, kind, forecasts_short, long_, tau=2.0)
        for f in forecasts_short + (long_ or []):
            got = expected_rate_p(market_curve, params, spec,
                                  f.horizon_years, f.maturity_years)
            assert got == pytest.approx(f.rate, abs=1e-10), kind


def test_constant_and_step_share_levels(params, market_curve,
                                        forecasts_short, forecasts_long):
    const = calibrate_p(market_curve, params, "constant", forecasts_short)
    step = calibrate_p(market_curve, params, "step", forecasts_short,
                       forecasts_long, tau=2.0)
    assert step.d_x == pytest.approx(const.d_x, rel=1e-12)
    assert step.d_y == pytest.approx(const.d_y, rel=1e-12)
    # and the premium paths coincide before the switch
    ts = np.linspace(0.0, 2.0, 9)
    assert rp_x(params, step, ts) == pytest.approx(rp_x(params, const, ts), abs=1e-15)


def test_variants_intersect_at_tau(params, market_curve, forecasts_long):
    # both short forecasts at the switch horizon pin the premium there
    tau = 2.0
    short = [RateForecast(tau, tau + 0.25, 0.0108), RateForecast(tau, tau + 10.0, 0.0145)]
    specs = [
        calibrate_p(market_curve, params, "constant", short),
        calibrate_p(market_curve, params, "step", short, forecasts_long, tau=tau),
        calibrate_p(market_curve, params, "linear", short, forecasts_long, tau=tau),
    ]
    ref_x = rp_x(params, specs[0], tau)
    ref_y = rp_y(params, specs[0], tau)
    for spec in specs[1:]:
        assert rp_x(params, spec, tau) == pytest.approx(ref_x, abs=1e-9)
        assert rp_y(params, spec, tau) == pytest.approx(ref_y, abs=1e-9)


def test_expected_rate_q_at_origin_is_spot(params, market_curve):
    for T in (0.25, 2.0, 10.0, 40.0):
        assert expected_rate_q(market_curve, params, 0.0, T) == pytest.approx(
            market_curve.spot_rate(T), abs=1e-14)


def test_zero_premium_forecasts_give_zero_spec(params, market_curve):
    short = [RateForecast(h, h + 0.25, expected_rate_q(market_curve, params, h, h + 0.25))
             for h in (1.0, 2.0)]
    long_ = [RateForecast(h, h + 10.0, expected_rate_q(market_curve, params, h, h + 10.0))
             for h in (30.0, 40.0)]
    const = calibrate_p(market_curve, params, "constant", short)
    assert abs(const.d_x) < 1e-12 and abs(const.d_y) < 1e-12
    step = calibrate_p(market_curve, params, "step", short, long_, tau=2.0)
    assert max(abs(step.d_x), abs(step.d_y), abs(step.l_x), abs(step.l_y)) < 1e-10


def test_calibrate_p_arity_and_ordering(params, market_curve,
                                        forecasts_short, forecasts_long):
    with pytest.raises(InputError):
        calibrate_p(market_curve, params, "constant", forecasts_short[:1])
    with pytest.raises(InputError):
        calibrate_p(market_curve, params, "step", forecasts_short, None, tau=2.0)
    with pytest.raises(InputError):
        calibrate_p(market_curve, params, "step", forecasts_short,
                    forecasts_long[:1], tau=2.0)
    with pytest.raises(InputError):
        # switch time must separate short from long horizons
        calibrate_p(market_curve, params, "step", forecasts_short,
                    forecasts_long, tau=45.0)
    with pytest.raises(InputError):
        calibrate_p(market_curve, params, "step", forecasts_short,
                    forecasts_long, tau=None)


def test_calibrate_p_singular_system(params, market_curve):
    # identical rows cannot identify two unknowns
    short = [RateForecast(2.0, 2.25, 0.01), RateForecast(2.0, 2.25, 0.01)]
    with pytest.raises(CalibrationError, match="horizon"):
        calibrate_p(market_curve, params, "constant", short)


def test_calibrate_p_degenerate_linear(params, market_curve, forecasts_long):
    # forecasts manufactured from d_x = 0 make the linear slope undefined
    proto = PremiumSpec("linear", 1.0, 1.0, 0.0, 0.0, 2.0)
    d = {"x": 0.0, "y": 0.05}
    l = {"x": 0.02, "y": -0.01}
    rows = []
    for h, T in ((1.0, 1.25), (2.0, 2.25), (30.0, 40.0), (40.0, 50.0)):
        shift = 0.0
        for z, key in ((params.a, "x"), (params.b, "y")):
            cd, cl = _rp_coefficients(z, proto, h)
            loading = b_loading(z, h, T) / (T - h)
            shift += loading * (float(cd) * d[key] + float(cl) * l[key])
        rows.append(RateForecast(h, T, expected_rate_q(market_curve, params, h, T) + shift))
    with pytest.raises(DegenerateSlopeError):
        calibrate_p(market_curve, params, "linear", rows[:2], rows[2:], tau=2.0)


def test_market_price_of_risk_identities():
    p = G2Params(0.3, 0.05, 0.012, 0.009, -0.6)
    spec = PremiumSpec.step(d_x=0.02, d_y=-0.03, l_x=0.01, l_y=0.0, tau=2.0)
    for t in (0.5, 2.0, 7.0):
        phi1, phi2 = market_price_of_risk(p, spec, t)
        dx, dy = d_value(spec, t)
        assert p.sigma * phi1 == pytest.approx(-p.a * dx, rel=1e-12)
        mix = p.rho * phi1 + math.sqrt(1.0 - p.rho**2) * phi2
        assert p.eta * mix == pytest.approx(-p.b * dy, rel=1e-12)


def test_market_price_of_risk_singularities():
    spec = PremiumSpec.constant(d_x=0.01, d_y=0.01)
    with pytest.raises(SingularityError):
        market_price_of_risk(G2Params(0.3, 0.05, 0.01, 0.01, -1.0), spec, 1.0)
    with pytest.raises(SingularityError):
        market_price_of_risk(G2Params(0.3, 0.05, 0.0, 0.01, 0.0), spec, 1.0)
    # the strongly negative but non-degenerate correlation stays defined
    phi1, phi2 = market_price_of_risk(G2Params(0.3, 0.05, 0.01, 0.01, -0.9998),
                                      spec, 1.0)
    assert math.isfinite(phi1) and math.isfinite(phi2)


def test_rp_coefficient_form_linearity():
    # premium must be linear in the level pair for every kind
    p = G2Params(0.25, 0.06, 0.01, 0.01, 0.0)
    t = np.array([0.7, 3.1, 11.0])
    s1 = PremiumSpec.step(d_x=0.02, d_y=0.0, l_x=-0.01, l_y=0.0, tau=2.0)
    s2 = PremiumSpec.step(d_x=0.04, d_y=0.0, l_x=-0.02, l_y=0.0, tau=2.0)
    assert rp_x(p, s2, t) == pytest.approx(2.0 * rp_x(p, s1, t), rel=1e-13)
