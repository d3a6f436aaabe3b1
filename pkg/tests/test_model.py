import math

import numpy as np
import pytest

from g2pp import (
    DiscountCurve,
    FactorState,
    G2Params,
    InputError,
    b_loading,
    bond_price,
    integrated_phi,
    integrated_variance,
    model_rate,
    phi_value,
    transition_covariance,
)


def test_b_loading_matches_quadrature():
    # oracle: adaptive quadrature of exp(-a(T-s)) over [0, 10], a = 0.2997
    assert b_loading(0.2997, 0.0, 10.0) == pytest.approx(3.1700478684051214, abs=1e-11)


def test_b_loading_limits():
    assert b_loading(0.5, 3.0, 3.0) == 0.0
    # small z: B -> T - t
    assert b_loading(1e-8, 0.0, 2.0) == pytest.approx(2.0, rel=1e-7)
    with pytest.raises(InputError):
        b_loading(0.0, 0.0, 1.0)
    with pytest.raises(InputError):
        b_loading(0.5, 2.0, 1.0)


def test_b_loading_vectorized():
    out = b_loading(0.3, 0.0, np.array([1.0, 2.0, 5.0]))
    assert out.shape == (3,)
    assert out[0] == pytest.approx(b_loading(0.3, 0.0, 1.0))


def test_integrated_variance_matches_quadrature(params):
    # oracle: adaptive quadrature of the instantaneous variance of the
    # T-bond log price over [t, T]
    assert integrated_variance(params, 0.0, 10.0) == pytest.approx(
        0.008990377699108194, rel=1e-10)
    assert integrated_variance(params, 5.0, 10.0) == pytest.approx(
        0.0005770433290024919, rel=1e-10)


def test_integrated_variance_zero_width(params):
    assert integrated_variance(params, 4.0, 4.0) == 0.0


def test_integrated_variance_monotone_in_width(params):
    rng = np.random.default_rng(11)
    for _ in range(25):
        t = float(rng.uniform(0.0, 20.0))
        w1, w2 = sorted(rng.uniform(0.1, 20.0, size=2))
        assert integrated_variance(params, t, t + w1) <= \
            integrated_variance(params, t, t + w2) + 1e-18


def test_bond_price_fits_curve_at_origin(params, market_curve):
    state = FactorState(0.0, 0.0, 0.0)
    for T in market_curve.maturities:
        assert bond_price(market_curve, params, state, float(T)) == pytest.approx(
            float(market_curve.discount(float(T))), abs=1e-15)


def test_bond_price_responds_to_factors(params, flat_curve):
    up = bond_price(flat_curve, params, FactorState(1.0, 0.01, 0.0), 6.0)
    down = bond_price(flat_curve, params, FactorState(1.0, -0.01, 0.0), 6.0)
    base = bond_price(flat_curve, params, FactorState(1.0, 0.0, 0.0), 6.0)
    assert up < base < down


def test_model_rate_inverts_bond_price(params, flat_curve):
    state = FactorState(2.0, 0.004, -0.002)
    T = 9.0
    r = model_rate(flat_curve, params, state, T)
    p = bond_price(flat_curve, params, state, T)
    assert math.exp(-r * (T - 2.0)) == pytest.approx(p, rel=1e-13)


def test_phi_flat_curve_value(params, flat_curve):
    # oracle: f(0,t) plus the convexity correction, plain arithmetic
    assert phi_value(flat_curve, params, 3.0) == pytest.approx(
        0.020046567023389156, rel=1e-12)


def test_phi_is_derivative_of_integrated_phi(params, market_curve):
    # phi must be the t-derivative of the running integral it claims to be;
    # points sit inside pillar segments, where the forward is continuous
    h = 1e-5
    for t in (0.5, 3.7, 17.3):
        num = (integrated_phi(market_curve, params, 0.0, t + h)
               - integrated_phi(market_curve, params, 0.0, t - h)) / (2.0 * h)
        assert phi_value(market_curve, params, t) == pytest.approx(num, rel=1e-6)


def test_integrated_phi_additive(params, market_curve):
    whole = integrated_phi(market_curve, params, 0.0, 12.0)
    split = (integrated_phi(market_curve, params, 0.0, 4.5)
             + integrated_phi(market_curve, params, 4.5, 12.0))
    assert whole == pytest.approx(split, rel=1e-13)


def test_transition_covariance_monthly(params):
    vx, vy, cxy = transition_covariance(params, 1.0 / 12.0)
    assert vx == pytest.approx(1.0563968549477825e-05, rel=1e-14)
    assert vy == pytest.approx(1.0793351163912239e-05, rel=1e-14)
    assert cxy == pytest.approx(-1.0675701116046681e-05, rel=1e-14)


def test_transition_covariance_valid_correlation(params):
    rng = np.random.default_rng(3)
    for _ in range(50):
        dt = float(rng.uniform(1e-4, 30.0))
        vx, vy, cxy = transition_covariance(params, dt)
        assert vx > 0.0 and vy > 0.0
        assert abs(cxy) <= math.sqrt(vx * vy) * (1.0 + 1e-12)


def test_params_validation():
    with pytest.raises(InputError):
        G2Params(a=0.0, b=0.1, sigma=0.01, eta=0.01, rho=0.0)
    with pytest.raises(InputError):
        G2Params(a=0.1, b=-0.1, sigma=0.01, eta=0.01, rho=0.0)
    with pytest.raises(InputError):
        G2Params(a=0.1, b=0.1, sigma=-0.01, eta=0.01, rho=0.0)
    with pytest.raises(InputError):
        G2Params(a=0.1, b=0.1, sigma=0.01, eta=0.01, rho=1.5)
    with pytest.raises(InputError):
        FactorState(-1.0, 0.0, 0.0)


def test_variance_drops_when_correlation_cancels():
    # strongly negative correlation with matched vols nearly cancels risk
    tight = G2Params(a=0.3, b=0.3, sigma=0.01, eta=0.01, rho=-0.9998)
    loose = G2Params(a=0.3, b=0.3, sigma=0.01, eta=0.01, rho=0.0)
    assert integrated_variance(tight, 0.0, 10.0) < integrated_variance(loose, 0.0, 10.0)
