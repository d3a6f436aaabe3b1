import numpy as np
import pytest

from g2pp import DiscountCurve, G2Params, RateForecast

TABLE_A, TABLE_B = 0.2997, 0.0407
TABLE_SIGMA, TABLE_ETA, TABLE_RHO = 0.0114, 0.0114, -0.9998


@pytest.fixture
def params():
    return G2Params(a=TABLE_A, b=TABLE_B, sigma=TABLE_SIGMA, eta=TABLE_ETA, rho=TABLE_RHO)


@pytest.fixture
def flat_curve():
    # flat continuous 2%; log-linear interpolation is exact on this curve
    ts = np.array([0.25, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0])
    return DiscountCurve(ts, np.exp(-0.02 * ts))


@pytest.fixture
def market_curve():
    # upward sloping through negative short rates, flat-forward tail allowed
    ts = np.array([0.25, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0])
    rates = np.array([-0.004, -0.003, -0.002, -0.001, 0.0, 0.001, 0.004,
                      0.006, 0.007, 0.008, 0.0085, 0.0085])
    return DiscountCurve(ts, np.exp(-rates * ts), extrapolate=True)


@pytest.fixture
def forecasts_short():
    return [RateForecast(1.0, 1.25, 0.0108), RateForecast(2.0, 2.25, 0.0108)]


@pytest.fixture
def forecasts_long():
    return [RateForecast(30.0, 40.0, 0.0184), RateForecast(40.0, 50.0, 0.0184)]
