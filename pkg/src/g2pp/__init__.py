"""Two-factor Gaussian short-rate toolkit.

Calibrates the model to swaption panels under the pricing measure, fits
risk premium drift targets to rate forecasts under the real-world
measure, prices zero-coupon bonds and European swaptions, and generates
Monte Carlo yield-curve scenarios with exact factor transitions.
"""

from .calibration import CalibrationQResult, SimplexConfig, calibrate_q
from .errors import (
    CalibrationError,
    DegenerateSlopeError,
    ExtrapolationError,
    G2Error,
    InputError,
    NumericError,
    SingularityError,
)
from .market import (
    DiscountCurve,
    RateForecast,
    SwaptionQuote,
    load_curve,
    load_forecasts,
    load_swaption_quotes,
)
from .model import (
    FactorState,
    G2Params,
    b_loading,
    bond_price,
    integrated_phi,
    integrated_variance,
    model_rate,
    phi_value,
    transition_covariance,
)
from .premium import (
    PremiumSpec,
    calibrate_p,
    d_integral,
    d_value,
    expected_rate_p,
    expected_rate_q,
    market_price_of_risk,
    rp_x,
    rp_y,
)
from .pricing import (
    SwaptionSpec,
    annuity,
    atm_forward_swap_rate,
    bachelier_price,
    forward_swap_rate,
    price_swaption_g2,
)
from .simulate import (
    BondCheckReport,
    MomentReport,
    ScenarioSet,
    SimConfig,
    load_scenario_binary,
    mc_bond_check,
    moment_check,
    scenario_to_binary,
    scenario_to_csv,
    short_rates,
    simulate,
    step_exact,
)

__version__ = "0.1.0"

__all__ = [
    "BondCheckReport",
    "CalibrationError",
    "CalibrationQResult",
    "DegenerateSlopeError",
    "DiscountCurve",
    "ExtrapolationError",
    "FactorState",
    "G2Error",
    "G2Params",
    "InputError",
    "MomentReport",
    "NumericError",
    "PremiumSpec",
    "RateForecast",
    "ScenarioSet",
    "SimConfig",
    "SingularityError",
    "SwaptionQuote",
    "SwaptionSpec",
    "annuity",
    "atm_forward_swap_rate",
    "b_loading",
    "bachelier_price",
    "bond_price",
    "calibrate_p",
    "calibrate_q",
    "d_integral",
    "d_value",
    "expected_rate_p",
    "expected_rate_q",
    "forward_swap_rate",
    "integrated_phi",
    "integrated_variance",
    "load_curve",
    "load_forecasts",
    "load_scenario_binary",
    "load_swaption_quotes",
    "market_price_of_risk",
    "mc_bond_check",
    "model_rate",
    "moment_check",
    "phi_value",
    "price_swaption_g2",
    "rp_x",
    "rp_y",
    "scenario_to_binary",
    "scenario_to_csv",
    "short_rates",
    "simulate",
    "step_exact",
    "transition_covariance",
]
