"""Exception types shared across the package.

InputError covers malformed files, bad arguments and domain violations
(CLI exit code 2). NumericError covers quadrature, root-search and
convergence failures (CLI exit code 1).
"""


class G2Error(Exception):
    """Base class for package errors."""


class InputError(G2Error, ValueError):
    """Malformed input data or invalid configuration."""


class ExtrapolationError(InputError):
    """Curve queried beyond its last pillar without extrapolation enabled."""


class NumericError(G2Error):
    """A numerical routine failed to converge or to bracket a root."""


class CalibrationError(NumericError):
    """Calibration system is singular or otherwise unsolvable."""


class DegenerateSlopeError(CalibrationError):
    """Linear premium slope is undefined because d_x or d_y is zero."""


class SingularityError(G2Error):
    """Parameters sit on a singular boundary (|rho| = 1 or a zero volatility)."""
