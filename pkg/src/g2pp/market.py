"""Market data containers and CSV loaders.

The discount curve interpolates log-linearly in the discount factors,
which is equivalent to piecewise-flat instantaneous forward rates.
Negative rates are unremarkable here: discount factors above 1 are
accepted up to a sanity cap.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ExtrapolationError, InputError

CURVE_HEADER_DF = ["maturity_years", "discount_factor"]
CURVE_HEADER_ZERO = ["maturity_years", "zero_rate"]
SWAPTION_HEADER = ["expiry_years", "tenor_years", "quote", "quote_kind"]
FORECAST_HEADER = ["horizon_years", "maturity_years", "rate"]

_MAX_DF = 1.5


@dataclass(frozen=True, eq=False)
class DiscountCurve:
    """Zero-coupon curve defined by pillar discount factors.

    df(0) = 1 is implicit. Queries past the last pillar raise
    ExtrapolationError unless ``extrapolate`` is set, in which case the
    final segment's forward rate is held flat.
    """

    maturities: np.ndarray
    discounts: np.ndarray
    valuation_date: str | None = None
    extrapolate: bool = False

    def __post_init__(self):
        mats = np.atleast_1d(np.asarray(self.maturities, dtype=float))
        dfs = np.atleast_1d(np.asarray(self.discounts, dtype=float))
        if mats.size == 0:
            raise InputError("curve needs at least one pillar")
        if mats.shape != dfs.shape:
            raise InputError("maturities and discounts differ in length")
        if mats[0] <= 0.0:
            raise InputError("first pillar maturity must be positive")
        if np.any(np.diff(mats) <= 0.0):
            raise InputError("pillar maturities must be strictly increasing")
        if np.any(dfs <= 0.0) or np.any(dfs > _MAX_DF):
            raise InputError(f"discount factors must lie in (0, {_MAX_DF}]")
        object.__setattr__(self, "maturities", mats)
        object.__setattr__(self, "discounts", dfs)
        ts = np.concatenate(([0.0], mats))
        lnd = np.concatenate(([0.0], np.log(dfs)))
        object.__setattr__(self, "_ts", ts)
        object.__setattr__(self, "_lnd", lnd)
        # forward of the last segment, reused for flat extrapolation
        object.__setattr__(self, "_fwd_last", (lnd[-2] - lnd[-1]) / (ts[-1] - ts[-2]))

    @property
    def last_maturity(self) -> float:
        return float(self._ts[-1])

    def log_discount(self, t):
        tt = np.asarray(t, dtype=float)
        if np.any(tt < 0.0):
            raise InputError("discount factors are defined for t >= 0 only")
        last = self._ts[-1]
        over = tt > last
        if np.any(tt > last + 1e-9) and not self.extrapolate:
            raise ExtrapolationError(
                f"t beyond last pillar {last}; enable extrapolation to query it"
            )
        out = np.interp(tt, self._ts, self._lnd)
        if np.any(over):
            out = np.where(over, self._lnd[-1] - self._fwd_last * (tt - last), out)
        return out if out.ndim else float(out)

    def discount(self, t):
        return np.exp(self.log_discount(t))

    def spot_rate(self, t):
        """Continuously compounded zero rate, -ln df(t) / t. Requires t > 0."""
        tt = np.asarray(t, dtype=float)
        if np.any(tt <= 0.0):
            raise InputError("spot_rate requires t > 0")
        out = -self.log_discount(tt) / tt
        return out if out.ndim else float(out)

    def forward_rate(self, t):
        """Instantaneous forward at t, right-continuous at the pillars."""
        tt = np.asarray(t, dtype=float)
        if np.any(tt < 0.0):
            raise InputError("forward_rate requires t >= 0")
        if np.any(tt > self._ts[-1] + 1e-9) and not self.extrapolate:
            raise ExtrapolationError(f"t beyond last pillar {self._ts[-1]}")
        idx = np.clip(np.searchsorted(self._ts, tt, side="right") - 1, 0, len(self._ts) - 2)
        fwd = (self._lnd[idx] - self._lnd[idx + 1]) / (self._ts[idx + 1] - self._ts[idx])
        return fwd if fwd.ndim else float(fwd)

    def to_rows(self) -> list[tuple[float, float]]:
        return [(float(t), float(d)) for t, d in zip(self.maturities, self.discounts)]


@dataclass(frozen=True)
class SwaptionQuote:
    """One co-terminal swaption quote, either a price or a normal vol."""

    expiry_years: float
    tenor_years: float
    quote: float
    quote_kind: str
    strike: float | None = None

    def __post_init__(self):
        if self.expiry_years <= 0.0:
            raise InputError("swaption expiry must be positive")
        if self.tenor_years <= 0.0:
            raise InputError("swaption tenor must be positive")
        if self.quote_kind not in ("price", "normal_vol"):
            raise InputError(f"unknown quote_kind {self.quote_kind!r}")
        if self.quote < 0.0:
            raise InputError("quote must be nonnegative")


@dataclass(frozen=True)
class RateForecast:
    """Point forecast of the zero rate r(t, T) seen from today."""

    horizon_years: float
    maturity_years: float
    rate: float

    def __post_init__(self):
        if self.horizon_years < 0.0:
            raise InputError("forecast horizon must be nonnegative")
        if self.maturity_years <= self.horizon_years:
            raise InputError("forecast maturity must exceed its horizon")


def _read_rows(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Header cells plus (row number, cells) pairs, blank lines skipped."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            rows = [(reader.line_num, row) for row in reader
                    if row and any(cell.strip() for cell in row)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [cell.strip() for cell in rows[0][1]]
    return header, rows[1:]


def _parse_float(cell: str, path, lineno: int, what: str) -> float:
    try:
        return float(cell)
    except ValueError as exc:
        raise InputError(f"{path} row {lineno}: bad {what} value {cell!r}") from exc


def load_curve(path, extrapolate: bool = False, valuation_date: str | None = None) -> DiscountCurve:
    """Read a curve CSV with either discount factor or zero rate pillars."""
    header, body = _read_rows(path)
    if header == CURVE_HEADER_DF:
        as_zero = False
    elif header == CURVE_HEADER_ZERO:
        as_zero = True
    else:
        raise InputError(
            f"{path}: header must be {','.join(CURVE_HEADER_DF)} or {','.join(CURVE_HEADER_ZERO)}"
        )
    if not body:
        raise InputError(f"{path}: no pillar rows")
    mats, vals = [], []
    for lineno, row in body:
        if len(row) != 2:
            raise InputError(f"{path} row {lineno}: expected 2 columns, got {len(row)}")
        mats.append(_parse_float(row[0], path, lineno, "maturity"))
        vals.append(_parse_float(row[1], path, lineno, header[1]))
    mats = np.array(mats)
    vals = np.array(vals)
    dfs = np.exp(-vals * mats) if as_zero else vals
    return DiscountCurve(mats, dfs, valuation_date=valuation_date, extrapolate=extrapolate)


def write_curve_csv(curve: DiscountCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_HEADER_DF)
        for t, d in curve.to_rows():
            writer.writerow([repr(t), repr(d)])


def load_swaption_quotes(path) -> list[SwaptionQuote]:
    """Read a swaption quote CSV, optionally with a trailing strike column."""
    header, body = _read_rows(path)
    if header != SWAPTION_HEADER and header != SWAPTION_HEADER + ["strike"]:
        raise InputError(f"{path}: header must be {','.join(SWAPTION_HEADER)}[,strike]")
    has_strike = len(header) == 5
    if not body:
        raise InputError(f"{path}: no quote rows")
    quotes = []
    for lineno, row in body:
        if len(row) != len(header):
            raise InputError(f"{path} row {lineno}: expected {len(header)} columns, "
                             f"got {len(row)}")
        strike = None
        if has_strike and row[4].strip() != "":
            strike = _parse_float(row[4], path, lineno, "strike")
        quotes.append(
            SwaptionQuote(
                expiry_years=_parse_float(row[0], path, lineno, "expiry"),
                tenor_years=_parse_float(row[1], path, lineno, "tenor"),
                quote=_parse_float(row[2], path, lineno, "quote"),
                quote_kind=row[3].strip(),
                strike=strike,
            )
        )
    return quotes


def write_swaption_csv(quotes, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWAPTION_HEADER + ["strike"])
        for q in quotes:
            writer.writerow(
                [repr(q.expiry_years), repr(q.tenor_years), repr(q.quote), q.quote_kind,
                 "" if q.strike is None else repr(q.strike)]
            )


def load_forecasts(path) -> list[RateForecast]:
    header, body = _read_rows(path)
    if header != FORECAST_HEADER:
        raise InputError(f"{path}: header must be {','.join(FORECAST_HEADER)}")
    if not body:
        raise InputError(f"{path}: no forecast rows")
    out = []
    for lineno, row in body:
        if len(row) != 3:
            raise InputError(f"{path} row {lineno}: expected 3 columns, got {len(row)}")
        out.append(
            RateForecast(
                horizon_years=_parse_float(row[0], path, lineno, "horizon"),
                maturity_years=_parse_float(row[1], path, lineno, "maturity"),
                rate=_parse_float(row[2], path, lineno, "rate"),
            )
        )
    return out


def write_forecast_csv(forecasts, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FORECAST_HEADER)
        for f in forecasts:
            writer.writerow([repr(f.horizon_years), repr(f.maturity_years), repr(f.rate)])
