"""Monte Carlo factor simulation with exact one-step transitions.

Factors follow Ornstein-Uhlenbeck dynamics under both measures, so each
step draws from the exact conditional distribution; no Euler bias. The
drift contribution of a real-world step is the increment of the closed
form risk premium, which also splits a step crossing the premium switch
time tau exactly.

Randomness comes from the counter-based Philox generator, keyed per
fixed-size path block, so path i is a function of (seed, i) alone and a
rerun with more paths leaves earlier paths untouched. Antithetic path
2m+1 mirrors the gaussians of path 2m.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericError
from .model import (
    FactorState,
    G2Params,
    b_loading,
    integrated_variance,
    phi_value,
    transition_covariance,
)
from .premium import PremiumSpec, d_integral, rp_x, rp_y

PATH_BLOCK = 4096  # fixed so substreams do not depend on the path count
_SLICE = 65536  # rows per reduction slice, keeps temporaries small

SCENARIO_CSV_HEADER = ["path", "time", "x", "y", "short_rate"]
_BIN_MAGIC = b"G2SCEN01"


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    horizon: float
    step: float = 1.0 / 12.0
    seed: int = 0
    measure: str = "Q"
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 1:
            raise InputError("n_paths must be >= 1")
        if self.horizon <= 0.0 or self.step <= 0.0:
            raise InputError("horizon and step must be positive")
        n = round(self.horizon / self.step)
        if n < 1 or abs(self.horizon - n * self.step) > 1e-9 * max(1.0, self.horizon):
            raise InputError("horizon must be an integral number of steps")
        if self.measure not in ("Q", "P"):
            raise InputError("measure must be 'Q' or 'P'")
        if self.antithetic and (self.n_paths < 2 or self.n_paths % 2):
            raise InputError("antithetic sampling needs an even n_paths >= 2")
        if not (0 <= self.seed < 2**64):
            raise InputError("seed must fit in 64 bits")

    @property
    def n_steps(self) -> int:
        return round(self.horizon / self.step)


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    """Simulated factor paths on a fixed time grid.

    Short rates are derived on demand: they need the fitted curve, which
    the set does not carry.
    """

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    config: SimConfig
    premium: PremiumSpec | None = None


def _cov_factor(vx: float, vy: float, cxy: float) -> tuple[float, float, float]:
    """Lower-triangular square root of the 2x2 innovation covariance.

    Degenerate correlation collapses the second column to zero (rank one)
    instead of failing.
    """
    sx = np.sqrt(vx)
    if sx > 0.0:
        l21 = cxy / sx
        l22 = np.sqrt(max(vy - l21 * l21, 0.0))
    else:
        l21 = 0.0
        l22 = np.sqrt(vy)
    return float(sx), float(l21), float(l22)


def _drift_increments(p: G2Params, spec: PremiumSpec | None, times: np.ndarray):
    """Deterministic part of each step: D(t_k, t_{k+1}) per factor.

    D_x over a step equals rp_x(t_{k+1}) - e^{-a dt} rp_x(t_k), which is
    the defining integral taken in closed form and therefore exact even
    when the step straddles tau.
    """
    n = len(times) - 1
    if spec is None:
        return np.zeros(n), np.zeros(n)
    dt = np.diff(times)
    rx = rp_x(p, spec, times)
    ry = rp_y(p, spec, times)
    dx = rx[1:] - np.exp(-p.a * dt) * rx[:-1]
    dy = ry[1:] - np.exp(-p.b * dt) * ry[:-1]
    return dx, dy


def step_exact(p: G2Params, state: FactorState, dt: float, gaussian_pair,
               spec: PremiumSpec | None = None) -> FactorState:
    """Advance one state by dt using the exact transition law."""
    if dt <= 0.0:
        raise InputError("step_exact requires dt > 0")
    z1, z2 = float(gaussian_pair[0]), float(gaussian_pair[1])
    sx, l21, l22 = _cov_factor(*transition_covariance(p, dt))
    t0, t1 = state.t, state.t + dt
    if spec is None:
        dx = dy = 0.0
    else:
        dx = rp_x(p, spec, t1) - np.exp(-p.a * dt) * rp_x(p, spec, t0)
        dy = rp_y(p, spec, t1) - np.exp(-p.b * dt) * rp_y(p, spec, t0)
    x1 = state.x * np.exp(-p.a * dt) + dx + sx * z1
    y1 = state.y * np.exp(-p.b * dt) + dy + l21 * z1 + l22 * z2
    return FactorState(t=t1, x=float(x1), y=float(y1))


def _block_generator(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def simulate(p: G2Params, config: SimConfig, spec: PremiumSpec | None = None) -> ScenarioSet:
    """Simulate factor paths under Q (spec omitted) or P (spec required)."""
    if config.measure == "P" and spec is None:
        raise InputError("real-world simulation needs a premium spec")
    if config.measure == "Q" and spec is not None:
        raise InputError("risk-neutral simulation takes no premium spec")
    n_steps = config.n_steps
    times = np.arange(n_steps + 1) * config.step
    ea = np.exp(-p.a * config.step)
    eb = np.exp(-p.b * config.step)
    sx, l21, l22 = _cov_factor(*transition_covariance(p, config.step))
    drift_x, drift_y = _drift_increments(p, spec, times)

    try:
        x = np.zeros((config.n_paths, n_steps + 1))
        y = np.zeros((config.n_paths, n_steps + 1))
    except MemoryError as exc:
        raise NumericError(
            f"cannot allocate {config.n_paths} paths x {n_steps + 1} grid points"
        ) from exc
    base_paths = config.n_paths // 2 if config.antithetic else config.n_paths
    for start in range(0, base_paths, PATH_BLOCK):
        block = start // PATH_BLOCK
        count = min(PATH_BLOCK, base_paths - start)
        # the full block is always drawn so substreams stay aligned
        z = _block_generator(config.seed, block).standard_normal((n_steps, PATH_BLOCK, 2))
        z = z[:, :count, :]
        signs = (1.0, -1.0) if config.antithetic else (1.0,)
        for pol, sign in enumerate(signs):
            if config.antithetic:
                rows = slice(2 * start + pol, 2 * (start + count) + pol, 2)
            else:
                rows = slice(start, start + count)
            xc = np.zeros(count)
            yc = np.zeros(count)
            for k in range(n_steps):
                z1 = sign * z[k, :, 0]
                z2 = sign * z[k, :, 1]
                xc = xc * ea + drift_x[k] + sx * z1
                yc = yc * eb + drift_y[k] + l21 * z1 + l22 * z2
                x[rows, k + 1] = xc
                y[rows, k + 1] = yc
    return ScenarioSet(times=times, x=x, y=y, config=config, premium=spec)


@dataclass(frozen=True)
class BondCheckReport:
    measure: str
    maturity: float
    n_paths: int
    step: float
    estimate: float
    target: float
    std_error: float
    bias_estimate: float
    passed: bool


def _grid_index(sset: ScenarioSet, T: float) -> int:
    k = round(T / sset.config.step)
    if k < 1 or k > sset.config.n_steps or abs(sset.times[k] - T) > 1e-9:
        raise InputError("maturity must sit on the simulation grid")
    return k


def _discount_stats(sset: ScenarioSet, k: int, stride: int, det: float):
    """Mean and variance of exp(-det - trapz(x + y)) up to grid index k."""
    times = sset.times[: k + 1 : stride]
    n = sset.x.shape[0]
    total = 0.0
    total_sq = 0.0
    for lo in range(0, n, _SLICE):
        hi = min(lo + _SLICE, n)
        integ = np.trapezoid(sset.x[lo:hi, : k + 1 : stride]
                             + sset.y[lo:hi, : k + 1 : stride], times, axis=1)
        vals = np.exp(-det - integ)
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    return mean, var


def mc_bond_check(sset: ScenarioSet, curve, p: G2Params, T: float,
                  spec: PremiumSpec | None = None) -> BondCheckReport:
    """Martingale test: a discounted T-bond payoff must average to df(T).

    Under Q the payoff 1 is discounted by the money market account; under
    P it is divided by the adjusted account X so that P/X is a martingale
    with the same df(T) target. The stochastic part of each exponent is a
    trapezoid on the grid; its dt bias is estimated by comparing against
    the twice-coarsened grid (Richardson, trapezoid error is O(dt^2)).
    """
    spec = spec if spec is not None else sset.premium
    k = _grid_index(sset, T)
    int_phi = -curve.log_discount(T) + 0.5 * integrated_variance(p, 0.0, T)
    det = float(int_phi)
    if sset.config.measure == "P":
        if spec is None:
            raise InputError("checking a real-world set needs its premium spec")
        ix, iy = d_integral(spec, T)
        det -= ix - rp_x(p, spec, T) / p.a
        det -= iy - rp_y(p, spec, T) / p.b
    mean, var = _discount_stats(sset, k, 1, det)
    n = sset.x.shape[0]
    se = float(np.sqrt(var / n))
    bias = float("nan")
    if k % 2 == 0:
        coarse_mean, _ = _discount_stats(sset, k, 2, det)
        bias = (mean - coarse_mean) / 3.0
    target = float(curve.discount(T))
    allowance = 3.0 * se + (abs(bias) if np.isfinite(bias) else 0.0)
    return BondCheckReport(
        measure=sset.config.measure,
        maturity=T,
        n_paths=n,
        step=sset.config.step,
        estimate=mean,
        target=target,
        std_error=se,
        bias_estimate=bias,
        passed=bool(abs(mean - target) <= allowance),
    )


@dataclass(frozen=True)
class MomentReport:
    maturity: float
    n_paths: int
    mean_x: float
    mean_y: float
    var_x: float
    var_y: float
    var_integral: float
    mean_x_target: float
    mean_y_target: float
    var_x_target: float
    var_y_target: float
    var_integral_target: float
    flagged: tuple[str, ...]


def moment_check(sset: ScenarioSet, p: G2Params, T: float | None = None) -> MomentReport:
    """Compare sample factor moments at T against the exact transition law.

    Also checks the variance of the integral of x + y over [0, T], whose
    closed form is the integrated variance entering every bond price.
    Entries more than 4 standard errors off are flagged.
    """
    T = float(sset.times[-1]) if T is None else T
    k = _grid_index(sset, T)
    spec = sset.premium
    n = sset.x.shape[0]
    xT = sset.x[:, k]
    yT = sset.y[:, k]
    mean_x, mean_y = float(np.mean(xT)), float(np.mean(yT))
    var_x, var_y = float(np.var(xT)), float(np.var(yT))
    total = 0.0
    total_sq = 0.0
    times = sset.times[: k + 1]
    for lo in range(0, n, _SLICE):
        hi = min(lo + _SLICE, n)
        integ = np.trapezoid(sset.x[lo:hi, : k + 1] + sset.y[lo:hi, : k + 1], times, axis=1)
        total += float(np.sum(integ))
        total_sq += float(np.sum(integ * integ))
    int_mean = total / n
    var_int = max(total_sq / n - int_mean * int_mean, 0.0)

    vx_t, vy_t, _ = transition_covariance(p, T)
    if sset.config.measure == "P":
        mx_t = float(rp_x(p, spec, T))
        my_t = float(rp_y(p, spec, T))
    else:
        mx_t = my_t = 0.0
    vi_t = integrated_variance(p, 0.0, T)

    flagged = []
    for name, sample, target, se in (
        ("mean_x", mean_x, mx_t, np.sqrt(var_x / n)),
        ("mean_y", mean_y, my_t, np.sqrt(var_y / n)),
        ("var_x", var_x, vx_t, vx_t * np.sqrt(2.0 / max(n - 1, 1))),
        ("var_y", var_y, vy_t, vy_t * np.sqrt(2.0 / max(n - 1, 1))),
        ("var_integral", var_int, vi_t, vi_t * np.sqrt(2.0 / max(n - 1, 1))),
    ):
        if se > 0.0 and abs(sample - target) > 4.0 * se:
            flagged.append(name)
        elif se == 0.0 and sample != target:
            flagged.append(name)
    return MomentReport(
        maturity=T,
        n_paths=n,
        mean_x=mean_x,
        mean_y=mean_y,
        var_x=var_x,
        var_y=var_y,
        var_integral=var_int,
        mean_x_target=mx_t,
        mean_y_target=my_t,
        var_x_target=float(vx_t),
        var_y_target=float(vy_t),
        var_integral_target=float(vi_t),
        flagged=tuple(flagged),
    )


def short_rates(sset: ScenarioSet, curve, p: G2Params) -> np.ndarray:
    """Short-rate paths r = x + y + phi(t) derived from the factor paths."""
    phi = np.array([phi_value(curve, p, float(t)) for t in sset.times])
    return sset.x + sset.y + phi[None, :]


def scenario_to_csv(sset: ScenarioSet, curve, p: G2Params, path) -> None:
    rates = short_rates(sset, curve, p)
    times = [float(t) for t in sset.times]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SCENARIO_CSV_HEADER) + "\n")
        for i in range(sset.x.shape[0]):
            xi, yi, ri = sset.x[i], sset.y[i], rates[i]
            for k, t in enumerate(times):
                fh.write(f"{i},{t!r},{float(xi[k])!r},{float(yi[k])!r},{float(ri[k])!r}\n")


def scenario_to_binary(sset: ScenarioSet, path) -> None:
    """Compact dump: magic, dims, seed, step, horizon, measure flags, then
    times, x and y as little-endian float64."""
    cfg = sset.config
    header = _BIN_MAGIC + struct.pack(
        "<QQQddBB6x",
        sset.x.shape[0],
        sset.x.shape[1],
        cfg.seed,
        cfg.step,
        cfg.horizon,
        0 if cfg.measure == "Q" else 1,
        1 if cfg.antithetic else 0,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(sset.times, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(sset.x, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(sset.y, dtype="<f8").tobytes())


def load_scenario_binary(path) -> ScenarioSet:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(_BIN_MAGIC)] != _BIN_MAGIC:
        raise InputError(f"{path}: not a scenario file")
    off = len(_BIN_MAGIC)
    try:
        n_paths, n_times, seed, step, horizon, measure_flag, anti = struct.unpack_from(
            "<QQQddBB6x", blob, off
        )
    except struct.error as exc:
        raise InputError(f"{path}: truncated scenario file") from exc
    off += struct.calcsize("<QQQddBB6x")
    expected = off + 8 * (n_times + 2 * n_paths * n_times)
    if len(blob) != expected:
        raise InputError(f"{path}: truncated scenario file")
    times = np.frombuffer(blob, dtype="<f8", count=n_times, offset=off).copy()
    off += 8 * n_times
    x = np.frombuffer(blob, dtype="<f8", count=n_paths * n_times, offset=off)
    x = x.reshape(n_paths, n_times).copy()
    off += 8 * n_paths * n_times
    y = np.frombuffer(blob, dtype="<f8", count=n_paths * n_times, offset=off)
    y = y.reshape(n_paths, n_times).copy()
    cfg = SimConfig(
        n_paths=n_paths,
        horizon=horizon,
        step=step,
        seed=seed,
        measure="Q" if measure_flag == 0 else "P",
        antithetic=bool(anti),
    )
    return ScenarioSet(times=times, x=x, y=y, config=cfg, premium=None)
