"""Model simulation, OLS fitting, residual partial sums, and polygons.

The model is y_i = a + b*x_i + eps_i where x_1 <= ... <= x_n are the
order statistics of n i.i.d. draws from the regressor law and eps_i is
Markov-modulated noise indexed along rank order.  From the OLS residuals
we build their cumulative sums, the random polygon (normalized by the
true composite sigma) and the empirical bridge (normalized by sigma-hat
and pinned to zero at both ends).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution
from .errors import (
    ConfigError,
    DegenerateBridgeError,
    DegenerateDesignError,
    DomainError,
)
from .noise import NoiseModel, sample_noise, simulate_chain

__all__ = [
    "RegressionConfig",
    "RegressionSample",
    "OlsFit",
    "ResidualProcess",
    "BridgePolygon",
    "generate_sample",
    "ols_fit",
    "residual_process",
    "random_polygon",
    "empirical_bridge",
    "polygon_eval",
    "restrict_to_grid",
    "empirical_lorenz",
    "write_sample_csv",
    "write_bridge_csv",
    "read_xy_csv",
]

POLYGON_KINDS = ("random-polygon", "empirical-bridge", "limit-path")

# sigma-hat^2 at or below rounding scale counts as a perfect fit: data on
# an exact line stored in floats leaves residuals of order eps*|y|.
_DEGENERATE_REL = 1e-12


@dataclass(frozen=True)
class RegressionConfig:
    """Model parameters: intercept a, slope b, size n, regressor law, noise."""

    a: float
    b: float
    n: int
    dist: Distribution
    noise: NoiseModel

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError("intercept and slope must be finite")
        if int(self.n) != self.n or self.n < 3:
            raise DomainError("n must be an integer >= 3")
        object.__setattr__(self, "n", int(self.n))
        if not self.dist.moments().variance > 0.0:
            raise DomainError(
                "regressor law must have strictly positive variance"
            )


@dataclass(frozen=True, eq=False)
class RegressionSample:
    """One simulated data set: sorted regressors, chain states, responses."""

    x: np.ndarray
    states: np.ndarray
    y: np.ndarray
    config: RegressionConfig

    def __post_init__(self):
        for arr in (self.x, self.states, self.y):
            arr.setflags(write=False)
        if not (self.x.size == self.states.size == self.y.size):
            raise DomainError("x, states, y must have equal length")


@dataclass(frozen=True)
class OlsFit:
    """Gauss-Markov estimates with the bar-quantities they came from."""

    a_hat: float
    b_hat: float
    mean_x: float
    mean_y: float
    mean_x2: float
    mean_xy: float


@dataclass(frozen=True, eq=False)
class ResidualProcess:
    """OLS residuals, their cumulative sums (length n+1), and sigma-hat^2.

    ``y_scale`` records max|y| so downstream code can tell a genuinely
    zero sigma-hat^2 from one made of float cancellation noise.
    """

    residuals: np.ndarray
    partial_sums: np.ndarray
    sigma_hat2: float
    y_scale: float = 1.0

    def __post_init__(self):
        self.residuals.setflags(write=False)
        self.partial_sums.setflags(write=False)

    @property
    def n(self) -> int:
        return self.residuals.size


@dataclass(frozen=True, eq=False)
class BridgePolygon:
    """Piecewise-linear path with nodes at t = k/n.

    kind is one of random-polygon (residual sums over sigma*sqrt(n)),
    empirical-bridge (tied down at both ends, sigma-hat normalized), or
    limit-path (a sampled path of the limiting Gaussian process).
    """

    nodes: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in POLYGON_KINDS:
            raise DomainError(f"unknown polygon kind {self.kind!r}")
        if self.nodes.size < 2:
            raise DomainError("polygon needs at least 2 nodes")
        if self.nodes[0] != 0.0:
            raise DomainError("polygon must start at 0")
        self.nodes.setflags(write=False)

    @property
    def n(self) -> int:
        return self.nodes.size - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.nodes.size) / self.n


def generate_sample(config: RegressionConfig, rng) -> RegressionSample:
    """Simulate one data set from the model.

    ``rng`` may be a seed int, a SeedSequence, or a Generator; three
    child streams are spawned from it (regressor, chain, noise in that
    order), so the three sources are mutually independent and any one can
    be reproduced without consuming the others.  Regressors are sorted
    ascending with a stable sort and the noise is indexed along rank
    order, pairing eps_i with the i-th order statistic.
    """
    base = np.random.default_rng(rng)
    xi_rng, chain_rng, noise_rng = base.spawn(3)
    x = np.sort(config.dist.sample(config.n, xi_rng), kind="stable")
    states = simulate_chain(config.noise.chain, config.n, chain_rng)
    eps = sample_noise(config.noise, states, noise_rng)
    y = config.a + config.b * x + eps
    return RegressionSample(x=x, states=states, y=y, config=config)


def ols_fit(x, y) -> OlsFit:
    """Least-squares line through (x_i, y_i).

    Evaluates the slope as the centered ratio sum((x-xbar)(y-ybar)) /
    sum((x-xbar)^2), the numerically stable form of the bar-quantity
    display; means use pairwise summation.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise DomainError("x and y must be 1-D arrays of equal length")
    if x.size < 2:
        raise DomainError("need at least 2 points to fit a line")
    mean_x = float(np.mean(x))
    mean_y = float(np.mean(y))
    dx = x - mean_x
    denom = float(np.dot(dx, dx))
    if not denom > 0.0:
        raise DegenerateDesignError(
            "regressor values are all equal; slope is undefined"
        )
    b_hat = float(np.dot(dx, y - mean_y)) / denom
    a_hat = mean_y - b_hat * mean_x
    return OlsFit(
        a_hat=a_hat,
        b_hat=b_hat,
        mean_x=mean_x,
        mean_y=mean_y,
        mean_x2=float(np.mean(x * x)),
        mean_xy=float(np.mean(x * y)),
    )


def residual_process(x, y, fit: OlsFit) -> ResidualProcess:
    """Residuals, their partial sums (with a leading 0), and sigma-hat^2.

    sigma_hat2 = mean(e^2) - mean(e)^2 with divisor n; the mean residual
    is zero for OLS with intercept, so this is the mean squared residual
    up to rounding.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    resid = y - (fit.a_hat + fit.b_hat * x)
    partial = np.zeros(resid.size + 1)
    np.cumsum(resid, out=partial[1:])
    mean_r = float(np.mean(resid))
    sigma_hat2 = max(float(np.mean(resid * resid)) - mean_r * mean_r, 0.0)
    return ResidualProcess(
        residuals=resid,
        partial_sums=partial,
        sigma_hat2=sigma_hat2,
        y_scale=float(np.max(np.abs(y), initial=0.0)),
    )


def random_polygon(process: ResidualProcess, sigma: float) -> BridgePolygon:
    """Polygon with nodes partial_sums[k] / (sigma*sqrt(n))."""
    sigma = float(sigma)
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise DomainError("sigma must be finite and positive")
    n = process.n
    nodes = process.partial_sums / (sigma * math.sqrt(n))
    return BridgePolygon(nodes=nodes, kind="random-polygon")


def empirical_bridge(process: ResidualProcess) -> BridgePolygon:
    """Tied-down polygon (D_k - (k/n) D_n) / sqrt(n * sigma_hat^2).

    Both endpoints are exactly zero.  A sigma-hat^2 at rounding scale
    (perfect fit) has no bridge and raises DegenerateBridgeError.
    """
    n = process.n
    floor = (_DEGENERATE_REL * max(1.0, process.y_scale)) ** 2
    if process.sigma_hat2 <= floor:
        raise DegenerateBridgeError(
            "sigma-hat^2 is zero to rounding (perfect fit); bridge undefined"
        )
    k = np.arange(n + 1) / n
    nodes = (process.partial_sums - k * process.partial_sums[n]) / math.sqrt(
        n * process.sigma_hat2
    )
    nodes[0] = 0.0
    nodes[n] = 0.0
    return BridgePolygon(nodes=nodes, kind="empirical-bridge")


def polygon_eval(poly: BridgePolygon, t) -> float | np.ndarray:
    """Linear interpolation of the polygon at t in [0, 1]."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
        raise DomainError("evaluation points must lie in [0, 1]")
    out = np.interp(arr, poly.times, poly.nodes)
    return float(out) if np.ndim(t) == 0 else out


def restrict_to_grid(poly: BridgePolygon, grid_size: int) -> BridgePolygon:
    """Polygon of the same kind sampled at t = j/G for j = 0..G."""
    grid_size = int(grid_size)
    if grid_size < 1:
        raise DomainError("grid_size must be >= 1")
    t = np.arange(grid_size + 1) / grid_size
    return BridgePolygon(nodes=polygon_eval(poly, t), kind=poly.kind)


def empirical_lorenz(values, t) -> float | np.ndarray:
    """Empirical Lorenz curve GL_n(t) = (1/n) * sum of the [nt] smallest values.

    Right-continuous step function of t; values are sorted internally.
    """
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise DomainError("values must be non-empty")
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
        raise DomainError("t must lie in [0, 1]")
    n = x.size
    # the 1e-9 nudge keeps [nt] exact when n*t lands one ulp under an
    # integer (the step function jumps there, unlike the continuous GL).
    k = np.clip(np.floor(arr * n + 1e-9).astype(np.int64), 0, n)
    csum = np.concatenate(([0.0], np.cumsum(x) / n))
    out = csum[k]
    return float(out) if np.ndim(t) == 0 else out


def write_sample_csv(sample: RegressionSample, path) -> None:
    """Write columns (i, x, state, y) with a header row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("i,x,state,y\n")
        for i in range(sample.x.size):
            fh.write(
                f"{i + 1},{float(sample.x[i])!r},{int(sample.states[i])},"
                f"{float(sample.y[i])!r}\n"
            )


def write_bridge_csv(poly: BridgePolygon, path) -> None:
    """Write columns (t, value), one row per node."""
    times = poly.times
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,value\n")
        for i in range(poly.nodes.size):
            fh.write(f"{float(times[i])!r},{float(poly.nodes[i])!r}\n")


def read_xy_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read data columns (x, y) from a headered CSV."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().lower().split(",")
            rows = np.loadtxt(fh, delimiter=",", dtype=float, ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read data file {path!r}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"data file {path!r} is not numeric CSV: {exc}") from exc
    cols = [c.strip() for c in header]
    if "x" not in cols or "y" not in cols:
        raise ConfigError(
            f"data file {path!r} must have a header naming columns x and y"
        )
    if rows.shape[1] != len(cols):
        raise ConfigError(f"data file {path!r} has ragged rows")
    if rows.shape[0] < 3:
        raise ConfigError("need at least 3 data rows")
    return rows[:, cols.index("x")], rows[:, cols.index("y")]
