"""Regressor laws and their general Lorenz curves.

Each distribution provides a cdf, the left-continuous generalized inverse
F^{-1}(s) = sup{x : F(x) < s} on (0, 1], exact moments, and a general
Lorenz curve GL(t) = integral of F^{-1} over [0, t] together with its
centered version GL0(t) = GL(t) - t*GL(1).

All four families carry closed-form Lorenz curves; adaptive quadrature of
the quantile is available as an independent evaluation mode.  Sampling is
inverse-transform through the quantile with uniforms in (0, 1].
"""

from __future__ import annotations

import math
import re
from abc import ABC, abstractmethod
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from .errors import ConfigError, DomainError, NumericError

__all__ = [
    "Moments",
    "Distribution",
    "Uniform",
    "Exponential",
    "Normal",
    "Empirical",
    "LorenzCurve",
    "parse_distribution",
    "load_values",
]

# Largest double strictly below 1; guards inverse-transform draws and
# quadrature nodes against the measure-zero u = 1 corner on unbounded support.
_ONE_BELOW = float(np.nextafter(1.0, 0.0))
_SQRT_2PI = math.sqrt(2.0 * math.pi)


class Moments(NamedTuple):
    mean: float
    variance: float
    second_moment: float


def _as_float_array(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.size and not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _match_shape(out: np.ndarray, like) -> float | np.ndarray:
    if np.ndim(like) == 0:
        return float(out)
    return out


class Distribution(ABC):
    """A regressor law F with quantile, cdf, moments, and Lorenz curves."""

    name: str = "distribution"
    #: True when F^{-1}(1) is infinite, i.e. the support is unbounded above.
    unbounded_above: bool = False

    # -- quantile / cdf -------------------------------------------------

    def quantile(self, s) -> float | np.ndarray:
        """Left-continuous generalized inverse sup{x : F(x) < s}.

        Accepts a scalar or array of probabilities in (0, 1].  For
        unbounded-above families s = 1 is rejected because the supremum
        is infinite.
        """
        arr = _as_float_array(s, "s")
        if np.any(arr <= 0.0) or np.any(arr > 1.0):
            raise DomainError("quantile argument must lie in (0, 1]")
        if self.unbounded_above and np.any(arr == 1.0):
            raise DomainError(
                f"quantile at s = 1 is infinite for {self.name} (unbounded support)"
            )
        return _match_shape(self._quantile(arr), s)

    def cdf(self, x) -> float | np.ndarray:
        arr = _as_float_array(x, "x")
        return _match_shape(self._cdf(arr), x)

    # -- sampling / moments ---------------------------------------------

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``count`` i.i.d. values by inverse transform.

        Uses u = 1 - U for U uniform on [0, 1), so u lies in (0, 1]; on
        unbounded support u is additionally capped just below 1.
        """
        if count < 1:
            raise DomainError("count must be >= 1")
        u = 1.0 - rng.random(int(count))
        if self.unbounded_above:
            np.minimum(u, _ONE_BELOW, out=u)
        return self._quantile(u)

    @abstractmethod
    def moments(self) -> Moments:
        """Exact (mean, variance, second moment)."""

    # -- internals -------------------------------------------------------

    @abstractmethod
    def _quantile(self, s: np.ndarray) -> np.ndarray:
        """Quantile on pre-validated arrays."""

    @abstractmethod
    def _cdf(self, x: np.ndarray) -> np.ndarray:
        """Cdf on pre-validated arrays."""

    @abstractmethod
    def _gl(self, t: np.ndarray) -> np.ndarray:
        """Closed-form GL(t) on pre-validated arrays."""

    @abstractmethod
    def _gl_centered(self, t: np.ndarray) -> np.ndarray:
        """Closed-form GL0(t); must be exactly 0.0 at t in {0, 1}."""


class Uniform(Distribution):
    """Uniform law on [lo, hi]."""

    name = "uniform"
    unbounded_above = False

    def __init__(self, lo: float, hi: float):
        lo = float(lo)
        hi = float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError("uniform bounds must be finite")
        if not lo < hi:
            raise DomainError("uniform requires lo < hi")
        self.lo = lo
        self.hi = hi

    def __repr__(self) -> str:
        return f"Uniform({self.lo!r}, {self.hi!r})"

    def moments(self) -> Moments:
        mean = 0.5 * (self.lo + self.hi)
        var = (self.hi - self.lo) ** 2 / 12.0
        return Moments(mean, var, var + mean * mean)

    def _quantile(self, s: np.ndarray) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * s

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def _gl(self, t: np.ndarray) -> np.ndarray:
        return self.lo * t + 0.5 * (self.hi - self.lo) * t * t

    def _gl_centered(self, t: np.ndarray) -> np.ndarray:
        return 0.5 * (self.hi - self.lo) * (t * t - t)


class Exponential(Distribution):
    """Exponential law with rate parameter (mean 1/rate)."""

    name = "exponential"
    unbounded_above = True

    def __init__(self, rate: float):
        rate = float(rate)
        if not (math.isfinite(rate) and rate > 0.0):
            raise DomainError("exponential rate must be finite and positive")
        self.rate = rate

    def __repr__(self) -> str:
        return f"Exponential({self.rate!r})"

    def moments(self) -> Moments:
        mean = 1.0 / self.rate
        return Moments(mean, mean * mean, 2.0 * mean * mean)

    def _quantile(self, s: np.ndarray) -> np.ndarray:
        return -np.log1p(-s) / self.rate

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        return np.where(x > 0.0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def _gl(self, t: np.ndarray) -> np.ndarray:
        # integral of -ln(1-s)/rate is ((1-t)ln(1-t) + t)/rate; xlogy keeps
        # the t = 1 endpoint exact (0*log 0 = 0).
        return (special.xlogy(1.0 - t, 1.0 - t) + t) / self.rate

    def _gl_centered(self, t: np.ndarray) -> np.ndarray:
        return special.xlogy(1.0 - t, 1.0 - t) / self.rate


class Normal(Distribution):
    """Gaussian law with given mean and standard deviation."""

    name = "normal"
    unbounded_above = True

    def __init__(self, mean: float, sd: float):
        mean = float(mean)
        sd = float(sd)
        if not (math.isfinite(mean) and math.isfinite(sd)):
            raise DomainError("normal parameters must be finite")
        if sd <= 0.0:
            raise DomainError("normal requires sd > 0")
        self.mean = mean
        self.sd = sd

    def __repr__(self) -> str:
        return f"Normal({self.mean!r}, {self.sd!r})"

    def moments(self) -> Moments:
        var = self.sd * self.sd
        return Moments(self.mean, var, var + self.mean * self.mean)

    def _quantile(self, s: np.ndarray) -> np.ndarray:
        return self.mean + self.sd * special.ndtri(s)

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        return special.ndtr((x - self.mean) / self.sd)

    def _gl(self, t: np.ndarray) -> np.ndarray:
        return self.mean * t + self._gl_centered(t)

    def _gl_centered(self, t: np.ndarray) -> np.ndarray:
        # -sd * phi(Phi^{-1}(t)); phi(+-inf) evaluates to exactly 0.0, so the
        # endpoints are bitwise zero without special-casing.
        with np.errstate(divide="ignore"):
            z = special.ndtri(t)
        return -self.sd * np.exp(-0.5 * z * z) / _SQRT_2PI


class Empirical(Distribution):
    """Empirical law of a finite sample (atoms of mass 1/m at each value).

    The sample is stored sorted ascending.  The quantile is the
    left-continuous step function F^{-1}(s) = x_(k) for s in
    ((k-1)/m, k/m], and GL is its exact piecewise-linear integral.  A
    single-atom sample is legal here (quantile/GL evaluation) but is
    rejected by any consumer that needs positive variance.
    """

    name = "empirical"
    unbounded_above = False

    def __init__(self, values):
        arr = np.sort(np.asarray(values, dtype=float).ravel())
        if arr.size == 0:
            raise DomainError("empirical sample must be non-empty")
        if not np.all(np.isfinite(arr)):
            raise DomainError("empirical sample values must be finite")
        self.values = arr
        self._m = arr.size
        self._grid = np.arange(1, self._m + 1) / self._m
        self._csum = np.concatenate(([0.0], np.cumsum(arr) / self._m))

    def __repr__(self) -> str:
        return f"Empirical(<{self._m} values>)"

    def moments(self) -> Moments:
        mean = float(np.mean(self.values))
        second = float(np.mean(self.values * self.values))
        return Moments(mean, second - mean * mean, second)

    def _quantile(self, s: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._grid, s, side="left")
        return self.values[idx]

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.values, x, side="right") / self._m

    def _gl(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        j = np.clip(np.floor(t * self._m).astype(np.int64), 0, self._m)
        # GL is continuous piecewise linear, so a one-ulp floor miss at a
        # node only perturbs the value by rounding, never by a full step.
        slope_idx = np.minimum(j, self._m - 1)
        return self._csum[j] + (t - j / self._m) * self.values[slope_idx]

    def _gl_centered(self, t: np.ndarray) -> np.ndarray:
        return self._gl(t) - t * self._csum[self._m]


class LorenzCurve:
    """General Lorenz curve GL(t) of a distribution.

    mode "closed-form" uses the family's exact expression; mode
    "quadrature" integrates the quantile adaptively to ``abs_tol``
    (improper at the upper endpoint for unbounded support, which finite
    variance makes integrable).
    """

    _MODES = ("closed-form", "quadrature")

    def __init__(
        self,
        dist: Distribution,
        mode: str = "closed-form",
        abs_tol: float = 1e-10,
        max_subdivisions: int = 2**16,
    ):
        if mode not in self._MODES:
            raise ConfigError(f"unknown Lorenz mode {mode!r}; expected {self._MODES}")
        if not abs_tol > 0.0:
            raise ConfigError("abs_tol must be positive")
        if max_subdivisions < 1:
            raise ConfigError("max_subdivisions must be >= 1")
        self.dist = dist
        self.mode = mode
        self.abs_tol = float(abs_tol)
        self.max_subdivisions = int(max_subdivisions)

    def gl(self, t) -> float | np.ndarray:
        """GL(t) = integral of the quantile over [0, t], for t in [0, 1]."""
        arr = self._validated(t)
        if self.mode == "closed-form":
            return _match_shape(self.dist._gl(arr), t)
        out = np.array([self._quad_gl(ti) for ti in np.atleast_1d(arr)])
        return _match_shape(out.reshape(arr.shape), t)

    def gl_centered(self, t) -> float | np.ndarray:
        """GL0(t) = GL(t) - t*GL(1); exactly zero at t in {0, 1}."""
        arr = self._validated(t)
        if self.mode == "closed-form":
            return _match_shape(self.dist._gl_centered(arr), t)
        flat = np.atleast_1d(arr)
        gl1 = self._quad_gl(1.0)
        out = np.array([self._quad_gl(ti) - ti * gl1 for ti in flat])
        return _match_shape(out.reshape(arr.shape), t)

    def _validated(self, t) -> np.ndarray:
        arr = _as_float_array(t, "t")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise DomainError("Lorenz argument must lie in [0, 1]")
        return arr

    def _quad_gl(self, t: float) -> float:
        if t == 0.0:
            return 0.0
        quantile = self.dist._quantile

        def integrand(s: float) -> float:
            # clamp below quadrature resolution: keeps the improper upper
            # endpoint finite without moving the integral by more than ulp.
            return float(quantile(np.clip(s, 1e-300, _ONE_BELOW)))

        result = integrate.quad(
            integrand,
            0.0,
            float(t),
            epsabs=self.abs_tol,
            epsrel=1e-12,
            limit=self.max_subdivisions,
            full_output=1,
        )
        value, abserr = result[0], result[1]
        if abserr > 100.0 * self.abs_tol:
            raise NumericError(
                f"Lorenz quadrature did not reach abs_tol={self.abs_tol:g} "
                f"within {self.max_subdivisions} subdivisions "
                f"(achieved {abserr:g})",
                achieved=float(abserr),
            )
        return float(value)


_SPEC_RE = re.compile(r"^\s*([a-zA-Z_]+)\s*\(\s*(.*?)\s*\)\s*$")


def load_values(path: str) -> np.ndarray:
    """Read one numeric value per line from a text/CSV file."""
    try:
        values = np.loadtxt(path, dtype=float, ndmin=1)
    except OSError as exc:
        raise ConfigError(f"cannot read values file {path!r}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(
            f"values file {path!r} must hold one numeric value per line: {exc}"
        ) from exc
    if values.ndim != 1:
        raise ConfigError(f"values file {path!r} must hold one value per line")
    return values


def parse_distribution(text: str) -> Distribution:
    """Parse a distribution from a config string.

    Accepted forms: ``uniform(lo,hi)``, ``exp(rate)`` (alias
    ``exponential``), ``normal(mean,sd)``, ``empirical(path)`` where the
    file holds one value per line.
    """
    match = _SPEC_RE.match(text or "")
    if match is None:
        raise ConfigError(
            f"cannot parse distribution {text!r}; expected name(args) such as "
            "uniform(0,1), exp(1), normal(0,1), or empirical(path.csv)"
        )
    name = match.group(1).lower()
    args = [a.strip() for a in match.group(2).split(",")] if match.group(2) else []

    def floats(expected: int) -> list[float]:
        if len(args) != expected:
            raise ConfigError(
                f"{name} takes {expected} argument(s), got {len(args)} in {text!r}"
            )
        try:
            return [float(a) for a in args]
        except ValueError as exc:
            raise ConfigError(f"non-numeric argument in {text!r}") from exc

    try:
        if name == "uniform":
            lo, hi = floats(2)
            return Uniform(lo, hi)
        if name in ("exp", "exponential"):
            (rate,) = floats(1)
            return Exponential(rate)
        if name == "normal":
            mean, sd = floats(2)
            return Normal(mean, sd)
        if name == "empirical":
            if len(args) != 1 or not args[0]:
                raise ConfigError(f"empirical takes one path argument in {text!r}")
            return Empirical(load_values(args[0]))
    except DomainError as exc:
        raise ConfigError(f"invalid distribution {text!r}: {exc}") from exc
    raise ConfigError(
        f"unknown distribution family {name!r}; expected uniform, exp, normal, "
        "or empirical"
    )
