"""The limiting Gaussian process: kernel, grid factorization, sup-statistics.

The covariance kernel of the limit process is

    K(t, s) = min(t, s) - t*s - GL0(t) * GL0(s) / Var(xi)

i.e. the Brownian-bridge kernel minus a rank-one term built from the
centered general Lorenz curve of the regressor law.  Paths are simulated
on a uniform grid by Cholesky-factorizing the interior block (the t = 0
and t = 1 rows are identically zero, so only the interior is factorized
and the endpoints are pinned exactly).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import Distribution, LorenzCurve
from .errors import DomainError, NumericError
from .regression import BridgePolygon

__all__ = [
    "KernelGrid",
    "SupStatisticSample",
    "kernel_value",
    "kernel_matrix",
    "sample_limit_path",
    "sample_limit_paths",
    "sup_statistic",
    "sample_sup_statistics",
    "critical_values",
    "write_kernel_csv",
    "write_critical_values_csv",
]

_JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8, 1e-6)
_MIN_EIG_TOL = -1e-8
# paths are simulated in fixed-size blocks so results for a given
# (grid, reps, seed) never depend on memory limits or callers.
_BLOCK = 8192

SUP_SOURCES = ("limit-process", "empirical-bridge")


@dataclass(frozen=True, eq=False)
class KernelGrid:
    """Kernel matrix on t_j = j/G with a factorization of its interior.

    ``factor`` is lower-triangular with factor @ factor.T equal to the
    interior (G-1)x(G-1) block plus ``jitter_used`` on the diagonal.
    ``brownian_bridge`` marks the synthetic known-answer mode in which
    the Lorenz term is forced to zero; it corresponds to no legal
    regressor law and exists for test harnesses only.
    """

    grid_size: int
    times: np.ndarray
    matrix: np.ndarray
    factor: np.ndarray
    jitter_used: float
    brownian_bridge: bool
    dist: Distribution | None

    def __post_init__(self):
        for arr in (self.times, self.matrix, self.factor):
            arr.setflags(write=False)


@dataclass(frozen=True, eq=False)
class SupStatisticSample:
    """Draws of sup_t |path(t)| from one source.

    ``size`` is the grid size for limit-process draws and the sample
    size n for empirical-bridge draws.
    """

    values: np.ndarray
    source: str
    size: int
    replications: int

    def __post_init__(self):
        if self.source not in SUP_SOURCES:
            raise DomainError(f"unknown sup source {self.source!r}")
        if self.values.size != self.replications:
            raise DomainError("values length must equal replications")
        if self.values.size and float(self.values.min()) < 0.0:
            raise DomainError("sup statistics must be nonnegative")
        self.values.setflags(write=False)


def _validated_unit(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]")
    return arr


def _variance_of(dist: Distribution) -> float:
    var = dist.moments().variance
    if not var > 0.0:
        raise DomainError(
            "kernel requires a regressor law with strictly positive variance"
        )
    return var


def kernel_value(
    dist: Distribution, t, s, *, lorenz: LorenzCurve | None = None
) -> float | np.ndarray:
    """K(t, s) = min(t,s) - t*s - GL0(t)*GL0(s)/Var; symmetric in (t, s).

    Broadcasts over array arguments.  ``lorenz`` overrides the Lorenz
    evaluation mode (closed form by default), e.g. to cross-check
    against quadrature.
    """
    t_arr = _validated_unit(t, "t")
    s_arr = _validated_unit(s, "s")
    var = _variance_of(dist)
    curve = lorenz if lorenz is not None else LorenzCurve(dist)
    if curve.dist is not dist:
        raise DomainError("lorenz override must wrap the same distribution")
    g_t = np.asarray(curve.gl_centered(t_arr))
    g_s = np.asarray(curve.gl_centered(s_arr))
    out = np.minimum(t_arr, s_arr) - t_arr * s_arr - g_t * g_s / var
    return float(out) if (np.ndim(t) == 0 and np.ndim(s) == 0) else out


def kernel_matrix(
    dist: Distribution | None,
    grid_size: int = 256,
    *,
    brownian_bridge: bool = False,
) -> KernelGrid:
    """Kernel matrix on the uniform grid plus interior Cholesky factor.

    The factorization retries with escalating diagonal jitter
    (0, 1e-12, ..., 1e-6); needing more than 1e-6 signals a broken
    Lorenz curve (a valid covariance is PSD) and raises NumericError.
    With ``brownian_bridge=True`` the Lorenz term is zeroed and ``dist``
    is ignored.
    """
    grid_size = int(grid_size)
    if grid_size < 2:
        raise DomainError("grid_size must be >= 2")
    times = np.arange(grid_size + 1) / grid_size
    matrix = np.minimum.outer(times, times) - np.outer(times, times)
    if not brownian_bridge:
        if dist is None:
            raise DomainError("dist is required unless brownian_bridge=True")
        var = _variance_of(dist)
        g0 = np.asarray(LorenzCurve(dist).gl_centered(times))
        matrix -= np.outer(g0, g0) / var

    interior = matrix[1:-1, 1:-1]
    min_eig = float(np.linalg.eigvalsh(interior)[0])
    if min_eig < _MIN_EIG_TOL:
        raise NumericError(
            f"kernel interior block has eigenvalue {min_eig:g} < {_MIN_EIG_TOL:g}; "
            "Lorenz values are inconsistent with a covariance",
            achieved=min_eig,
        )
    eye = np.eye(grid_size - 1)
    factor = None
    jitter_used = 0.0
    for jitter in _JITTER_LADDER:
        try:
            factor = np.linalg.cholesky(interior + jitter * eye)
            jitter_used = jitter
            break
        except np.linalg.LinAlgError:
            continue
    if factor is None:
        raise NumericError(
            "kernel interior block is not PSD even with jitter 1e-6",
            achieved=min_eig,
        )
    return KernelGrid(
        grid_size=grid_size,
        times=times,
        matrix=matrix,
        factor=factor,
        jitter_used=jitter_used,
        brownian_bridge=bool(brownian_bridge),
        dist=None if brownian_bridge else dist,
    )


def sample_limit_path(grid: KernelGrid, rng: np.random.Generator) -> BridgePolygon:
    """One simulated path of the limit process, as a polygon on the grid."""
    z = rng.standard_normal(grid.grid_size - 1)
    nodes = np.zeros(grid.grid_size + 1)
    nodes[1:-1] = grid.factor @ z
    return BridgePolygon(nodes=nodes, kind="limit-path")


def sample_limit_paths(
    grid: KernelGrid, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Node values of ``count`` paths as a (count, G+1) array (one draw block)."""
    count = int(count)
    if count < 1:
        raise DomainError("count must be >= 1")
    z = rng.standard_normal((grid.grid_size - 1, count))
    nodes = np.zeros((count, grid.grid_size + 1))
    nodes[:, 1:-1] = (grid.factor @ z).T
    return nodes


def sup_statistic(poly: BridgePolygon) -> float:
    """sup over [0, 1] of |path|, i.e. max over nodes (piecewise linear)."""
    return float(np.max(np.abs(poly.nodes)))


def _limit_sups(grid: KernelGrid, reps: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty(reps)
    done = 0
    while done < reps:
        b = min(_BLOCK, reps - done)
        z = rng.standard_normal((grid.grid_size - 1, b))
        np.max(np.abs(grid.factor @ z), axis=0, out=out[done : done + b])
        done += b
    return out


def sample_sup_statistics(
    grid: KernelGrid, reps: int, rng
) -> SupStatisticSample:
    """Draw ``reps`` sup-statistics of the limit process on the grid."""
    reps = int(reps)
    if reps < 1:
        raise DomainError("reps must be >= 1")
    values = _limit_sups(grid, reps, np.random.default_rng(rng))
    return SupStatisticSample(
        values=values,
        source="limit-process",
        size=grid.grid_size,
        replications=reps,
    )


def critical_values(grid: KernelGrid, levels, reps: int, rng) -> np.ndarray:
    """Empirical ``levels``-quantiles of sup|path| over ``reps`` MC paths."""
    levels_arr = np.asarray(levels, dtype=float).ravel()
    if levels_arr.size == 0:
        raise DomainError("levels must be non-empty")
    if np.any(levels_arr <= 0.0) or np.any(levels_arr >= 1.0):
        raise DomainError("levels must lie strictly inside (0, 1)")
    reps = int(reps)
    if reps < 1000:
        raise DomainError("reps must be >= 1000 for quantile estimation")
    sups = _limit_sups(grid, reps, np.random.default_rng(rng))
    return np.quantile(sups, levels_arr)


def write_kernel_csv(grid: KernelGrid, path) -> None:
    """Write the (G+1)x(G+1) matrix row-major, times as header and row labels."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t," + ",".join(repr(float(t)) for t in grid.times) + "\n")
        for i, t in enumerate(grid.times):
            row = ",".join(repr(float(v)) for v in grid.matrix[i])
            fh.write(f"{float(t)!r},{row}\n")


def write_critical_values_csv(levels, values, reps: int, seed: int, path) -> None:
    """Write columns (level, value, reps, seed), one row per level."""
    levels_arr = np.asarray(levels, dtype=float).ravel()
    values_arr = np.asarray(values, dtype=float).ravel()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("level,value,reps,seed\n")
        for lv, val in zip(levels_arr, values_arr):
            fh.write(f"{float(lv)!r},{float(val)!r},{int(reps)},{int(seed)}\n")
