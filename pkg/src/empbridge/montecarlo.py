"""Monte Carlo validation harness.

Each check simulates the model at desk scale and compares an empirical
quantity against its theoretical target, passing within
max(absolute tolerance, 5 MC standard errors) so the suite is
seed-robust.  Replication streams are derived from
SeedSequence(base_seed, spawn_key=(check_id, role, replication, attempt)),
which makes every check deterministic, independent of scheduling, and
byte-identical across parallelism widths.  Replications run in fixed
256-replication chunks so the chunking itself never depends on the
worker count.

Checks:

- covariance: sample covariance of bridge values at probe times vs the
  limit kernel.
- sigma_hat: mean of sigma-hat^2 vs the composite noise variance.
- supstat: two-sample KS distance between sup|bridge| and sup|limit
  path| draws, both evaluated on the same grid.
- lorenz: uniform convergence of the empirical Lorenz curve for
  Uniform(0,1) and Exponential(1) at pinned scale.
- variance_decay: diagnostic decay of the average order-statistic
  variance and of the mean-replacement error variance.
- degenerate_chain: bit-identical bridges from the M=1 pipeline and a
  chain-free bypass at equal seeds.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution, Exponential, LorenzCurve, Uniform
from .errors import ConfigError, DegenerateBridgeError, DomainError, NumericError
from .limit import kernel_matrix, kernel_value, sample_sup_statistics, sup_statistic
from .noise import NoiseModel, composite_variance, validate_chain, _base_draws
from .regression import (
    RegressionConfig,
    empirical_bridge,
    empirical_lorenz,
    generate_sample,
    ols_fit,
    polygon_eval,
    residual_process,
    restrict_to_grid,
)

__all__ = [
    "CHECK_NAMES",
    "McConfig",
    "Metric",
    "CheckRecord",
    "McReport",
    "check_covariance",
    "check_sigma_hat",
    "check_supstat_distribution",
    "check_lorenz_convergence",
    "check_variance_decay",
    "check_degenerate_chain_equivalence",
    "run_suite",
]

CHECK_NAMES = (
    "covariance",
    "sigma_hat",
    "supstat",
    "lorenz",
    "variance_decay",
    "degenerate_chain",
)

_CHECK_IDS = {name: i + 1 for i, name in enumerate(CHECK_NAMES)}
_CHUNK = 256
_MAX_ATTEMPTS = 100
_MAX_REJECTION_RATE = 0.01
_DEGENERATE_REPS = 5
# 99% point of the two-sample KS statistic is ~1.63*sqrt((R1+R2)/(R1*R2));
# the slack covers polygon-vs-grid discretization and lands the desk-scale
# (R=2000) threshold at the contractual 0.06.
_KS_COEFF = 1.63


@dataclass(frozen=True)
class McConfig:
    """Suite configuration; tolerances default to their documented floors."""

    regression: RegressionConfig
    replications: int = 2000
    probes: tuple[float, ...] = (0.25, 0.5, 0.75)
    base_seed: int = 0
    parallelism: int = 1
    grid_size: int = 256
    checks: tuple[str, ...] = CHECK_NAMES
    cov_abs_tol: float = 0.01
    sigma_rel_tol: float = 0.03
    supstat_slack: float = 0.0085
    lorenz_sample_size: int = 10_000
    lorenz_seeds: int = 50
    lorenz_grid: int = 1000
    lorenz_tol_uniform: float = 0.03
    lorenz_tol_exponential: float = 0.08
    decay_sizes: tuple[int, ...] = (100, 1000, 10_000)
    pilot_replications: int = 200

    def __post_init__(self):
        if int(self.replications) < 100:
            raise ConfigError("replications must be >= 100")
        probes = tuple(float(p) for p in self.probes)
        if not probes or any(not 0.0 < p < 1.0 for p in probes):
            raise ConfigError("probe times must lie strictly inside (0, 1)")
        if any(b <= a for a, b in zip(probes, probes[1:])):
            raise ConfigError("probe times must be sorted strictly increasing")
        object.__setattr__(self, "probes", probes)
        object.__setattr__(self, "replications", int(self.replications))
        object.__setattr__(self, "base_seed", int(self.base_seed))
        object.__setattr__(self, "parallelism", max(1, int(self.parallelism)))
        object.__setattr__(self, "grid_size", int(self.grid_size))
        if self.grid_size < 2:
            raise ConfigError("grid_size must be >= 2")
        unknown = [c for c in self.checks if c not in CHECK_NAMES]
        if unknown:
            raise ConfigError(
                f"unknown checks {unknown}; available: {list(CHECK_NAMES)}"
            )
        object.__setattr__(self, "checks", tuple(self.checks))


@dataclass(frozen=True)
class Metric:
    """One compared quantity; ok is None for purely informational values."""

    name: str
    estimate: float
    target: float | None = None
    se: float | None = None
    tol: float | None = None
    ok: bool | None = None


@dataclass
class CheckRecord:
    name: str
    passed: bool
    diagnostic: bool
    metrics: list[Metric]
    seed: int
    rejections: int = 0
    rejection_indices: tuple[int, ...] = ()
    wall_time_s: float = 0.0
    notes: str = ""


@dataclass
class McReport:
    """Suite results.  CSV/JSON forms are canonical: they omit wall time
    so reports are byte-identical across runs and parallelism widths."""

    base_seed: int
    records: list[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """True when every non-diagnostic check passed."""
        return all(r.passed for r in self.records if not r.diagnostic)

    def csv_text(self) -> str:
        lines = ["name,estimate,target,se,tol,pass"]
        for rec in self.records:
            m = _binding_metric(rec.metrics)
            lines.append(
                ",".join(
                    (
                        rec.name,
                        _fmt(m.estimate),
                        _fmt(m.target),
                        _fmt(m.se),
                        _fmt(m.tol),
                        "pass" if rec.passed else "fail",
                    )
                )
            )
        return "\n".join(lines) + "\n"

    def json_text(self) -> str:
        payload = {
            "base_seed": self.base_seed,
            "passed": self.passed,
            "checks": [
                {
                    "name": r.name,
                    "passed": r.passed,
                    "diagnostic": r.diagnostic,
                    "seed": r.seed,
                    "rejections": r.rejections,
                    "rejection_indices": list(r.rejection_indices),
                    "notes": r.notes,
                    "metrics": [
                        {
                            "name": m.name,
                            "estimate": m.estimate,
                            "target": m.target,
                            "se": m.se,
                            "tol": m.tol,
                            "ok": m.ok,
                        }
                        for m in r.metrics
                    ],
                }
                for r in self.records
            ],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def text_summary(self) -> str:
        lines = []
        for rec in self.records:
            status = "PASS" if rec.passed else "FAIL"
            tag = " (diagnostic)" if rec.diagnostic else ""
            m = _binding_metric(rec.metrics)
            detail = f"{m.name}={m.estimate:.6g}"
            if m.target is not None:
                detail += f" target={m.target:.6g}"
            if m.tol is not None:
                detail += f" tol={m.tol:.3g}"
            extra = ""
            if rec.rejections:
                extra = f"; rejections={rec.rejections}"
            lines.append(
                f"[{status}]{tag} {rec.name}: {detail}{extra} "
                f"({rec.wall_time_s:.2f}s)"
            )
            if rec.notes:
                lines.append(f"        {rec.notes}")
        verdict = "OK" if self.passed else "FAILED"
        lines.append(f"suite: {verdict} (seed {self.base_seed})")
        return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def _binding_metric(metrics: list[Metric]) -> Metric:
    """The metric a one-line summary should show: the worst judged one."""
    judged = [m for m in metrics if m.ok is not None]
    failed = [m for m in judged if not m.ok]
    pool = failed or judged or metrics

    def severity(m: Metric) -> float:
        if m.target is None:
            return 0.0
        allowed = max(m.tol or 0.0, 5.0 * (m.se or 0.0))
        dev = abs(m.estimate - m.target)
        if allowed > 0.0:
            return dev / allowed
        return math.inf if dev > 0.0 else 0.0

    return max(pool, key=severity)


def _stream(
    base_seed: int, check_id: int, role: int, rep: int = 0, attempt: int = 0
) -> np.random.Generator:
    seq = np.random.SeedSequence(
        base_seed, spawn_key=(check_id, role, rep, attempt)
    )
    return np.random.default_rng(seq)


# ----------------------------------------------------------------------
# replication workers (top-level so process pools can pickle them)


@dataclass(frozen=True)
class _BridgeTask:
    regression: RegressionConfig
    base_seed: int
    check_id: int
    probes: tuple[float, ...]
    grid_size: int
    start: int
    stop: int


def _bridge_chunk(task: _BridgeTask):
    """Simulate bridges for replications [start, stop).

    Returns probe values, grid sups, and the 0-based indices of rejected
    (degenerate-bridge) draws; each rejection bumps the attempt index of
    that replication's stream so resampling stays deterministic.
    """
    probes = np.asarray(task.probes)
    count = task.stop - task.start
    vals = np.empty((count, probes.size))
    sups = np.empty(count)
    rejected: list[int] = []
    for k in range(count):
        rep = task.start + k
        for attempt in range(_MAX_ATTEMPTS):
            rng = _stream(task.base_seed, task.check_id, 0, rep, attempt)
            sample = generate_sample(task.regression, rng)
            fit = ols_fit(sample.x, sample.y)
            process = residual_process(sample.x, sample.y, fit)
            try:
                bridge = empirical_bridge(process)
            except DegenerateBridgeError:
                rejected.append(rep)
                continue
            vals[k] = polygon_eval(bridge, probes)
            sups[k] = sup_statistic(restrict_to_grid(bridge, task.grid_size))
            break
        else:
            raise NumericError(
                f"replication {rep} stayed degenerate after {_MAX_ATTEMPTS} attempts"
            )
    return vals, sups, rejected


@dataclass(frozen=True)
class _SigmaTask:
    regression: RegressionConfig
    base_seed: int
    check_id: int
    start: int
    stop: int


def _sigma_chunk(task: _SigmaTask) -> np.ndarray:
    out = np.empty(task.stop - task.start)
    for k in range(out.size):
        rng = _stream(task.base_seed, task.check_id, 0, task.start + k, 0)
        sample = generate_sample(task.regression, rng)
        fit = ols_fit(sample.x, sample.y)
        out[k] = residual_process(sample.x, sample.y, fit).sigma_hat2
    return out


def _map_chunks(worker, tasks, width: int) -> list:
    if width <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=width) as pool:
        return list(pool.map(worker, tasks))


def _chunk_ranges(total: int):
    return [(a, min(a + _CHUNK, total)) for a in range(0, total, _CHUNK)]


def _collect_bridges(cfg: McConfig, check_id: int):
    tasks = [
        _BridgeTask(
            regression=cfg.regression,
            base_seed=cfg.base_seed,
            check_id=check_id,
            probes=cfg.probes,
            grid_size=cfg.grid_size,
            start=a,
            stop=b,
        )
        for a, b in _chunk_ranges(cfg.replications)
    ]
    parts = _map_chunks(_bridge_chunk, tasks, cfg.parallelism)
    vals = np.concatenate([p[0] for p in parts])
    sups = np.concatenate([p[1] for p in parts])
    rejected = tuple(i for p in parts for i in p[2])
    return vals, sups, rejected


def _rejection_metric(rejected: tuple[int, ...], reps: int) -> Metric:
    rate = len(rejected) / reps
    return Metric(
        name="rejection_rate",
        estimate=rate,
        target=0.0,
        se=None,
        tol=_MAX_REJECTION_RATE,
        ok=rate <= _MAX_REJECTION_RATE,
    )


def _rejection_note(rejected: tuple[int, ...]) -> str:
    if not rejected:
        return ""
    shown = ", ".join(str(i) for i in rejected[:20])
    more = "" if len(rejected) <= 20 else f" (+{len(rejected) - 20} more)"
    return f"rejected replications: {shown}{more}"


# ----------------------------------------------------------------------
# checks


def check_covariance(cfg: McConfig) -> CheckRecord:
    """Sample covariance of bridge values at probe times vs the kernel.

    Every probe-pair entry must land within max(cov_abs_tol, 5 SE) of
    kernel_value; degenerate bridges are resampled and more than 1%
    rejections fails the check.
    """
    start = time.perf_counter()
    check_id = _CHECK_IDS["covariance"]
    vals, _, rejected = _collect_bridges(cfg, check_id)
    reps = cfg.replications
    probes = np.asarray(cfg.probes)
    dist = cfg.regression.dist
    centered = vals - vals.mean(axis=0)
    metrics: list[Metric] = []
    for i in range(probes.size):
        for j in range(i, probes.size):
            products = centered[:, i] * centered[:, j]
            est = float(np.mean(products))
            se = float(np.std(products)) / math.sqrt(reps)
            target = float(kernel_value(dist, probes[i], probes[j]))
            ok = abs(est - target) <= max(cfg.cov_abs_tol, 5.0 * se)
            metrics.append(
                Metric(
                    name=f"cov({probes[i]:g},{probes[j]:g})",
                    estimate=est,
                    target=target,
                    se=se,
                    tol=cfg.cov_abs_tol,
                    ok=ok,
                )
            )
    metrics.append(_rejection_metric(rejected, reps))
    passed = all(m.ok for m in metrics)
    return CheckRecord(
        name="covariance",
        passed=passed,
        diagnostic=False,
        metrics=metrics,
        seed=cfg.base_seed,
        rejections=len(rejected),
        rejection_indices=rejected,
        wall_time_s=time.perf_counter() - start,
        notes=_rejection_note(rejected),
    )


def check_sigma_hat(cfg: McConfig) -> CheckRecord:
    """Mean sigma-hat^2 over R replications vs the composite variance."""
    start = time.perf_counter()
    check_id = _CHECK_IDS["sigma_hat"]
    tasks = [
        _SigmaTask(
            regression=cfg.regression,
            base_seed=cfg.base_seed,
            check_id=check_id,
            start=a,
            stop=b,
        )
        for a, b in _chunk_ranges(cfg.replications)
    ]
    sigma2 = np.concatenate(_map_chunks(_sigma_chunk, tasks, cfg.parallelism))
    est = float(np.mean(sigma2))
    se = float(np.std(sigma2)) / math.sqrt(cfg.replications)
    target = composite_variance(cfg.regression.noise)
    tol = cfg.sigma_rel_tol * target
    ok = abs(est - target) <= max(tol, 5.0 * se)
    metric = Metric(
        name="mean_sigma_hat2",
        estimate=est,
        target=target,
        se=se,
        tol=tol,
        ok=ok,
    )
    return CheckRecord(
        name="sigma_hat",
        passed=ok,
        diagnostic=False,
        metrics=[metric],
        seed=cfg.base_seed,
        wall_time_s=time.perf_counter() - start,
    )


def _ks_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = np.sort(a)
    b = np.sort(b)
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def check_supstat_distribution(cfg: McConfig) -> CheckRecord:
    """Two-sample KS distance between bridge sups and limit-path sups.

    Both samples are evaluated on the same G-point grid (the bridge
    polygon is restricted to the grid before taking its sup) so the two
    sides carry identical discretization.  The threshold is the 99%
    point of the two-sample KS null plus a discretization slack, which
    at desk scale (R=2000) is 0.06.
    """
    start = time.perf_counter()
    check_id = _CHECK_IDS["supstat"]
    _, bridge_sups, rejected = _collect_bridges(cfg, check_id)
    reps = cfg.replications
    grid = kernel_matrix(cfg.regression.dist, cfg.grid_size)
    limit = sample_sup_statistics(
        grid, reps, _stream(cfg.base_seed, check_id, 1)
    )
    ks = _ks_distance(bridge_sups, limit.values)
    threshold = _KS_COEFF * math.sqrt(2.0 / reps) + cfg.supstat_slack
    metrics = [
        Metric(
            name="ks_distance",
            estimate=ks,
            target=0.0,
            se=None,
            tol=threshold,
            ok=ks <= threshold,
        ),
        _rejection_metric(rejected, reps),
    ]
    passed = all(m.ok for m in metrics)
    return CheckRecord(
        name="supstat",
        passed=passed,
        diagnostic=False,
        metrics=metrics,
        seed=cfg.base_seed,
        rejections=len(rejected),
        rejection_indices=rejected,
        wall_time_s=time.perf_counter() - start,
        notes=_rejection_note(rejected),
    )


def check_lorenz_convergence(cfg: McConfig) -> CheckRecord:
    """Worst-seed sup gap between empirical and theoretical Lorenz curves.

    Runs at pinned scale (n = lorenz_sample_size over lorenz_seeds
    seeds, sup over a lorenz_grid-point t-grid) for Uniform(0,1) and
    Exponential(1), regardless of the configured regressor law.
    """
    start = time.perf_counter()
    check_id = _CHECK_IDS["lorenz"]
    n = cfg.lorenz_sample_size
    t_grid = np.arange(1, cfg.lorenz_grid + 1) / cfg.lorenz_grid
    metrics: list[Metric] = []
    cases = [
        ("uniform", Uniform(0.0, 1.0), cfg.lorenz_tol_uniform, 0),
        ("exponential", Exponential(1.0), cfg.lorenz_tol_exponential, 1),
    ]
    for label, dist, tol, role in cases:
        theory = np.asarray(LorenzCurve(dist).gl(t_grid))
        gaps = np.empty(cfg.lorenz_seeds)
        for s in range(cfg.lorenz_seeds):
            draws = dist.sample(n, _stream(cfg.base_seed, check_id, role, s))
            gaps[s] = np.max(np.abs(empirical_lorenz(draws, t_grid) - theory))
        worst = float(np.max(gaps))
        se = float(np.std(gaps)) / math.sqrt(cfg.lorenz_seeds)
        metrics.append(
            Metric(
                name=f"worst_gap_{label}",
                estimate=worst,
                target=0.0,
                se=se,
                tol=tol,
                ok=worst <= tol,
            )
        )
    passed = all(m.ok for m in metrics)
    return CheckRecord(
        name="lorenz",
        passed=passed,
        diagnostic=False,
        metrics=metrics,
        seed=cfg.base_seed,
        wall_time_s=time.perf_counter() - start,
    )


def check_variance_decay(cfg: McConfig) -> CheckRecord:
    """Diagnostic: order-statistic variance decay and mean-replacement error.

    For each n in decay_sizes, estimates (i) the average variance of the
    sorted regressors, avg_v(n) = (1/n) sum_i Var x_(i), and (ii) the
    variance of (sum e0*x0 - sum e0*Ex0)/sqrt(n), where x0, e0 are the
    sample-centered regressors and noise and Ex0 is a pilot estimate of
    E x0.  Both sequences should decrease in n.  Soft-pass: reported,
    never gates the suite exit code.
    """
    start = time.perf_counter()
    check_id = _CHECK_IDS["variance_decay"]
    reg = cfg.regression
    pilot_reps = cfg.pilot_replications
    avg_vars: list[float] = []
    repl_vars: list[float] = []
    metrics: list[Metric] = []
    for idx, n in enumerate(cfg.decay_sizes):
        # a = b = 0 makes y the raw noise, so samples expose (x, eps) pairs.
        sub = RegressionConfig(a=0.0, b=0.0, n=int(n), dist=reg.dist, noise=reg.noise)
        pilot = np.empty((pilot_reps, n))
        for r in range(pilot_reps):
            rng = _stream(cfg.base_seed, check_id, 2 * idx, r)
            pilot[r] = generate_sample(sub, rng).x
        avg_var = float(np.mean(np.var(pilot, axis=0)))
        ex0 = pilot.mean(axis=0)
        ex0 -= ex0.mean()
        stats = np.empty(pilot_reps)
        for r in range(pilot_reps):
            rng = _stream(cfg.base_seed, check_id, 2 * idx + 1, r)
            sample = generate_sample(sub, rng)
            x0 = sample.x - sample.x.mean()
            e0 = sample.y - sample.y.mean()
            stats[r] = float(np.dot(e0, x0 - ex0)) / math.sqrt(n)
        repl_var = float(np.var(stats))
        avg_vars.append(avg_var)
        repl_vars.append(repl_var)
        metrics.append(Metric(name=f"avg_var_x_n{n}", estimate=avg_var))
        metrics.append(Metric(name=f"replacement_var_n{n}", estimate=repl_var))
    avg_monotone = all(b < a for a, b in zip(avg_vars, avg_vars[1:]))
    repl_monotone = all(b < a for a, b in zip(repl_vars, repl_vars[1:]))
    metrics.append(
        Metric(
            name="avg_var_x_decreasing",
            estimate=float(avg_monotone),
            target=1.0,
            tol=0.0,
            ok=avg_monotone,
        )
    )
    metrics.append(
        Metric(
            name="replacement_var_decreasing",
            estimate=float(repl_monotone),
            target=1.0,
            tol=0.0,
            ok=repl_monotone,
        )
    )
    return CheckRecord(
        name="variance_decay",
        passed=avg_monotone and repl_monotone,
        diagnostic=True,
        metrics=metrics,
        seed=cfg.base_seed,
        wall_time_s=time.perf_counter() - start,
        notes=(
            "diagnostic only; pilot of "
            f"{pilot_reps} replications per size {tuple(cfg.decay_sizes)}"
        ),
    )


def _bypass_bridge_nodes(reg: RegressionConfig, rng) -> tuple[np.ndarray, np.ndarray]:
    """Chain-free pipeline: same stream layout, no chain machinery.

    Spawns the same three child streams as generate_sample but draws the
    noise directly as sigma_1 * (base family draws), which must consume
    the noise stream identically to the M=1 chain pipeline.
    """
    base = np.random.default_rng(rng)
    xi_rng, _chain_rng, noise_rng = base.spawn(3)
    x = np.sort(reg.dist.sample(reg.n, xi_rng), kind="stable")
    eps = reg.noise.state_sd[0] * _base_draws(reg.noise.family, reg.n, noise_rng)
    y = reg.a + reg.b * x + eps
    fit = ols_fit(x, y)
    process = residual_process(x, y, fit)
    return y, empirical_bridge(process).nodes


def check_degenerate_chain_equivalence(cfg: McConfig) -> CheckRecord:
    """M=1 pipeline vs chain-free bypass: bridges must match bit for bit."""
    start = time.perf_counter()
    reg = cfg.regression
    if reg.noise.chain.state_count != 1:
        raise DomainError(
            "degenerate_chain check requires an M=1 noise model; "
            f"got M={reg.noise.chain.state_count}"
        )
    check_id = _CHECK_IDS["degenerate_chain"]
    worst_gap = 0.0
    first_divergence: tuple[int, int] | None = None
    for rep in range(_DEGENERATE_REPS):
        seq = np.random.SeedSequence(
            cfg.base_seed, spawn_key=(check_id, 0, rep, 0)
        )
        sample = generate_sample(reg, np.random.default_rng(seq))
        fit = ols_fit(sample.x, sample.y)
        nodes = empirical_bridge(
            residual_process(sample.x, sample.y, fit)
        ).nodes
        seq2 = np.random.SeedSequence(
            cfg.base_seed, spawn_key=(check_id, 0, rep, 0)
        )
        y2, nodes2 = _bypass_bridge_nodes(reg, np.random.default_rng(seq2))
        if not np.array_equal(sample.y, y2):
            idx = int(np.nonzero(sample.y != y2)[0][0])
            first_divergence = (rep, idx)
            worst_gap = math.inf
            break
        if not np.array_equal(nodes, nodes2):
            idx = int(np.nonzero(nodes != nodes2)[0][0])
            first_divergence = (rep, idx)
            worst_gap = max(worst_gap, float(np.max(np.abs(nodes - nodes2))))
            break
    passed = first_divergence is None
    notes = ""
    if first_divergence is not None:
        notes = (
            "stream-consumption mismatch: first divergent index "
            f"{first_divergence[1]} in replication {first_divergence[0]}"
        )
    metric = Metric(
        name="max_node_gap",
        estimate=worst_gap,
        target=0.0,
        se=None,
        tol=0.0,
        ok=passed,
    )
    return CheckRecord(
        name="degenerate_chain",
        passed=passed,
        diagnostic=False,
        metrics=[metric],
        seed=cfg.base_seed,
        wall_time_s=time.perf_counter() - start,
        notes=notes,
    )


_CHECK_FUNCS = {
    "covariance": check_covariance,
    "sigma_hat": check_sigma_hat,
    "supstat": check_supstat_distribution,
    "lorenz": check_lorenz_convergence,
    "variance_decay": check_variance_decay,
    "degenerate_chain": check_degenerate_chain_equivalence,
}


def _degenerate_variant(cfg: McConfig) -> McConfig:
    """M=1 configuration with the same composite variance and noise family."""
    reg = cfg.regression
    if reg.noise.chain.state_count == 1:
        return cfg
    sd = math.sqrt(composite_variance(reg.noise))
    noise = NoiseModel(validate_chain([[1.0]]), [sd], family=reg.noise.family)
    sub = RegressionConfig(a=reg.a, b=reg.b, n=reg.n, dist=reg.dist, noise=noise)
    return McConfig(
        regression=sub,
        replications=cfg.replications,
        probes=cfg.probes,
        base_seed=cfg.base_seed,
        parallelism=cfg.parallelism,
        grid_size=cfg.grid_size,
        checks=cfg.checks,
    )


def run_suite(cfg: McConfig) -> McReport:
    """Run the enabled checks in canonical order and collect the report.

    The degenerate_chain check requires M=1; when the configured chain
    is larger, it runs on a derived M=1 variant with the same composite
    variance (noted in the record).
    """
    report = McReport(base_seed=cfg.base_seed)
    for name in CHECK_NAMES:
        if name not in cfg.checks:
            continue
        if name == "degenerate_chain":
            sub = _degenerate_variant(cfg)
            record = check_degenerate_chain_equivalence(sub)
            if sub is not cfg:
                extra = "run on derived M=1 variant with equal composite variance"
                record.notes = f"{record.notes}; {extra}" if record.notes else extra
        else:
            record = _CHECK_FUNCS[name](cfg)
        report.records.append(record)
    return report
