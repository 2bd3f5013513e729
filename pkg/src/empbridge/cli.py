"""Command-line interface.

Subcommands: simulate | bridge | kernel | limit | validate | test.
Values resolve in layers: built-in defaults, then --profile, then the
--config TOML file, then explicit flags.  The fully resolved
configuration is echoed to <out>/config.toml so any run can be
reproduced byte-identically from its output directory.

Exit codes: 0 success, 1 check/test failure, 2 usage or data error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
import tomli

from .distributions import Distribution, Empirical, parse_distribution
from .errors import ConfigError, EmpbridgeError, NumericError
from .limit import (
    critical_values,
    kernel_matrix,
    sample_sup_statistics,
    sup_statistic,
    write_critical_values_csv,
    write_kernel_csv,
)
from .montecarlo import CHECK_NAMES, McConfig, run_suite
from .noise import NoiseModel, load_transition, parse_transition, validate_chain
from .regression import (
    RegressionConfig,
    empirical_bridge,
    generate_sample,
    ols_fit,
    read_xy_csv,
    residual_process,
    restrict_to_grid,
    write_bridge_csv,
    write_sample_csv,
)

__all__ = ["RunConfig", "ModelCheckResult", "parse_config", "model_check_test", "cmd_dispatch", "main"]

_SUBCOMMANDS = ("simulate", "bridge", "kernel", "limit", "validate", "test")
_ALPHA = 0.05

_DEFAULTS: dict = {
    "dist": "uniform(0,1)",
    "n": 2000,
    "reps": 2000,
    "grid": 256,
    "a": 0.0,
    "b": 1.0,
    "transition": "1",
    "sigmas": (1.0,),
    "noise": "gaussian",
    "initial": None,
    "seed": 0,
    "probes": (0.25, 0.5, 0.75),
    "levels": (0.9, 0.95, 0.99),
    "out": "out",
    "json": False,
    "bb": False,
    "profile": None,
    "width": 1,
    "checks": CHECK_NAMES,
    "data": None,
}

_PROFILES = {
    # desk scale: the documented default workload.
    "desk": {
        "dist": "uniform(0,1)",
        "n": 2000,
        "reps": 2000,
        "grid": 256,
        "transition": "0.9,0.1;0.2,0.8",
        "sigmas": (1.0, 2.0),
    },
    # quick scale: same shape, small enough for smoke tests.
    "quick": {
        "dist": "uniform(0,1)",
        "n": 400,
        "reps": 200,
        "grid": 64,
        "transition": "0.9,0.1;0.2,0.8",
        "sigmas": (1.0, 2.0),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration for one subcommand invocation."""

    subcommand: str
    dist: str
    n: int
    reps: int
    grid: int
    a: float
    b: float
    transition: str
    sigmas: tuple[float, ...]
    noise: str
    initial: int | None
    seed: int
    probes: tuple[float, ...]
    levels: tuple[float, ...]
    out: str
    json: bool
    bb: bool
    profile: str | None
    width: int
    checks: tuple[str, ...]
    data: str | None


def _float_tuple(value, key: str) -> tuple[float, ...]:
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        raise ConfigError(f"{key} must be a list or comma-separated string")
    try:
        out = tuple(float(p) for p in parts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"non-numeric entry in {key}: {value!r}") from exc
    if not out:
        raise ConfigError(f"{key} must be non-empty")
    return out


def _str_tuple(value, key: str) -> tuple[str, ...]:
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
    elif isinstance(value, (list, tuple)):
        parts = [str(p) for p in value]
    else:
        raise ConfigError(f"{key} must be a list or comma-separated string")
    if not parts:
        raise ConfigError(f"{key} must be non-empty")
    return tuple(parts)


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid TOML: {exc}") from exc
    unknown = sorted(set(data) - set(_DEFAULTS) - {"subcommand"})
    if unknown:
        raise ConfigError(
            f"unknown config keys {unknown}; valid keys: "
            f"{sorted(_DEFAULTS)} (plus subcommand)"
        )
    return data


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="empbridge",
        description=(
            "Simulate ordered-regressor linear models with Markov-modulated "
            "noise, build empirical bridges of OLS residuals, evaluate the "
            "limit-process kernel, validate convergence by Monte Carlo, and "
            "run a residual-based model check on external data."
        ),
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    descriptions = {
        "simulate": "draw one data set and write sample.csv",
        "bridge": "simulate, fit, and write the empirical bridge CSV",
        "kernel": "write the limit-process kernel matrix CSV",
        "limit": "write Monte Carlo critical values of sup|limit path|",
        "validate": "run the Monte Carlo validation suite",
        "test": "residual model-check test on external (x, y) data",
    }
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, help=descriptions[name])
        p.add_argument("--dist", help="regressor law, e.g. uniform(0,1), exp(1), normal(0,1), empirical(path.csv)")
        p.add_argument("--n", type=int, help="sample size (>= 3)")
        p.add_argument("--reps", type=int, help="Monte Carlo replications")
        p.add_argument("--grid", type=int, help="kernel/path grid size G (>= 2)")
        p.add_argument("--a", type=float, help="true intercept")
        p.add_argument("--b", type=float, help="true slope")
        p.add_argument("--transition", help="transition matrix: CSV path or inline rows 'p11,p12;p21,p22'")
        p.add_argument("--sigmas", help="per-state noise scales, e.g. '1,2'")
        p.add_argument("--noise", choices=("gaussian", "uniform", "rademacher"), help="base noise family")
        p.add_argument("--initial", type=int, help="fixed initial chain state (default: stationary)")
        p.add_argument("--seed", type=int, help="base seed")
        p.add_argument("--probes", help="probe times in (0,1), e.g. '0.25,0.5,0.75'")
        p.add_argument("--levels", help="critical-value levels, e.g. '0.9,0.95,0.99'")
        p.add_argument("--out", help="output directory")
        p.add_argument("--json", action="store_const", const=True, help="also emit JSON reports")
        p.add_argument("--bb", action="store_const", const=True, help="Brownian-bridge mode (Lorenz term zeroed; synthetic)")
        p.add_argument("--profile", choices=sorted(_PROFILES), help="named workload profile")
        p.add_argument("--width", type=int, help="parallel worker count for replications")
        p.add_argument("--checks", help=f"comma list of checks, subset of {','.join(CHECK_NAMES)}")
        p.add_argument("--config", help="TOML config file (flags override file values)")
        if name == "test":
            p.add_argument("--data", help="CSV of observations with header columns x,y")
    return parser


def parse_config(argv=None) -> RunConfig:
    """Parse argv (and optional config file) into a validated RunConfig."""
    ns = _build_parser().parse_args(argv)
    flags = {
        key: getattr(ns, key)
        for key in _DEFAULTS
        if getattr(ns, key, None) is not None
    }
    file_values = _load_config_file(ns.config) if ns.config else {}
    if "subcommand" in file_values and file_values["subcommand"] != ns.subcommand:
        raise ConfigError(
            f"config file was written for subcommand "
            f"{file_values['subcommand']!r}, not {ns.subcommand!r}"
        )
    file_values.pop("subcommand", None)

    profile = flags.get("profile", file_values.get("profile"))
    merged = dict(_DEFAULTS)
    if profile is not None:
        if profile not in _PROFILES:
            raise ConfigError(
                f"unknown profile {profile!r}; available: {sorted(_PROFILES)}"
            )
        merged.update(_PROFILES[profile])
        merged["profile"] = profile
    merged.update(file_values)
    merged.update(flags)
    return _validated_run_config(ns.subcommand, merged)


def _validated_run_config(subcommand: str, raw: dict) -> RunConfig:
    n = int(raw["n"])
    if n < 3:
        raise ConfigError(f"--n must be >= 3, got {n} (e.g. --n 2000)")
    reps = int(raw["reps"])
    if reps < 1:
        raise ConfigError(f"--reps must be >= 1, got {reps}")
    grid = int(raw["grid"])
    if grid < 2:
        raise ConfigError(f"--grid must be >= 2, got {grid}")
    width = int(raw["width"])
    if width < 1:
        raise ConfigError(f"--width must be >= 1, got {width}")
    seed = int(raw["seed"])
    if seed < 0:
        raise ConfigError(f"--seed must be >= 0, got {seed}")
    a = float(raw["a"])
    b = float(raw["b"])
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ConfigError("--a and --b must be finite")
    probes = _float_tuple(raw["probes"], "probes")
    if any(not 0.0 < p < 1.0 for p in probes) or any(
        q <= p for p, q in zip(probes, probes[1:])
    ):
        raise ConfigError(
            "probes must be sorted strictly increasing inside (0,1), "
            "e.g. --probes 0.25,0.5,0.75"
        )
    levels = _float_tuple(raw["levels"], "levels")
    if any(not 0.0 < lv < 1.0 for lv in levels) or any(
        m <= lv for lv, m in zip(levels, levels[1:])
    ):
        raise ConfigError(
            "levels must be sorted strictly increasing inside (0,1), "
            "e.g. --levels 0.9,0.95,0.99"
        )
    sigmas = _float_tuple(raw["sigmas"], "sigmas")
    checks = _str_tuple(raw["checks"], "checks")
    unknown = [c for c in checks if c not in CHECK_NAMES]
    if unknown:
        raise ConfigError(
            f"unknown checks {unknown}; valid: {','.join(CHECK_NAMES)}"
        )
    initial = raw["initial"]
    if initial is not None:
        initial = int(initial)
    noise = str(raw["noise"])
    if noise not in ("gaussian", "uniform", "rademacher"):
        raise ConfigError(
            f"noise must be gaussian, uniform, or rademacher, got {noise!r}"
        )
    data = raw["data"]
    if subcommand == "test" and not data:
        raise ConfigError("test requires --data <csv> with header columns x,y")
    return RunConfig(
        subcommand=subcommand,
        dist=str(raw["dist"]),
        n=n,
        reps=reps,
        grid=grid,
        a=a,
        b=b,
        transition=str(raw["transition"]),
        sigmas=sigmas,
        noise=noise,
        initial=initial,
        seed=seed,
        probes=probes,
        levels=levels,
        out=str(raw["out"]),
        json=bool(raw["json"]),
        bb=bool(raw["bb"]),
        profile=raw["profile"],
        width=width,
        checks=checks,
        data=None if data is None else str(data),
    )


# ----------------------------------------------------------------------
# domain-object construction


def _build_dist(cfg: RunConfig) -> Distribution:
    return parse_distribution(cfg.dist)


def _build_noise(cfg: RunConfig) -> NoiseModel:
    text = cfg.transition
    if os.path.exists(text) or text.lower().endswith(".csv"):
        matrix = load_transition(text)
    else:
        matrix = parse_transition(text)
    chain = validate_chain(matrix, initial=cfg.initial)
    return NoiseModel(chain, cfg.sigmas, family=cfg.noise)


def _build_regression(cfg: RunConfig) -> RegressionConfig:
    return RegressionConfig(
        a=cfg.a, b=cfg.b, n=cfg.n, dist=_build_dist(cfg), noise=_build_noise(cfg)
    )


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize config value {value!r}")


def _echo_config(cfg: RunConfig, out_dir: Path) -> None:
    """Write the resolved configuration for provenance and re-runs."""
    lines = ["# resolved configuration; reproduce with:",
             f"# empbridge {cfg.subcommand} --config config.toml"]
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        lines.append(f"{f.name} = {_toml_value(value)}")
    (out_dir / "config.toml").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _prepare_out(cfg: RunConfig) -> Path:
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _echo_config(cfg, out_dir)
    return out_dir


# ----------------------------------------------------------------------
# subcommands


def _cmd_simulate(cfg: RunConfig) -> int:
    reg = _build_regression(cfg)
    out_dir = _prepare_out(cfg)
    sample = generate_sample(reg, cfg.seed)
    path = out_dir / "sample.csv"
    write_sample_csv(sample, path)
    print(f"wrote {path} (n={cfg.n}, seed={cfg.seed})")
    return 0


def _cmd_bridge(cfg: RunConfig) -> int:
    reg = _build_regression(cfg)
    out_dir = _prepare_out(cfg)
    sample = generate_sample(reg, cfg.seed)
    fit = ols_fit(sample.x, sample.y)
    bridge = empirical_bridge(residual_process(sample.x, sample.y, fit))
    path = out_dir / "bridge.csv"
    write_bridge_csv(bridge, path)
    print(f"wrote {path} (n={cfg.n}, seed={cfg.seed})")
    return 0


def _cmd_kernel(cfg: RunConfig) -> int:
    dist = None if cfg.bb else _build_dist(cfg)
    out_dir = _prepare_out(cfg)
    grid = kernel_matrix(dist, cfg.grid, brownian_bridge=cfg.bb)
    path = out_dir / "kernel.csv"
    write_kernel_csv(grid, path)
    print(f"wrote {path} (G={cfg.grid}, jitter={grid.jitter_used:g})")
    return 0


def _cmd_limit(cfg: RunConfig) -> int:
    dist = None if cfg.bb else _build_dist(cfg)
    out_dir = _prepare_out(cfg)
    grid = kernel_matrix(dist, cfg.grid, brownian_bridge=cfg.bb)
    values = critical_values(grid, cfg.levels, cfg.reps, cfg.seed)
    path = out_dir / "critical_values.csv"
    write_critical_values_csv(cfg.levels, values, cfg.reps, cfg.seed, path)
    summary = ", ".join(
        f"{lv:g}->{val:.4f}" for lv, val in zip(cfg.levels, values)
    )
    print(f"wrote {path} ({summary})")
    return 0


def _cmd_validate(cfg: RunConfig) -> int:
    reg = _build_regression(cfg)
    out_dir = _prepare_out(cfg)
    mc = McConfig(
        regression=reg,
        replications=cfg.reps,
        probes=cfg.probes,
        base_seed=cfg.seed,
        parallelism=cfg.width,
        grid_size=cfg.grid,
        checks=cfg.checks,
    )
    report = run_suite(mc)
    (out_dir / "report.csv").write_text(report.csv_text(), encoding="utf-8")
    if cfg.json:
        (out_dir / "report.json").write_text(report.json_text(), encoding="utf-8")
    print(report.text_summary(), end="")
    return 0 if report.passed else 1


@dataclass(frozen=True)
class ModelCheckResult:
    """Outcome of the residual model-check test on one data set."""

    statistic: float
    p_value: float
    sigma_hat2: float
    a_hat: float
    b_hat: float
    n: int
    reps: int
    grid_size: int
    seed: int
    levels: tuple[float, ...]
    critical_values: tuple[float, ...]
    caveat: str


_TEST_CAVEAT = (
    "plug-in approximation: the reference kernel replaces the regressor law "
    "by the empirical distribution of x and depends on the noise only "
    "through its overall variance; heterogeneous Markov-modulated noise is "
    "covered by that variance reduction"
)


def model_check_test(
    x,
    y,
    *,
    grid_size: int = 256,
    reps: int = 2000,
    seed: int = 0,
    levels: tuple[float, ...] = (0.9, 0.95, 0.99),
) -> ModelCheckResult:
    """Residual model-check test for a straight-line fit.

    Sorts by x, fits OLS, builds the empirical bridge, and compares its
    sup-statistic T against Monte Carlo draws of sup|limit path| under
    the plug-in kernel (empirical distribution of x).  Both T and the
    reference sups are evaluated on the same G-point grid.  The p-value
    is the rank statistic (r+1)/(reps+1) with r the count of reference
    sups >= T.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.argsort(x, kind="stable")
    x = x[order]
    y = y[order]
    fit = ols_fit(x, y)
    process = residual_process(x, y, fit)
    bridge = empirical_bridge(process)
    statistic = sup_statistic(restrict_to_grid(bridge, grid_size))
    grid = kernel_matrix(Empirical(x), grid_size)
    sups = sample_sup_statistics(grid, reps, seed)
    r = int(np.count_nonzero(sups.values >= statistic))
    p_value = (r + 1) / (reps + 1)
    crit = np.quantile(sups.values, np.asarray(levels))
    return ModelCheckResult(
        statistic=statistic,
        p_value=float(p_value),
        sigma_hat2=process.sigma_hat2,
        a_hat=fit.a_hat,
        b_hat=fit.b_hat,
        n=int(x.size),
        reps=int(reps),
        grid_size=int(grid_size),
        seed=int(seed),
        levels=tuple(float(lv) for lv in levels),
        critical_values=tuple(float(c) for c in crit),
        caveat=_TEST_CAVEAT,
    )


def _write_test_report(result: ModelCheckResult, bridge_path: Path, path: Path) -> None:
    rows = [
        ("statistic", repr(result.statistic)),
        ("p_value", repr(result.p_value)),
        ("sigma_hat2", repr(result.sigma_hat2)),
        ("a_hat", repr(result.a_hat)),
        ("b_hat", repr(result.b_hat)),
        ("n", str(result.n)),
        ("reps", str(result.reps)),
        ("grid", str(result.grid_size)),
        ("seed", str(result.seed)),
    ]
    rows += [
        (f"critical_{lv:g}", repr(val))
        for lv, val in zip(result.levels, result.critical_values)
    ]
    rows += [
        ("bridge_csv", str(bridge_path)),
        ("plugin_kernel", "empirical(x)"),
        ("caveat", result.caveat),
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("key,value\n")
        for key, value in rows:
            fh.write(f"{key},{value}\n")


def _cmd_test(cfg: RunConfig) -> int:
    x, y = read_xy_csv(cfg.data)
    out_dir = _prepare_out(cfg)
    result = model_check_test(
        x,
        y,
        grid_size=cfg.grid,
        reps=cfg.reps,
        seed=cfg.seed,
        levels=cfg.levels,
    )
    order = np.argsort(x, kind="stable")
    fit = ols_fit(x[order], y[order])
    bridge = empirical_bridge(residual_process(x[order], y[order], fit))
    bridge_path = out_dir / "test_bridge.csv"
    write_bridge_csv(bridge, bridge_path)
    report_path = out_dir / "test_report.csv"
    _write_test_report(result, bridge_path, report_path)
    if cfg.json:
        payload = {
            "statistic": result.statistic,
            "p_value": result.p_value,
            "sigma_hat2": result.sigma_hat2,
            "a_hat": result.a_hat,
            "b_hat": result.b_hat,
            "n": result.n,
            "reps": result.reps,
            "grid": result.grid_size,
            "seed": result.seed,
            "critical_values": dict(
                zip((f"{lv:g}" for lv in result.levels), result.critical_values)
            ),
            "bridge_csv": str(bridge_path),
            "plugin_kernel": "empirical(x)",
            "caveat": result.caveat,
        }
        (out_dir / "test_report.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    rejected = result.p_value < _ALPHA
    verdict = "reject" if rejected else "no evidence against"
    print(
        f"T={result.statistic:.6g} p={result.p_value:.6g} "
        f"sigma_hat2={result.sigma_hat2:.6g} -> {verdict} the linear model "
        f"at level {_ALPHA:g}"
    )
    print(f"wrote {report_path}")
    return 1 if rejected else 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "bridge": _cmd_bridge,
    "kernel": _cmd_kernel,
    "limit": _cmd_limit,
    "validate": _cmd_validate,
    "test": _cmd_test,
}


def cmd_dispatch(cfg: RunConfig) -> int:
    """Route a RunConfig to its subcommand; returns the exit status."""
    return _COMMANDS[cfg.subcommand](cfg)


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        return cmd_dispatch(cfg)
    except NumericError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 2
    except EmpbridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
