"""Empirical bridges of regression residuals under ordered regressors.

Simulates the linear model y_i = a + b*x_(i) + eps_i with order-statistic
regressors and Markov-modulated noise, builds the empirical bridge of the
OLS residual partial sums, evaluates the covariance kernel of its
limiting Gaussian process, validates the convergence by Monte Carlo, and
offers a residual-based model-check test for external data.
"""

from .distributions import (
    Distribution,
    Empirical,
    Exponential,
    LorenzCurve,
    Moments,
    Normal,
    Uniform,
    load_values,
    parse_distribution,
)
from .errors import (
    ChainValidationError,
    ConfigError,
    DegenerateBridgeError,
    DegenerateDesignError,
    DomainError,
    EmpbridgeError,
    NonStochasticRowError,
    NumericError,
    PeriodicChainError,
    ReducibleChainError,
)
from .limit import (
    KernelGrid,
    SupStatisticSample,
    critical_values,
    kernel_matrix,
    kernel_value,
    sample_limit_path,
    sample_limit_paths,
    sample_sup_statistics,
    sup_statistic,
    write_critical_values_csv,
    write_kernel_csv,
)
from .montecarlo import (
    CHECK_NAMES,
    CheckRecord,
    McConfig,
    McReport,
    Metric,
    check_covariance,
    check_degenerate_chain_equivalence,
    check_lorenz_convergence,
    check_sigma_hat,
    check_supstat_distribution,
    check_variance_decay,
    run_suite,
)
from .noise import (
    MarkovChain,
    NoiseModel,
    composite_variance,
    load_transition,
    parse_transition,
    sample_noise,
    simulate_chain,
    stationary_distribution,
    validate_chain,
)
from .regression import (
    BridgePolygon,
    OlsFit,
    RegressionConfig,
    RegressionSample,
    ResidualProcess,
    empirical_bridge,
    empirical_lorenz,
    generate_sample,
    ols_fit,
    polygon_eval,
    random_polygon,
    read_xy_csv,
    residual_process,
    restrict_to_grid,
    write_bridge_csv,
    write_sample_csv,
)
from .cli import ModelCheckResult, RunConfig, main, model_check_test, parse_config

__version__ = "0.1.0"
