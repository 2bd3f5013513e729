"""Markov-modulated noise: the driving chain and per-state noise laws.

The chain V is a finite irreducible aperiodic Markov chain started from
its stationary distribution (or a fixed state).  Observation i receives
noise sigma_{V_i} * e_i where the e_i are i.i.d. zero-mean unit-variance
draws from a base family, independent of the chain.  The composite
variance sigma^2 = sum_v sigma_v^2 pi_v is the long-run noise variance.
"""

from __future__ import annotations

import bisect
import math

import numpy as np

from .errors import (
    ChainValidationError,
    ConfigError,
    DomainError,
    NonStochasticRowError,
    PeriodicChainError,
    ReducibleChainError,
)

__all__ = [
    "MarkovChain",
    "NoiseModel",
    "validate_chain",
    "stationary_distribution",
    "simulate_chain",
    "sample_noise",
    "composite_variance",
    "load_transition",
    "parse_transition",
]

_ROW_SUM_TOL = 1e-12
_NOISE_FAMILIES = ("gaussian", "uniform", "rademacher")


class MarkovChain:
    """Validated irreducible aperiodic chain on states {1..M}.

    Construct through :func:`validate_chain`; instances are immutable.
    ``initial`` is a fixed 1-based state, or None for the stationary
    distribution.
    """

    def __init__(self, transition: np.ndarray, initial: int | None):
        self.transition = transition
        self.transition.setflags(write=False)
        self.state_count = transition.shape[0]
        self.initial = initial

    def __repr__(self) -> str:
        start = "stationary" if self.initial is None else f"state {self.initial}"
        return f"MarkovChain(M={self.state_count}, initial={start})"


def validate_chain(transition, initial: int | None = None) -> MarkovChain:
    """Validate a transition matrix and wrap it as a MarkovChain.

    Accepts iff every row is a probability vector (sum within 1e-12 of 1,
    entries in [0, 1]) and the chain is irreducible and aperiodic,
    established via strict positivity of P^k for some k (checked by
    squaring the positivity pattern, which is monotone for stochastic P).
    Rejections name the offending rows or states.
    """
    P = np.asarray(transition, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise DomainError("transition matrix must be square and non-empty")
    if not np.all(np.isfinite(P)):
        raise DomainError("transition matrix entries must be finite")
    M = P.shape[0]

    bad_rows = [
        i + 1
        for i in range(M)
        if np.any(P[i] < 0.0)
        or np.any(P[i] > 1.0)
        or abs(float(P[i].sum()) - 1.0) > _ROW_SUM_TOL
    ]
    if bad_rows:
        raise NonStochasticRowError(bad_rows)

    if initial is not None:
        initial = int(initial)
        if not 1 <= initial <= M:
            raise DomainError(f"initial state must lie in 1..{M}, got {initial}")

    pattern = (P > 0.0).astype(np.int64)
    if not _is_primitive(pattern):
        unreached = _non_communicating_states(pattern)
        if unreached:
            raise ReducibleChainError(unreached)
        raise PeriodicChainError(_period(pattern))

    return MarkovChain(P.copy(), initial)


def _is_primitive(pattern: np.ndarray) -> bool:
    # positivity of stochastic P^k is monotone in k, so squaring the
    # pattern up past the Wielandt exponent M^2 decides primitivity.
    M = pattern.shape[0]
    B = pattern.copy()
    steps = max(1, math.ceil(math.log2(M * M)) + 1) if M > 1 else 1
    for _ in range(steps):
        if B.all():
            return True
        B = (B @ B > 0).astype(np.int64)
    return bool(B.all())


def _reachable(pattern: np.ndarray, start: int) -> np.ndarray:
    M = pattern.shape[0]
    seen = np.zeros(M, dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.nonzero(pattern[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    nxt.append(int(v))
        frontier = nxt
    return seen


def _non_communicating_states(pattern: np.ndarray) -> list[int]:
    forward = _reachable(pattern, 0)
    backward = _reachable(pattern.T, 0)
    return [i + 1 for i in np.nonzero(~(forward & backward))[0]]


def _period(pattern: np.ndarray) -> int:
    # gcd of (d[u] + 1 - d[v]) over edges u->v, with d the BFS levels from
    # state 1; valid once the chain is known to be irreducible.
    M = pattern.shape[0]
    depth = np.full(M, -1, dtype=np.int64)
    depth[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.nonzero(pattern[u])[0]:
                if depth[v] < 0:
                    depth[v] = depth[u] + 1
                    nxt.append(int(v))
        frontier = nxt
    g = 0
    for u in range(M):
        for v in np.nonzero(pattern[u])[0]:
            g = math.gcd(g, int(depth[u] + 1 - depth[v]))
    return g


def stationary_distribution(chain: MarkovChain) -> np.ndarray:
    """Solve pi P = pi, sum pi = 1 as a linear system.

    One balance equation is replaced by the normalization row.  A
    singular or inconsistent solve (a structural defect that slipped past
    validation) raises ChainValidationError.
    """
    P = chain.transition
    M = chain.state_count
    A = P.T - np.eye(M)
    A[-1, :] = 1.0
    b = np.zeros(M)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise ChainValidationError(f"stationary solve failed: {exc}") from exc
    residual = float(np.max(np.abs(pi @ P - pi)))
    if residual > 1e-10 or np.any(pi <= 0.0):
        raise ChainValidationError(
            f"stationary solve inconsistent (residual {residual:g}, min "
            f"entry {float(pi.min()):g})"
        )
    return pi


def _cumulative(probabilities: np.ndarray) -> tuple[float, ...]:
    cum = np.cumsum(probabilities)
    cum[-1] = 1.0  # force exact 1 so u < 1 can never overflow the index
    return tuple(cum)


def simulate_chain(chain: MarkovChain, n: int, rng: np.random.Generator) -> np.ndarray:
    """Simulate V_1..V_n (1-based states), one uniform per step."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    u = rng.random(n)
    M = chain.state_count
    if M == 1:
        return np.ones(n, dtype=np.int64)
    if chain.initial is None:
        cum_init = _cumulative(stationary_distribution(chain))
    else:
        one_hot = np.zeros(M)
        one_hot[chain.initial - 1] = 1.0
        cum_init = _cumulative(one_hot)
    cum_rows = [_cumulative(row) for row in chain.transition]

    states = np.empty(n, dtype=np.int64)
    prev = bisect.bisect_right(cum_init, u[0])
    states[0] = prev
    for i in range(1, n):
        prev = bisect.bisect_right(cum_rows[prev], u[i])
        states[i] = prev
    return states + 1


class NoiseModel:
    """Per-state scaled noise riding on a Markov chain.

    ``state_sd[v-1]`` scales the base draw when the chain sits in state
    v.  The base family is zero-mean unit-variance: standard Gaussian,
    centered uniform on [-sqrt(3), sqrt(3)], or Rademacher.
    """

    def __init__(self, chain: MarkovChain, state_sd, family: str = "gaussian"):
        sd = np.asarray(state_sd, dtype=float).ravel()
        if sd.size != chain.state_count:
            raise DomainError(
                f"state_sd must have length {chain.state_count}, got {sd.size}"
            )
        if not np.all(np.isfinite(sd)) or np.any(sd < 0.0):
            raise DomainError("state_sd entries must be finite and nonnegative")
        if not np.any(sd > 0.0):
            raise DomainError("at least one state must have positive noise scale")
        if family not in _NOISE_FAMILIES:
            raise ConfigError(
                f"unknown noise family {family!r}; expected one of {_NOISE_FAMILIES}"
            )
        self.chain = chain
        self.state_sd = sd
        self.state_sd.setflags(write=False)
        self.family = family

    def __repr__(self) -> str:
        return (
            f"NoiseModel(M={self.chain.state_count}, sd={self.state_sd.tolist()}, "
            f"family={self.family!r})"
        )


def _base_draws(family: str, count: int, rng: np.random.Generator) -> np.ndarray:
    if family == "gaussian":
        return rng.standard_normal(count)
    if family == "uniform":
        return (rng.random(count) - 0.5) * math.sqrt(12.0)
    return rng.integers(0, 2, size=count).astype(float) * 2.0 - 1.0


def sample_noise(
    model: NoiseModel, states: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Draw eps_i = sigma_{states[i]} * e_i with i.i.d. unit-variance e."""
    idx = np.asarray(states, dtype=np.int64) - 1
    if idx.size == 0:
        raise DomainError("states must be non-empty")
    if np.any(idx < 0) or np.any(idx >= model.chain.state_count):
        raise DomainError("states must lie in 1..M for the model's chain")
    base = _base_draws(model.family, idx.size, rng)
    return model.state_sd[idx] * base


def composite_variance(model: NoiseModel) -> float:
    """sigma^2 = sum_v sigma_v^2 pi_v under the stationary distribution."""
    pi = stationary_distribution(model.chain)
    return float(np.dot(model.state_sd * model.state_sd, pi))


def parse_transition(text: str) -> np.ndarray:
    """Parse an inline transition matrix, rows split by ';'."""
    try:
        rows = [
            [float(cell) for cell in row.split(",")]
            for row in text.split(";")
            if row.strip()
        ]
    except ValueError as exc:
        raise ConfigError(f"non-numeric transition entry in {text!r}") from exc
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ConfigError(f"transition {text!r} must be square (rows split by ';')")
    return np.asarray(rows, dtype=float)


def load_transition(path: str) -> np.ndarray:
    """Read an MxM transition matrix from CSV (M rows of M probabilities)."""
    try:
        P = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read transition file {path!r}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(
            f"transition file {path!r} must hold rows of comma-separated "
            f"probabilities: {exc}"
        ) from exc
    return P
