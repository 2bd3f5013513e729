"""Markov-modulated noise: chain validation, stationarity, sampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from empbridge import (
    ConfigError,
    DomainError,
    NoiseModel,
    NonStochasticRowError,
    PeriodicChainError,
    ReducibleChainError,
    composite_variance,
    parse_transition,
    sample_noise,
    simulate_chain,
    stationary_distribution,
    validate_chain,
)

DESK_P = [[0.9, 0.1], [0.2, 0.8]]


def power_iteration_pi(transition, iters=20_000):
    """Oracle: stationary vector by repeated multiplication."""
    p = np.asarray(transition, dtype=float)
    pi = np.full(p.shape[0], 1.0 / p.shape[0])
    for _ in range(iters):
        nxt = pi @ p
        if np.max(np.abs(nxt - pi)) < 1e-15:
            return nxt
        pi = nxt
    return pi


class TestValidate:
    def test_desk_matrix_accepted(self):
        chain = validate_chain(DESK_P)
        assert chain.state_count == 2
        assert chain.initial is None

    def test_single_state(self):
        chain = validate_chain([[1.0]])
        assert chain.state_count == 1

    def test_row_sum_violation(self):
        with pytest.raises(NonStochasticRowError) as err:
            validate_chain([[0.5, 0.4], [0.2, 0.8]])
        assert list(err.value.rows) == [1]

    def test_negative_entry(self):
        with pytest.raises(NonStochasticRowError):
            validate_chain([[1.2, -0.2], [0.2, 0.8]])

    def test_identity_reducible(self):
        with pytest.raises(ReducibleChainError):
            validate_chain([[1.0, 0.0], [0.0, 1.0]])

    def test_absorbing_state_reducible(self):
        with pytest.raises(ReducibleChainError) as err:
            validate_chain([[1.0, 0.0], [0.5, 0.5]])
        assert 2 in [int(s) for s in err.value.states]

    def test_two_cycle_periodic(self):
        with pytest.raises(PeriodicChainError) as err:
            validate_chain([[0.0, 1.0], [1.0, 0.0]])
        assert err.value.period == 2

    def test_three_cycle_periodic(self):
        p = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]
        with pytest.raises(PeriodicChainError) as err:
            validate_chain(p)
        assert err.value.period == 3

    def test_nonsquare_rejected(self):
        with pytest.raises(DomainError):
            validate_chain([[0.5, 0.5]])

    def test_initial_state_range(self):
        chain = validate_chain(DESK_P, initial=2)
        assert chain.initial == 2
        with pytest.raises(DomainError):
            validate_chain(DESK_P, initial=0)
        with pytest.raises(DomainError):
            validate_chain(DESK_P, initial=3)

    def test_transition_matrix_readonly(self):
        chain = validate_chain(DESK_P)
        with pytest.raises(ValueError):
            chain.transition[0, 0] = 0.0


class TestStationary:
    def test_desk_example(self):
        pi = stationary_distribution(validate_chain(DESK_P))
        assert np.allclose(pi, [2.0 / 3.0, 1.0 / 3.0], atol=1e-12)

    def test_symmetric_uniform(self):
        pi = stationary_distribution(validate_chain([[0.5, 0.5], [0.5, 0.5]]))
        assert np.allclose(pi, [0.5, 0.5], atol=1e-14)

    def test_single_state(self):
        assert np.array_equal(stationary_distribution(validate_chain([[1.0]])), [1.0])

    def test_power_iteration_oracle(self):
        mats = [
            DESK_P,
            [[0.1, 0.9], [0.9, 0.1]],
            [[0.5, 0.25, 0.25], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4]],
            [[0.05, 0.95], [0.5, 0.5]],
        ]
        for p in mats:
            pi = stationary_distribution(validate_chain(p))
            assert np.max(np.abs(pi - power_iteration_pi(p))) < 1e-12

    def test_fixed_point_and_simplex(self):
        for p in (DESK_P, [[0.2, 0.3, 0.5], [0.4, 0.4, 0.2], [0.25, 0.5, 0.25]]):
            pi = stationary_distribution(validate_chain(p))
            assert abs(pi.sum() - 1.0) < 1e-12
            assert np.all(pi > 0.0)
            assert np.max(np.abs(pi @ np.asarray(p) - pi)) < 1e-12


@st.composite
def primitive_matrices(draw):
    m = draw(st.integers(min_value=1, max_value=5))
    raw = draw(
        st.lists(
            st.lists(st.floats(min_value=0.05, max_value=1.0), min_size=m, max_size=m),
            min_size=m,
            max_size=m,
        )
    )
    p = np.asarray(raw)
    return p / p.sum(axis=1, keepdims=True)


class TestStationaryProperty:
    @settings(max_examples=60, deadline=None)
    @given(primitive_matrices())
    def test_pi_p_equals_pi(self, p):
        chain = validate_chain(p)
        pi = stationary_distribution(chain)
        assert np.max(np.abs(pi @ chain.transition - pi)) < 1e-10
        assert abs(pi.sum() - 1.0) < 1e-10


class TestSimulate:
    def test_single_state_all_ones(self):
        states = simulate_chain(validate_chain([[1.0]]), 10, np.random.default_rng(0))
        assert np.array_equal(states, np.ones(10, dtype=np.int64))

    def test_states_one_based(self):
        states = simulate_chain(validate_chain(DESK_P), 1000, np.random.default_rng(1))
        assert states.min() >= 1 and states.max() <= 2

    def test_initial_state_respected(self):
        chain = validate_chain(DESK_P, initial=2)
        for seed in range(5):
            states = simulate_chain(chain, 4, np.random.default_rng(seed))
            assert states[0] == 2

    def test_reproducible(self):
        chain = validate_chain(DESK_P)
        a = simulate_chain(chain, 50, np.random.default_rng(9))
        b = simulate_chain(chain, 50, np.random.default_rng(9))
        assert np.array_equal(a, b)

    def test_ergodic_frequencies(self):
        chain = validate_chain(DESK_P)
        states = simulate_chain(chain, 1_000_000, np.random.default_rng(12))
        freq = np.bincount(states, minlength=3)[1:] / states.size
        assert np.max(np.abs(freq - [2.0 / 3.0, 1.0 / 3.0])) < 0.005

    def test_transition_frequencies(self):
        # conditional one-step frequencies approximate the matrix rows
        chain = validate_chain(DESK_P)
        states = simulate_chain(chain, 500_000, np.random.default_rng(5))
        prev, nxt = states[:-1], states[1:]
        for i in (1, 2):
            sel = nxt[prev == i]
            p_hat = np.mean(sel == 1)
            assert abs(p_hat - chain.transition[i - 1, 0]) < 0.01

    def test_n_validation(self):
        with pytest.raises(DomainError):
            simulate_chain(validate_chain(DESK_P), 0, np.random.default_rng(0))


class TestNoiseModel:
    def test_families(self):
        chain = validate_chain(DESK_P)
        for family in ("gaussian", "uniform", "rademacher"):
            NoiseModel(chain, [1.0, 2.0], family=family)
        with pytest.raises(ConfigError):
            NoiseModel(chain, [1.0, 2.0], family="cauchy")

    def test_sd_length_mismatch(self):
        with pytest.raises(DomainError):
            NoiseModel(validate_chain(DESK_P), [1.0])

    def test_all_zero_sd_rejected(self):
        with pytest.raises(DomainError):
            NoiseModel(validate_chain(DESK_P), [0.0, 0.0])

    def test_negative_sd_rejected(self):
        with pytest.raises(DomainError):
            NoiseModel(validate_chain(DESK_P), [1.0, -1.0])

    def test_single_zero_sd_allowed(self):
        model = NoiseModel(validate_chain(DESK_P), [0.0, 1.0])
        states = np.ones(100, dtype=np.int64)
        eps = sample_noise(model, states, np.random.default_rng(0))
        assert np.array_equal(eps, np.zeros(100))


class TestSampleNoise:
    def test_state_scaling_variance(self):
        model = NoiseModel(validate_chain(DESK_P), [1.0, 2.0])
        rng = np.random.default_rng(21)
        n = 200_000
        states = np.concatenate([np.ones(n, dtype=np.int64), np.full(n, 2, dtype=np.int64)])
        eps = sample_noise(model, states, rng)
        v1 = float(np.var(eps[:n]))
        v2 = float(np.var(eps[n:]))
        assert abs(v1 - 1.0) / 1.0 < 0.03
        assert abs(v2 - 4.0) / 4.0 < 0.03

    def test_uniform_family_moments_and_support(self):
        model = NoiseModel(validate_chain([[1.0]]), [2.0], family="uniform")
        eps = sample_noise(model, np.ones(200_000, dtype=np.int64), np.random.default_rng(3))
        assert np.max(np.abs(eps)) <= 2.0 * np.sqrt(3.0) + 1e-12
        assert abs(np.var(eps) - 4.0) / 4.0 < 0.03
        assert abs(np.mean(eps)) < 0.02

    def test_rademacher_support(self):
        model = NoiseModel(validate_chain([[1.0]]), [1.5], family="rademacher")
        eps = sample_noise(model, np.ones(10_000, dtype=np.int64), np.random.default_rng(4))
        assert set(np.unique(eps)) == {-1.5, 1.5}

    def test_mixture_variance_matches_composite(self):
        chain = validate_chain(DESK_P)
        model = NoiseModel(chain, [1.0, 2.0])
        rng = np.random.default_rng(8)
        states = simulate_chain(chain, 400_000, rng)
        eps = sample_noise(model, states, rng)
        assert abs(np.var(eps) - composite_variance(model)) / composite_variance(model) < 0.03

    def test_lag_one_independence(self):
        # noise draws are conditionally independent given states, so for
        # equal sds the lag-1 autocovariance vanishes even though the
        # modulating chain is dependent
        chain = validate_chain(DESK_P)
        model = NoiseModel(chain, [1.5, 1.5])
        rng = np.random.default_rng(17)
        states = simulate_chain(chain, 400_000, rng)
        eps = sample_noise(model, states, rng)
        lag_cov = float(np.mean(eps[:-1] * eps[1:]))
        se = float(np.std(eps[:-1] * eps[1:])) / np.sqrt(eps.size - 1.0)
        assert abs(lag_cov) < 5.0 * se

    def test_state_bounds_checked(self):
        model = NoiseModel(validate_chain(DESK_P), [1.0, 2.0])
        with pytest.raises(DomainError):
            sample_noise(model, np.array([1, 3], dtype=np.int64), np.random.default_rng(0))
        with pytest.raises(DomainError):
            sample_noise(model, np.array([0, 1], dtype=np.int64), np.random.default_rng(0))


class TestCompositeVariance:
    def test_desk_value(self):
        model = NoiseModel(validate_chain(DESK_P), [1.0, 2.0])
        # 1 * 2/3 + 4 * 1/3 = 2
        assert abs(composite_variance(model) - 2.0) < 1e-12

    def test_symmetric_value(self):
        model = NoiseModel(validate_chain([[0.5, 0.5], [0.5, 0.5]]), [1.0, 2.0])
        assert abs(composite_variance(model) - 2.5) < 1e-12

    def test_uniform_family_same_composite(self):
        chain = validate_chain(DESK_P)
        g = NoiseModel(chain, [1.0, 2.0], family="gaussian")
        u = NoiseModel(chain, [1.0, 2.0], family="uniform")
        assert composite_variance(g) == composite_variance(u)

    def test_single_state(self):
        model = NoiseModel(validate_chain([[1.0]]), [1.5])
        assert abs(composite_variance(model) - 2.25) < 1e-15


class TestParseTransition:
    def test_inline_rows(self):
        p = parse_transition("0.9,0.1;0.2,0.8")
        assert np.allclose(p, DESK_P)

    def test_single_entry(self):
        assert np.array_equal(parse_transition("1"), [[1.0]])

    def test_whitespace_tolerated(self):
        p = parse_transition(" 0.9 , 0.1 ; 0.2 , 0.8 ")
        assert np.allclose(p, DESK_P)

    def test_errors(self):
        for bad in ("", "0.9,0.1;0.2", "a,b;c,d", ";"):
            with pytest.raises(ConfigError):
                parse_transition(bad)

    def test_ragged_rejected(self):
        with pytest.raises(ConfigError):
            parse_transition("0.5,0.5;1")
