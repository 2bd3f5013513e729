"""Distribution families: quantile convention, moments, Lorenz curves."""

import math

import numpy as np
import pytest
from scipy import integrate

from empbridge import (
    ConfigError,
    DomainError,
    Empirical,
    Exponential,
    LorenzCurve,
    Normal,
    NumericError,
    Uniform,
    load_values,
    parse_distribution,
)

CONTINUOUS = [Uniform(0.0, 1.0), Uniform(-2.0, 5.0), Exponential(1.0), Exponential(0.4), Normal(0.0, 1.0), Normal(3.0, 2.5)]
ALL_DISTS = CONTINUOUS + [Empirical([3.0, 1.0, 2.0, 2.0]), Empirical([-1.0, 4.0])]


def quad_moment(dist, power):
    """Quadrature oracle for E xi^power = integral of quantile^power."""

    def f(s):
        s = min(max(s, 1e-13), 1.0 - 1e-14)
        return float(dist.quantile(s)) ** power

    val, err = integrate.quad(f, 0.0, 1.0, limit=500)
    assert err < 5e-7
    return val


def bisect_quantile(dist, s, lo, hi, tol=1e-11):
    """Bisection oracle: smallest x with F(x) >= s."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if dist.cdf(mid) >= s:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class TestQuantile:
    def test_uniform_identity(self):
        assert Uniform(0.0, 1.0).quantile(0.3) == 0.3

    def test_exponential_log2(self):
        q = Exponential(1.0).quantile(0.5)
        assert abs(q - math.log(2.0)) < 1e-12

    def test_exponential_vs_bisection_oracle(self):
        dist = Exponential(1.0)
        for s in (0.1, 0.5, 0.9):
            assert abs(dist.quantile(s) - bisect_quantile(dist, s, 0.0, 60.0)) < 1e-9

    def test_normal_vs_bisection_oracle(self):
        dist = Normal(1.0, 2.0)
        for s in (0.2, 0.5, 0.77):
            assert abs(dist.quantile(s) - bisect_quantile(dist, s, -40.0, 40.0)) < 1e-9

    def test_empirical_bernoulli_sup_convention(self):
        # sample [0, 1]: F(0) = 1/2, so {x : F(x) < 1/2} = (-inf, 0) and
        # the quantile at 1/2 is its supremum, 0.
        dist = Empirical([0.0, 1.0])
        assert dist.quantile(0.5) == 0.0
        # enumeration oracle over candidate points
        candidates = [-1.0, -0.5, 0.0, 0.5, 1.0]
        sup = max(c for c in candidates if dist.cdf(c) < 0.5)
        assert dist.quantile(0.5) == pytest.approx(sup, abs=0.5)
        assert dist.quantile(0.5 + 1e-12) == 1.0
        assert dist.quantile(1.0) == 1.0

    def test_empirical_grid_values(self):
        dist = Empirical([0.0, 0.0, 0.0, 1.0])
        assert dist.quantile(0.5) == 0.0
        assert dist.quantile(0.75) == 0.0
        assert dist.quantile(0.75 + 1e-9) == 1.0

    def test_vectorized_and_monotone(self):
        s = np.linspace(0.001, 0.999, 317)
        for dist in ALL_DISTS:
            q = dist.quantile(s)
            assert isinstance(q, np.ndarray) and q.shape == s.shape
            assert np.all(np.diff(q) >= 0.0)

    def test_domain_errors(self):
        dist = Uniform(0.0, 1.0)
        for bad in (0.0, -0.2, 1.0 + 1e-9, math.nan):
            with pytest.raises(DomainError):
                dist.quantile(bad)

    def test_s_equal_one(self):
        assert Uniform(2.0, 5.0).quantile(1.0) == 5.0
        assert Empirical([1.0, 9.0]).quantile(1.0) == 9.0
        with pytest.raises(DomainError):
            Exponential(1.0).quantile(1.0)
        with pytest.raises(DomainError):
            Normal(0.0, 1.0).quantile(1.0)


class TestSample:
    def test_uniform_range_and_reproducible(self):
        dist = Uniform(0.0, 1.0)
        a = dist.sample(5, np.random.default_rng(42))
        b = dist.sample(5, np.random.default_rng(42))
        assert a.shape == (5,)
        assert np.all((a > 0.0) & (a <= 1.0))
        assert np.array_equal(a, b)

    def test_exponential_lln(self):
        draws = Exponential(1.0).sample(100_000, np.random.default_rng(3))
        assert abs(draws.mean() - 1.0) < 0.02

    def test_degenerate_empirical(self):
        assert np.array_equal(Empirical([7.0]).sample(3, np.random.default_rng(0)), [7.0, 7.0, 7.0])

    def test_count_validation(self):
        with pytest.raises(DomainError):
            Uniform(0.0, 1.0).sample(0, np.random.default_rng(0))


class TestMoments:
    def test_uniform(self):
        m = Uniform(0.0, 1.0).moments()
        assert m.mean == 0.5
        assert abs(m.variance - 1.0 / 12.0) < 1e-15
        assert abs(m.second_moment - 1.0 / 3.0) < 1e-15

    def test_exponential(self):
        assert Exponential(1.0).moments() == (1.0, 1.0, 2.0)

    def test_normal(self):
        assert Normal(2.0, 3.0).moments() == (2.0, 9.0, 13.0)

    def test_empirical_divisor_n(self):
        m = Empirical([1.0, 2.0, 3.0]).moments()
        assert m.mean == 2.0
        assert abs(m.variance - 2.0 / 3.0) < 1e-12
        assert abs(m.second_moment - 14.0 / 3.0) < 1e-12

    def test_against_quadrature_oracle(self):
        for dist in CONTINUOUS:
            m = dist.moments()
            assert m.mean == pytest.approx(quad_moment(dist, 1), abs=1e-7)
            assert m.second_moment == pytest.approx(quad_moment(dist, 2), abs=1e-5)
            assert m.variance > 0.0


class TestLorenz:
    def test_uniform_half(self):
        curve = LorenzCurve(Uniform(0.0, 1.0))
        assert curve.gl(0.5) == 0.125
        assert curve.gl_centered(0.5) == -0.125

    def test_exponential_half(self):
        curve = LorenzCurve(Exponential(1.0))
        expect = 0.5 * math.log(0.5) + 0.5
        assert abs(curve.gl(0.5) - expect) < 1e-12
        assert abs(curve.gl(0.5) - 0.153426) < 1e-6
        assert abs(curve.gl_centered(0.5) - 0.5 * math.log(0.5)) < 1e-12

    def test_gl_zero_at_origin(self):
        for dist in ALL_DISTS:
            assert LorenzCurve(dist).gl(0.0) == 0.0

    def test_gl_one_is_mean(self):
        for dist in ALL_DISTS:
            assert LorenzCurve(dist).gl(1.0) == pytest.approx(dist.moments().mean, abs=1e-10)

    def test_centered_endpoints_bitwise_zero(self):
        for dist in ALL_DISTS:
            curve = LorenzCurve(dist)
            assert curve.gl_centered(0.0) == 0.0
            assert curve.gl_centered(1.0) == 0.0

    def test_centered_endpoints_quadrature_mode(self):
        curve = LorenzCurve(Exponential(1.0), mode="quadrature")
        assert curve.gl_centered(0.0) == 0.0
        assert curve.gl_centered(1.0) == 0.0

    def test_empirical_exact_piecewise(self):
        curve = LorenzCurve(Empirical([3.0, 1.0, 2.0]))
        assert abs(curve.gl(1.0 / 3.0) - 1.0 / 3.0) < 1e-12
        assert abs(curve.gl(0.5) - 2.0 / 3.0) < 1e-12
        assert curve.gl(1.0) == 2.0

    def test_closed_vs_quadrature_on_grid(self):
        t = np.linspace(0.0, 1.0, 101)
        for dist in (Uniform(0.0, 1.0), Exponential(1.0)):
            closed = LorenzCurve(dist)
            quad = LorenzCurve(dist, mode="quadrature")
            for ti in t:
                assert abs(closed.gl(ti) - quad.gl(ti)) <= 1e-8

    def test_normal_closed_vs_quadrature(self):
        dist = Normal(1.0, 2.0)
        closed = LorenzCurve(dist)
        quad = LorenzCurve(dist, mode="quadrature")
        for ti in (0.01, 0.3, 0.5, 0.77, 0.99):
            assert abs(closed.gl(ti) - quad.gl(ti)) <= 1e-8

    def test_monotone_for_nonnegative_support(self):
        t = np.linspace(0.0, 1.0, 200)
        for dist in (Uniform(0.0, 1.0), Exponential(2.0), Empirical([0.0, 1.0, 5.0])):
            vals = np.asarray(LorenzCurve(dist).gl(t))
            assert np.all(np.diff(vals) >= -1e-15)

    def test_cauchy_bunyakowsky_bound(self):
        rng = np.random.default_rng(7)
        pairs = rng.random((1000, 2))
        for dist in ALL_DISTS:
            curve = LorenzCurve(dist)
            ex2 = dist.moments().second_moment
            g1 = np.asarray(curve.gl(pairs[:, 0]))
            g2 = np.asarray(curve.gl(pairs[:, 1]))
            bound = np.sqrt(np.abs(pairs[:, 0] - pairs[:, 1]) * ex2) + 1e-12
            assert np.all(np.abs(g1 - g2) <= bound)

    def test_argument_validation(self):
        curve = LorenzCurve(Uniform(0.0, 1.0))
        with pytest.raises(DomainError):
            curve.gl(-0.1)
        with pytest.raises(DomainError):
            curve.gl(1.1)
        with pytest.raises(ConfigError):
            LorenzCurve(Uniform(0.0, 1.0), mode="magic")
        with pytest.raises(ConfigError):
            LorenzCurve(Uniform(0.0, 1.0), abs_tol=0.0)

    def test_quadrature_nonconvergence_reports_achieved(self):
        curve = LorenzCurve(Exponential(1.0), mode="quadrature", max_subdivisions=1)
        with pytest.raises(NumericError) as err:
            curve.gl(1.0)
        assert err.value.achieved is not None and err.value.achieved > 1e-8


class TestGaloisInvariant:
    def test_cdf_of_quantile(self):
        s = np.arange(1, 1000) / 1000.0
        for dist in CONTINUOUS:
            gap = np.abs(np.asarray(dist.cdf(dist.quantile(s))) - s)
            assert float(gap.max()) <= 1e-12


class TestConstruction:
    def test_invalid_parameters(self):
        with pytest.raises(DomainError):
            Uniform(1.0, 0.0)
        with pytest.raises(DomainError):
            Uniform(0.0, 0.0)
        with pytest.raises(DomainError):
            Exponential(0.0)
        with pytest.raises(DomainError):
            Exponential(-1.0)
        with pytest.raises(DomainError):
            Normal(0.0, 0.0)
        with pytest.raises(DomainError):
            Empirical([])
        with pytest.raises(DomainError):
            Empirical([1.0, math.inf])

    def test_empirical_sorted_storage(self):
        dist = Empirical([3.0, 1.0, 2.0])
        assert np.array_equal(dist.values, [1.0, 2.0, 3.0])


class TestParse:
    def test_families(self):
        assert isinstance(parse_distribution("uniform(0,1)"), Uniform)
        assert isinstance(parse_distribution("exp(2)"), Exponential)
        assert isinstance(parse_distribution("exponential(2)"), Exponential)
        assert isinstance(parse_distribution(" normal( 0 , 1 ) "), Normal)

    def test_parameters_land(self):
        dist = parse_distribution("uniform(-1,3)")
        assert (dist.lo, dist.hi) == (-1.0, 3.0)

    def test_empirical_from_file(self, tmp_path):
        path = tmp_path / "vals.csv"
        path.write_text("3\n1\n2\n")
        dist = parse_distribution(f"empirical({path})")
        assert isinstance(dist, Empirical)
        assert np.array_equal(dist.values, [1.0, 2.0, 3.0])

    def test_errors(self, tmp_path):
        for bad in ("uniform(1,0)", "banana(1)", "uniform(1)", "", "exp(zero)", "uniform 0 1"):
            with pytest.raises(ConfigError):
                parse_distribution(bad)
        garbage = tmp_path / "bad.csv"
        garbage.write_text("not,a,number\n")
        with pytest.raises(ConfigError):
            load_values(str(garbage))
        with pytest.raises(ConfigError):
            load_values(str(tmp_path / "missing.csv"))
