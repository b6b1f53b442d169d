import math

import numpy as np
import pytest
from scipy.special import lambertw

from smtpcfg.coverage import (
    CoverageQuery,
    critical_epsilon,
    exponential_schedule,
    gaussian_schedule,
    lambert_w0,
    miss_probability_bound,
    uniform_schedule,
    validate_coverage_bound,
)
from smtpcfg.errors import DomainError, InvalidDistribution, InvalidParameters

GRID = [-0.35, -0.1, 0.0, 0.5, 1.0, 10.0, 1e6]


def fixed_point_w(x):
    # independent oracle: Newton on w e^w = x in extended precision steps
    w = 1.0 if x > 0 else 0.0
    for _ in range(200):
        w = (w * w + x * math.exp(-w)) / (w + 1)
    return w


class TestLambertW:
    def test_values(self):
        assert lambert_w0(0) == 0
        assert lambert_w0(math.e) == pytest.approx(1.0, abs=1e-15)
        assert lambert_w0(1) == pytest.approx(0.5671432904, abs=1e-10)
        assert lambert_w0(1) == pytest.approx(fixed_point_w(1.0), abs=1e-12)

    @pytest.mark.parametrize("x", GRID + [-1 / math.e, -0.3678, 1e-300, 1e300])
    def test_residual(self, x):
        w = lambert_w0(x)
        if x < 1e300:
            assert abs(w * math.exp(w) - x) <= 1e-10 * max(1.0, abs(x))
        if x > -1 / math.e:
            assert w == pytest.approx(lambertw(x).real, rel=1e-9, abs=1e-7)
        assert w >= -1

    def test_domain(self):
        with pytest.raises(DomainError):
            lambert_w0(-0.5)


class TestBound:
    def test_values(self):
        assert miss_probability_bound(CoverageQuery(10, 2.0, 0.0)) == 1.0
        assert miss_probability_bound(CoverageQuery(100, 0.0, 0.1)) == pytest.approx(4.53999e-5, rel=1e-5)
        assert miss_probability_bound(CoverageQuery(200, 3.0, 0.1)) == pytest.approx(0.082085, abs=1e-6)

    def test_invalid(self):
        with pytest.raises(InvalidParameters):
            CoverageQuery(0, 1.0, 0.5)


class TestCriticalEpsilon:
    def test_at_n_equals_two_to_h(self):
        assert critical_epsilon(8, 3).exact == pytest.approx(0.5671433, abs=1e-6)
        assert critical_epsilon(8, 3).asymptotic is None

    def test_n_1000(self):
        ce = critical_epsilon(1000, 0)
        assert ce.exact == pytest.approx(lambertw(1000).real / 1000, rel=1e-12)
        assert abs(math.exp(-1000 * ce.exact) - ce.exact) <= 1e-9

    @pytest.mark.parametrize("n,h", [(1, 0), (5, 2.5), (64, 6), (10**4, 3), (10**6, 0.5)])
    def test_fixed_point(self, n, h):
        e = critical_epsilon(n, h).exact
        assert abs(math.exp(-n * e / 2**h) - e) <= 1e-9

    def test_decreasing_in_n(self):
        vals = [critical_epsilon(n, 2.0).exact for n in range(1, 400)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_asymptote(self):
        # W(r) / ln r = 1 - ln ln r / ln r + ..., so the ratio creeps toward 1
        ratios = [critical_epsilon(4 * 10**k, 2) for k in (2, 6, 12, 40, 200)]
        ratios = [c.exact / c.asymptotic for c in ratios]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))
        assert ratios[1] == pytest.approx(0.8238, abs=1e-3)
        assert ratios[3] == pytest.approx(1.0, abs=0.1)


class TestSchedules:
    def test_gaussian_peak(self):
        s = gaussian_schedule(10)
        assert s.values[5] == 1.5
        assert gaussian_schedule(10, sigma=2).values[0] == pytest.approx(0.1 + 1.4 * math.exp(-25 / 8), abs=1e-12)
        assert gaussian_schedule(10, sigma=2).values[0] == pytest.approx(0.16152, abs=1e-5)

    def test_constant(self):
        assert set(gaussian_schedule(7, 0.4, 0.4).values) == {0.4}

    def test_exponential(self):
        assert exponential_schedule(3, math.log(2)).values == pytest.approx((1.5, 0.8, 0.45))
        s = exponential_schedule(5, 50.0)
        assert s.values[0] == 1.5 and all(v == pytest.approx(0.1) for v in s.values[1:])

    @pytest.mark.parametrize("n", [1, 2, 9, 100])
    def test_ranges(self, n):
        e = exponential_schedule(n, 0.3).values
        assert all(b < a for a, b in zip(e, e[1:]))
        for s in (gaussian_schedule(n), exponential_schedule(n, 0.3), uniform_schedule(n)):
            assert len(s.values) == n and all(0.1 <= v <= 1.5 for v in s.values)

    def test_invalid(self):
        with pytest.raises(InvalidParameters):
            exponential_schedule(3, 0.0)
        with pytest.raises(InvalidParameters):
            gaussian_schedule(3, tau_min=1.0, tau_max=0.5)

    def test_csv(self):
        assert exponential_schedule(2, 1.0).to_csv().splitlines()[:2] == ["index,temperature", "0,1.500000"]


class TestValidator:
    def test_full_region(self):
        v = validate_coverage_bound([0.25] * 4, range(4), 5, 2000)
        assert v.empirical_miss_rate == 0 and v.holds
        assert v.bound == pytest.approx(math.exp(-5 / 4))

    def test_empty_region(self):
        v = validate_coverage_bound([0.5, 0.5], [], 5, 2000)
        assert (v.empirical_miss_rate, v.bound, v.holds) == (1.0, 1.0, True)

    def test_uniform_eight(self):
        v = validate_coverage_bound([1 / 8] * 8, [0], 16, 20000, seed=5)
        assert v.exact_miss == pytest.approx(0.875**16) and 0.875**16 == pytest.approx(0.11801, abs=1e-4)
        assert v.exact_miss <= v.bound == pytest.approx(math.exp(-0.25))
        assert v.in_regime and v.holds

    def test_random_cases_in_regime(self):
        r = np.random.default_rng(0)
        for _ in range(15):
            k = int(r.integers(2, 10))
            p = r.dirichlet(np.ones(k))
            region = list(np.flatnonzero(r.random(k) < 0.4))
            n = int(r.integers(1, 60))
            v = validate_coverage_bound(p, region, n, 2000, seed=int(r.integers(1e9)))
            if v.in_regime:
                assert v.holds and v.exact_miss <= v.bound + 1e-12

    def test_invalid(self):
        with pytest.raises(InvalidDistribution):
            validate_coverage_bound([0.5, 0.4], [0], 3)
