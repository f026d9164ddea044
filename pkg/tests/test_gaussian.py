import math

import numpy as np
import pytest

from max3section.gaussian import gamma_cdf, gamma_dcorr, gamma_dq1, phi, phi_inv

# Frozen oracle values, computed with 40-digit mpmath quadrature of the
# bivariate density (dblquad reduced to a 1-D integral of npdf * ncdf).
GAMMA_ORACLE = [
    (0.2, 0.3, 0.7, 0.2335816097675208688921),
    (0.5, 0.4, 0.6, 0.3161934419904090547125),
    (-0.35, 0.15, 0.8, 0.09350569185698794966995),
    (0.9, 0.55, 0.25, 0.2474339799896185604852),
]

PHI_AT_ONE = 0.84134474606854294859  # mpmath ncdf(1), 20 digits


class TestPhi:
    def test_median(self):
        assert phi(0.0) == pytest.approx(0.5, abs=1e-16)

    def test_limits(self):
        assert phi(math.inf) == 1.0
        assert phi(-math.inf) == 0.0

    def test_against_quadrature_oracle(self):
        assert abs(phi(1.0) - PHI_AT_ONE) <= 1e-15

    def test_tails_monotone(self):
        xs = np.linspace(-9, 9, 200)
        vals = [phi(x) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


class TestPhiInv:
    def test_median(self):
        assert phi_inv(0.5) == 0.0

    def test_limit_conventions(self):
        assert phi_inv(0.0) == -math.inf
        assert phi_inv(1.0) == math.inf

    def test_inverse_of_phi_oracle(self):
        assert phi_inv(PHI_AT_ONE) == pytest.approx(1.0, abs=1e-9)

    def test_round_trip(self):
        qs = [1e-300, 1e-15, 1e-9, 0.01, 0.3, 0.5, 0.77, 0.999, 1 - 1e-15]
        for q in qs:
            assert phi(phi_inv(q)) == pytest.approx(q, abs=1e-12)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            phi_inv(-0.1)
        with pytest.raises(ValueError):
            phi_inv(1.5)


class TestGammaCdf:
    def test_independence_product(self):
        assert gamma_cdf(0.0, 0.3, 0.4) == pytest.approx(0.12, abs=1e-9)

    def test_comonotone_min(self):
        assert gamma_cdf(1.0, 0.3, 0.4) == pytest.approx(0.3, abs=1e-9)

    def test_antithetic(self):
        assert gamma_cdf(-1.0, 0.7, 0.6) == pytest.approx(0.3, abs=1e-9)
        assert gamma_cdf(-1.0, 0.2, 0.3) == 0.0

    def test_arcsin_identity_at_medians(self):
        assert gamma_cdf(0.5, 0.5, 0.5) == pytest.approx(1.0 / 3.0, abs=1e-9)

    def test_boundary_conventions(self):
        assert gamma_cdf(0.3, 0.0, 0.8) == 0.0
        assert gamma_cdf(0.3, 1.0, 0.8) == pytest.approx(0.8, abs=0)
        assert gamma_cdf(-0.9, 0.8, 1.0) == pytest.approx(0.8, abs=0)

    def test_against_quadrature_oracle(self):
        for t, q1, q2, want in GAMMA_ORACLE:
            assert gamma_cdf(t, q1, q2) == pytest.approx(want, abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(20240817)
        for _ in range(1000):
            t = rng.uniform(-1, 1)
            q1, q2 = rng.uniform(size=2)
            assert abs(gamma_cdf(t, q1, q2) - gamma_cdf(t, q2, q1)) <= 1e-12

    def test_monotone_in_correlation(self):
        for q1, q2 in [(0.2, 0.9), (0.5, 0.5), (0.33, 0.71), (0.05, 0.95)]:
            ts = np.linspace(-1, 1, 101)
            vals = [gamma_cdf(t, q1, q2) for t in ts]
            diffs = np.diff(vals)
            assert diffs.min() >= -1e-12

    def test_reflection_identity_monte_carlo(self):
        # P[X >= quantile^-1(1-q1), Y >= quantile^-1(1-q2)] == gamma(t, q1, q2)
        rng = np.random.default_rng(7)
        n = 10**6
        for t, q1, q2 in [(0.4, 0.35, 0.6), (-0.6, 0.5, 0.2)]:
            z = rng.standard_normal((n, 2))
            x = z[:, 0]
            y = t * z[:, 0] + math.sqrt(1 - t * t) * z[:, 1]
            hits = np.count_nonzero(
                (x >= phi_inv(1 - q1)) & (y >= phi_inv(1 - q2)))
            p_hat = hits / n
            sigma = math.sqrt(p_hat * (1 - p_hat) / n)
            assert abs(p_hat - gamma_cdf(t, q1, q2)) <= 4 * sigma

    def test_upper_bound_cap(self):
        # gamma(t, 1-q1, 1-q2) <= (1-q1)(1-q2) + min(2|t|, q1(1-q2), q2(1-q1))
        rng = np.random.default_rng(99)
        for _ in range(2000):
            t = rng.uniform(-1, 1)
            q1, q2 = rng.uniform(size=2)
            lhs = gamma_cdf(t, 1 - q1, 1 - q2)
            cap = (1 - q1) * (1 - q2) + min(
                2 * abs(t), q1 * (1 - q2), q2 * (1 - q1))
            assert lhs <= cap + 1e-10


def central_diff(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


class TestGammaDerivatives:
    def test_dcorr_closed_cases(self):
        assert gamma_dcorr(0.0, 0.5, 0.5) == pytest.approx(
            1.0 / (2 * math.pi), rel=1e-14)
        assert gamma_dcorr(0.3, 0.5, 0.5) == pytest.approx(
            1.0 / (2 * math.pi * math.sqrt(0.91)), rel=1e-14)

    def test_dcorr_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            t = rng.uniform(-0.99, 0.99)
            q1, q2 = rng.uniform(0.01, 0.99, size=2)
            assert gamma_dcorr(t, q1, q2) >= 0.0

    def test_dcorr_finite_difference_example(self):
        fd = central_diff(lambda t: gamma_cdf(t, 0.3, 0.7), 0.2, 1e-5)
        assert gamma_dcorr(0.2, 0.3, 0.7) == pytest.approx(fd, rel=1e-5)

    def test_dq1_independence(self):
        assert gamma_dq1(0.0, 0.3, 0.4) == pytest.approx(0.4, abs=1e-14)
        assert gamma_dq1(0.0, 0.9, 0.5) == pytest.approx(0.5, abs=1e-14)

    def test_dq1_finite_difference_example(self):
        fd = central_diff(lambda q: gamma_cdf(0.5, q, 0.6), 0.4, 1e-5)
        assert gamma_dq1(0.5, 0.4, 0.6) == pytest.approx(fd, rel=1e-5)

    def test_dq1_in_unit_interval(self):
        rng = np.random.default_rng(4)
        for _ in range(500):
            t = rng.uniform(-0.99, 0.99)
            q1, q2 = rng.uniform(0.001, 0.999, size=2)
            assert 0.0 <= gamma_dq1(t, q1, q2) <= 1.0

    def test_singular_correlation_rejected(self):
        with pytest.raises(ValueError):
            gamma_dcorr(1.0, 0.5, 0.5)
        with pytest.raises(ValueError):
            gamma_dq1(-1.0, 0.5, 0.5)

    @pytest.mark.parametrize("which", ["dcorr", "dq1"])
    def test_500_random_interior_points_match_finite_differences(self, which):
        # Interior band where the step-1e-5 central difference resolves the
        # derivative to relative 1e-4 (its cancellation noise is ~1e-10).
        rng = np.random.default_rng(20240817 if which == "dcorr" else 20240818)
        h = 1e-5
        for _ in range(500):
            t = rng.uniform(-0.8, 0.8)
            q1, q2 = rng.uniform(0.1, 0.9, size=2)
            if which == "dcorr":
                got = gamma_dcorr(t, q1, q2)
                fd = central_diff(lambda s: gamma_cdf(s, q1, q2), t, h)
            else:
                got = gamma_dq1(t, q1, q2)
                fd = central_diff(lambda q: gamma_cdf(t, q, q2), q1, h)
            assert abs(got - fd) / abs(fd) <= 1e-4

    @pytest.mark.parametrize("which", ["dcorr", "dq1"])
    def test_tail_points_match_finite_differences_absolutely(self, which):
        rng = np.random.default_rng(11 if which == "dcorr" else 12)
        h = 1e-5
        for _ in range(300):
            t = rng.uniform(-0.95, 0.95)
            q1, q2 = rng.uniform(0.02, 0.98, size=2)
            if which == "dcorr":
                got = gamma_dcorr(t, q1, q2)
                fd = central_diff(lambda s: gamma_cdf(s, q1, q2), t, h)
            else:
                got = gamma_dq1(t, q1, q2)
                fd = central_diff(lambda q: gamma_cdf(t, q, q2), q1, h)
            assert abs(got - fd) <= 1e-8
