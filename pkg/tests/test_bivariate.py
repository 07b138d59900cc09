import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from sntail import bivariate as bv
from sntail.bivariate import (
    BivSkewNormalLaw,
    biv_pdf,
    derive_params,
    joint_diag_log_cdf,
    joint_diag_tail_asymptotic,
    sample,
    sample_z_star,
)
from sntail.errors import ConvergenceError, DomainError, UnsupportedBranchError
from sntail.univariate import SkewNormalLaw, log_cdf_batch, marginal_lambda, sn_cdf

# log P(X1 <= x, X2 <= x) by rate-scaled 2-D mpmath quadrature of the density (25 digits)
JOINT_REF = {
    (1.0, 0.0, -1.0): -8.658759446711523,
    (-1.0, 0.5, -2.0): -4.8151668380329,
    (0.5, 0.5, -4.0): -25.26052591004067,
    (1.0, 0.0, -3.0): -35.36602049668353,
    (2.0, -0.3, -2.0): -47.76235692227485,
}

GRID_LAWS = [(1, 0), (1, 0.5), (-1, 0), (-1, 0.5), (2, -0.3)]
GRID_X = [-4, -2, -1, 0, 1]

thetas = st.floats(-4.0, 4.0)
rhos = st.floats(-0.95, 0.95)


class TestParameters:
    def test_reference_law(self):
        law = derive_params(1.0, 0.0)
        assert law.lam == pytest.approx(1 / math.sqrt(2), rel=1e-15)
        assert law.alpha == pytest.approx(1 / math.sqrt(3), rel=1e-15)
        assert law.beta == pytest.approx(math.sqrt(3), rel=1e-15)
        assert np.allclose(law.psi_matrix, [[2 / 3, -1 / 3], [-1 / 3, 2 / 3]], atol=1e-15)
        assert law.alpha**2 * (1 + law.lam**2) == pytest.approx(0.5, rel=1e-15)

    @pytest.mark.parametrize("rho", [-0.6, 0.0, 0.4])
    def test_zero_skew(self, rho):
        law = derive_params(0.0, rho)
        assert law.alpha == 0.0 and law.lam == 0.0
        assert np.array_equal(law.psi_matrix, [[1, rho], [rho, 1]])
        assert law.beta == pytest.approx(math.sqrt((1 - rho) / (1 + rho)), rel=1e-15)

    @given(thetas, rhos)
    def test_mixture_identity(self, theta, rho):
        law = BivSkewNormalLaw(theta, rho)
        assert law.alpha**2 * (1 + law.lam**2) == pytest.approx(law.lam**2, rel=1e-12, abs=1e-300)
        assert law.lam == pytest.approx(marginal_lambda(theta, rho), rel=1e-15)

    @given(thetas.filter(lambda t: abs(t) > 1e-3), rhos)
    def test_max_shape_matches_z_star_correlation(self, theta, rho):
        law = BivSkewNormalLaw(theta, rho)
        r = law.z_star_corr
        assert law.beta**2 == pytest.approx((1 - r) / (1 + r), rel=1e-10)
        q = theta**2 * (1 - rho**2)
        assert r == pytest.approx((rho - q) / (1 + q), rel=1e-10, abs=1e-12)
        assert law.scale > 0

    def test_invalid(self):
        with pytest.raises(DomainError):
            BivSkewNormalLaw(1.0, 1.0)
        with pytest.raises(DomainError):
            BivSkewNormalLaw(float("inf"), 0.0)


class TestDensity:
    def test_zero_skew_is_normal(self):
        law = BivSkewNormalLaw(0.0, 0.4)
        mvn = stats.multivariate_normal([0, 0], [[1, 0.4], [0.4, 1]])
        for x1, x2 in [(0, 0), (-1, 2), (1.5, 0.3)]:
            assert biv_pdf(law, x1, x2) == pytest.approx(mvn.pdf([x1, x2]), rel=1e-13)

    def test_exchangeable(self):
        law = BivSkewNormalLaw(1.0, 0.5)
        g = np.linspace(-2, 2, 5)
        a, b = np.meshgrid(g, g)
        assert np.array_equal(biv_pdf(law, a, b), biv_pdf(law, b, a))

    def test_normalized(self):
        law = BivSkewNormalLaw(-1.0, 0.3)
        total, _ = integrate.dblquad(lambda y, x: biv_pdf(law, x, y), -10, 10, -10, 10,
                                     epsabs=1e-12, epsrel=1e-12)
        assert total == pytest.approx(1.0, abs=1e-8)


class TestJointCdf:
    def test_independence_orthant(self):
        assert joint_diag_log_cdf(BivSkewNormalLaw(0.0, 0.0), 0.0) == pytest.approx(
            math.log(0.25), abs=1e-13)

    def test_normal_orthant(self):
        ref = math.log(0.25 + math.asin(0.5) / (2 * math.pi))
        assert joint_diag_log_cdf(BivSkewNormalLaw(0.0, 0.5), 0.0) == pytest.approx(ref, abs=1e-13)

    @pytest.mark.parametrize("rho", [-0.7, 0.3, 0.9])
    @pytest.mark.parametrize("x", [-3.0, -0.5, 1.0])
    def test_zero_skew_vs_scipy(self, rho, x):
        ref = stats.multivariate_normal.cdf([x, x], [0, 0], [[1, rho], [rho, 1]],
                                            abseps=1e-12, releps=1e-12)
        assert math.exp(joint_diag_log_cdf(BivSkewNormalLaw(0.0, rho), x)) == pytest.approx(
            ref, rel=1e-7)

    @pytest.mark.parametrize("key", sorted(JOINT_REF))
    def test_frozen_mpmath(self, key):
        theta, rho, x = key
        assert joint_diag_log_cdf(BivSkewNormalLaw(theta, rho), x) == pytest.approx(
            JOINT_REF[key], abs=1e-11)

    def test_dblquad_oracle(self):
        law = BivSkewNormalLaw(1.0, 0.5)
        x = -1.5
        ref, _ = integrate.dblquad(lambda b, a: biv_pdf(law, a, b), x - 12, x, x - 12, x,
                                   epsabs=0, epsrel=1e-11)
        assert joint_diag_log_cdf(law, x) == pytest.approx(math.log(ref), abs=1e-9)

    def test_methods_agree_on_grid(self):
        for theta, rho in GRID_LAWS:
            law = BivSkewNormalLaw(theta, rho)
            for x in GRID_X:
                a = joint_diag_log_cdf(law, x, method="mixture")
                b = joint_diag_log_cdf(law, x, method="quadrature")
                assert abs(a - b) <= 1e-8

    def test_monte_carlo(self):
        law = BivSkewNormalLaw(1.0, 0.0)
        x, n = -1.0, 10**7
        hits = 0
        for start in range(0, n, 10**6):
            rows = sample(law, 10**6, seed=99, start=start).rows
            hits += int(np.count_nonzero((rows[:, 0] <= x) & (rows[:, 1] <= x)))
        p = hits / n
        se = math.sqrt(p * (1 - p) / n)
        assert abs(math.exp(joint_diag_log_cdf(law, x)) - p) <= 3 * se

    @pytest.mark.parametrize("theta,rho", GRID_LAWS + [(0.0, 0.3)])
    def test_monotone_and_frechet(self, theta, rho):
        law = BivSkewNormalLaw(theta, rho)
        xs = np.linspace(-8, 3, 23)
        vals = np.array([joint_diag_log_cdf(law, x) for x in xs])
        assert np.all(np.diff(vals) > 0)
        assert np.all(vals <= log_cdf_batch(law.lam, xs, law.quad))

    def test_quadrant_integrand_symmetric(self):
        law = BivSkewNormalLaw(1.5, -0.2)
        rng = np.random.default_rng(3)
        for _ in range(10):
            s1, s2 = rng.uniform(0, 3, 2)
            f = bv.biv_log_pdf(law, -2 - s1, -2 - s2)
            g = bv.biv_log_pdf(law, -2 - s2, -2 - s1)
            # same terms, summed in a different order
            assert f == pytest.approx(g, rel=4e-16)

    def test_method_validation(self):
        with pytest.raises(DomainError):
            joint_diag_log_cdf(BivSkewNormalLaw(1.0, 0.0), -1.0, method="orthant")
        with pytest.raises(DomainError):
            joint_diag_log_cdf(BivSkewNormalLaw(0.0, 0.0), -1.0, method="mixture")
        with pytest.raises(DomainError):
            joint_diag_log_cdf(BivSkewNormalLaw(1.0, 0.0), -1.0, method="simpson")

    def test_auto_falls_back(self, monkeypatch):
        law = BivSkewNormalLaw(1.0, 0.5)
        ref = joint_diag_log_cdf(law, -2.0, method="quadrature")

        def broken(law, x):
            raise ConvergenceError("forced", {"nodes": 0})

        monkeypatch.setattr(bv, "_joint_mixture", broken)
        assert joint_diag_log_cdf(law, -2.0) == ref
        monkeypatch.setattr(bv, "_joint_quadrant", broken)
        with pytest.raises(ConvergenceError) as info:
            joint_diag_log_cdf(law, -2.0)
        assert set(info.value.diagnostics) == {"mixture", "quadrature"}

    def test_deep_tail_finite(self):
        law = BivSkewNormalLaw(2.0, -0.3)
        v = joint_diag_log_cdf(law, -20.0)
        assert math.isfinite(v) and v < -3000


class TestJointTailAsymptotic:
    def test_gap_decreasing(self):
        law = BivSkewNormalLaw(1.0, 0.0)
        gaps = [abs(joint_diag_log_cdf(law, x) - joint_diag_tail_asymptotic(law, x))
                for x in (-2.0, -3.0, -4.0, -5.0)]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_rate(self):
        # alpha^2 (1 + lam^2) = lam^2 makes the Gaussian rate (1 + lam^2)(1 + beta^2)/2 = 3
        law = BivSkewNormalLaw(1.0, 0.0)
        x, y = -3.0, -5.0
        diff = joint_diag_tail_asymptotic(law, x) - joint_diag_tail_asymptotic(law, y)
        assert diff == pytest.approx(-3 * (x * x - y * y) - 3 * math.log(x / y), abs=1e-12)

    def test_branch(self):
        with pytest.raises(UnsupportedBranchError):
            joint_diag_tail_asymptotic(BivSkewNormalLaw(-1.0, 0.0), -3.0)
        with pytest.raises(DomainError):
            joint_diag_tail_asymptotic(BivSkewNormalLaw(1.0, 0.0), 1.0)


class TestSampling:
    def test_deterministic(self):
        law = BivSkewNormalLaw(1.0, 0.0)
        a = sample(law, 1000, seed=7).rows
        b = sample(law, 1000, seed=7).rows
        assert a.tobytes() == b.tobytes()
        assert not np.array_equal(a, sample(law, 1000, seed=8).rows)

    def test_chunks_match_single_draw(self):
        law = BivSkewNormalLaw(-0.5, 0.2)
        whole = sample(law, 1000, seed=5).rows
        parts = np.vstack([sample(law, 300, seed=5, start=0).rows,
                           sample(law, 700, seed=5, start=300).rows])
        assert np.array_equal(whole, parts)

    def test_zero_skew_correlation(self):
        n, rho = 200_000, 0.6
        rows = sample(BivSkewNormalLaw(0.0, rho), n, seed=1).rows
        assert abs(np.corrcoef(rows.T)[0, 1] - rho) <= 4 / math.sqrt(n)

    def test_mean(self):
        law = BivSkewNormalLaw(1.0, 0.0)
        n = 10**6
        rows = sample(law, n, seed=2).rows
        mean = law.alpha * math.sqrt(2 / math.pi)
        assert mean == pytest.approx(0.46065886596178063, rel=1e-14)
        sd = math.sqrt(1 - mean**2)
        assert np.all(np.abs(rows.mean(axis=0) - mean) <= 4 * sd / math.sqrt(n))

    def test_margin_ks(self):
        law = BivSkewNormalLaw(-1.0, 0.3)
        x1 = sample(law, 100_000, seed=3).rows[:, 0]
        margin = law.marginal()
        assert stats.kstest(x1, lambda t: sn_cdf(margin, t)).pvalue > 0.01

    @pytest.mark.parametrize("theta,rho", [(1.0, 0.0), (-1.0, 0.5)])
    def test_max_of_standardized_pair(self, theta, rho):
        law = BivSkewNormalLaw(theta, rho)
        z = sample_z_star(law, 100_000, seed=11)
        assert np.allclose(np.corrcoef(z.T)[0, 1], law.z_star_corr, atol=0.01)
        m = z.max(axis=1)
        shape = SkewNormalLaw(law.beta)
        assert stats.kstest(m, lambda t: sn_cdf(shape, t)).pvalue > 0.01

    def test_bad_n(self):
        with pytest.raises(DomainError):
            sample(BivSkewNormalLaw(1.0, 0.0), 0, seed=1)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**63), st.integers(1, 50), st.integers(0, 1000))
    def test_row_depends_only_on_index(self, seed, n, start):
        law = BivSkewNormalLaw(0.7, -0.1)
        block = sample(law, n + 1, seed, start=start).rows
        tail = sample(law, n, seed, start=start + 1).rows
        assert np.array_equal(block[1:], tail)
