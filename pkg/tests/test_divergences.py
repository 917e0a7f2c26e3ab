"""Normalizing constants, density ratio, KL estimator and the LSI check.

Ground truths: hand evaluations of the Wishart-type constants, the exact
uniform density of the scalar corner at n = 3, 1-d quadrature of the KL
integral, and the change-of-measure identity E_f[g/f] = 1 which pins the
derived constant B jointly with both spectral terms.
"""
import math

import numpy as np
import pytest
from scipy.integrate import quad

from haarcorner import (EnsembleParams, MCEstimate, Spectrum, check_lsi,
                        estimate_fisher, estimate_importance, estimate_kl,
                        log_density_ratio, log_normalizer,
                        log_wishart_constant)


class TestWishartConstant:
    def test_s2_t1(self):
        # 1/w = 2^1 * Gamma(1) = 2
        assert log_wishart_constant(2, 1) == pytest.approx(-math.log(2.0),
                                                           rel=1e-14)

    def test_s3_t1(self):
        # 1/w = 2^{3/2} Gamma(3/2) = sqrt(2 pi)
        assert log_wishart_constant(3, 1) \
            == pytest.approx(-0.5 * math.log(2 * math.pi), rel=1e-14)

    @pytest.mark.parametrize("s", [5.0, 50.0, 500.0])
    def test_t2_term_by_term(self, s):
        explicit = -(2 * 1 / 4 * math.log(math.pi) + s * math.log(2.0)
                     + math.lgamma(s / 2) + math.lgamma((s - 1) / 2))
        assert log_wishart_constant(s, 2) == pytest.approx(explicit,
                                                           rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            log_wishart_constant(1.0, 2)
        with pytest.raises(ValueError):
            log_wishart_constant(5.0, 0)

    def test_no_overflow_at_huge_s(self):
        assert math.isfinite(log_wishart_constant(1e9, 3))


class TestLogDensityRatio:
    def test_zero_spectrum_gives_log_b(self):
        params = EnsembleParams(30, 4, 2)
        norm = log_normalizer(params)
        got = log_density_ratio(Spectrum(np.zeros(2)), params, norm)
        assert got == pytest.approx(norm.log_B, rel=1e-14)

    def test_matches_direct_densities_at_n3(self):
        # at (3,1,1) the scaled entry is uniform on (-sqrt(3), sqrt(3))
        params = EnsembleParams(3, 1, 1)
        norm = log_normalizer(params)
        f_const = 1.0 / (2 * math.sqrt(3.0))
        for z in np.linspace(-1.6, 1.6, 10):
            lam = z * z / 3.0
            got = log_density_ratio(Spectrum(np.array([lam])), params, norm)
            g = math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
            assert got == pytest.approx(math.log(f_const / g), abs=1e-10)

    def test_boundary_rejected(self):
        params = EnsembleParams(30, 4, 2)
        with pytest.raises(ValueError):
            log_density_ratio(Spectrum(np.array([0.5, 1.0])), params)


class TestKlEstimator:
    def test_quadrature_small_case(self):
        params = EnsembleParams(3, 1, 1)
        f = 1.0 / (2 * math.sqrt(3.0))

        def integrand(z):
            g = math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
            return f * math.log(f / g)

        oracle, _ = quad(integrand, -math.sqrt(3), math.sqrt(3))
        est = estimate_kl(params, 200_000, seed=3)
        assert abs(est.mean - oracle) <= 5 * est.stderr

    def test_nonnegative_at_mc_precision(self):
        for (n, p, q) in [(50, 4, 2), (200, 5, 3)]:
            est = estimate_kl(EnsembleParams(n, p, q), 50_000, seed=4)
            assert est.mean >= -3 * est.stderr

    def test_positive_and_below_half_fisher_at_2000_5_3(self):
        params = EnsembleParams(2000, 5, 3)
        kl = estimate_kl(params, 100_000, seed=9)
        fi = estimate_fisher(params, 100_000, seed=9)
        assert kl.mean > 0
        assert check_lsi(kl, fi).holds

    def test_shrinks_along_n_ladder(self):
        means = [estimate_kl(EnsembleParams(n, 5, 3), 100_000, seed=5).mean
                 for n in (100, 200, 400)]
        assert means[0] > means[1] > means[2] > 0


class TestImportanceIdentity:
    def test_unit_mean(self):
        est = estimate_importance(EnsembleParams(50, 3, 2), 100_000, seed=6)
        assert abs(est.mean - 1.0) <= 5 * est.stderr

    def test_unit_mean_second_grid_point(self):
        est = estimate_importance(EnsembleParams(120, 6, 3), 100_000, seed=7)
        assert abs(est.mean - 1.0) <= 5 * est.stderr


class TestLsi:
    def test_holds_on_grid(self):
        for (n, p, q) in [(200, 5, 3), (500, 8, 4), (2000, 10, 5)]:
            params = EnsembleParams(n, p, q)
            kl = estimate_kl(params, 100_000, seed=8)
            fi = estimate_fisher(params, 100_000, seed=8)
            report = check_lsi(kl, fi)
            assert report.holds
            assert report.slack == pytest.approx(fi.mean - 2 * kl.mean)

    def test_degenerate_zero_estimates(self):
        prov = (10, 2, 1)
        kl = MCEstimate(0.0, 0.0, 5, 0, provenance=prov + ("kl",))
        fi = MCEstimate(0.0, 0.0, 5, 0, provenance=prov + ("spectral-jacobi",))
        report = check_lsi(kl, fi)
        assert report.holds and report.slack == 0.0

    def test_negative_control(self):
        prov = (10, 2, 1)
        kl = MCEstimate(1.0, 0.01, 100, 0, provenance=prov + ("kl",))
        fi = MCEstimate(1.0, 0.01, 100, 0, provenance=prov + ("f",))
        report = check_lsi(kl, fi)  # 2*1.0 > 1.0 + 10 stderr
        assert not report.holds

    def test_params_mismatch_rejected(self):
        kl = MCEstimate(0.1, 0.01, 100, 0, provenance=(10, 2, 1, "kl"))
        fi = MCEstimate(0.1, 0.01, 100, 0, provenance=(12, 2, 1, "f"))
        with pytest.raises(ValueError):
            check_lsi(kl, fi)
