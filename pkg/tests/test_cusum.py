import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from volbreak import (
    ConfigError,
    DegenerateDataError,
    EigenSpectrum,
    LimitSample,
    LogTotalQV,
    StdQVPanel,
    bb_l2_draw,
    eigen_spectrum,
    empirical_pvalue,
    fde_covariance,
    fisher_combine,
    pvalue_total,
    shape_statistic,
    simulate_shape_limit,
    total_statistic,
)
from volbreak.rng import stream

from conftest import random_stdqv
from oracles import brute_fde, brute_shape_statistic, brute_total_statistic


class TestShapeStatistic:
    def test_identical_rows_give_zero(self):
        row = np.linspace(0.1, 1.0, 10)
        f = StdQVPanel(np.tile(row, (6, 1)))
        assert shape_statistic(f) == pytest.approx(0.0, abs=1e-28)

    def test_hand_evaluated_two_by_two(self):
        f = StdQVPanel([[0.0, 1.0], [1.0, 1.0]])
        assert shape_statistic(f) == pytest.approx(0.0625, abs=1e-15)

    def test_matches_brute_force(self, rng):
        for _ in range(6):
            n = int(rng.integers(2, 50))
            k = int(rng.integers(2, 20))
            f = random_stdqv(rng, n, k)
            assert shape_statistic(f) == pytest.approx(
                brute_shape_statistic(f.values), rel=1e-10
            )

    def test_location_invariance(self, rng):
        f = random_stdqv(rng, 15, 8)
        base = shape_statistic(f)
        # add one identical row-vector to every row; rows stay valid cdfs
        # only up to the final-entry normalization, so bypass validation
        shifted = f.values + np.full(8, 0.25)
        shifted_stat = brute_shape_statistic(shifted)
        assert shifted_stat == pytest.approx(base, rel=1e-10)

    def test_requires_two_days(self):
        with pytest.raises(ConfigError):
            shape_statistic(StdQVPanel([[0.5, 1.0]]))


class TestTotalStatistic:
    def test_constant_series_gives_zero(self):
        assert total_statistic(LogTotalQV(np.full(9, 1.3))) == pytest.approx(0.0, abs=1e-28)

    def test_hand_evaluated_pair(self):
        assert total_statistic(LogTotalQV([0.0, 1.0])) == pytest.approx(0.0625, abs=1e-15)

    def test_shift_invariance(self, rng):
        x = rng.standard_normal(40)
        a = total_statistic(LogTotalQV(x))
        b = total_statistic(LogTotalQV(x + 17.3))
        assert b == pytest.approx(a, rel=1e-8)

    def test_matches_brute_force(self, rng):
        for _ in range(6):
            x = rng.standard_normal(int(rng.integers(2, 50)))
            assert total_statistic(LogTotalQV(x)) == pytest.approx(
                brute_total_statistic(x), rel=1e-10
            )


class TestFdeCovariance:
    def test_identical_rows_give_zero_matrix(self):
        f = StdQVPanel(np.tile(np.linspace(0.2, 1.0, 5), (4, 1)))
        assert np.all(fde_covariance(f) == 0.0)

    def test_two_rows_rank_one(self):
        f = StdQVPanel([[0.0, 0.4, 1.0], [0.5, 0.5, 1.0]])
        d = np.array([0.5, 0.1, 0.0])
        cov = fde_covariance(f)
        assert_allclose(cov, np.outer(d, d) / 2.0, rtol=1e-14)
        spectrum = eigen_spectrum(cov)
        assert spectrum.count == 1
        assert spectrum.eigenvalues[0] == pytest.approx((d @ d) / 2.0, rel=1e-12)

    def test_row_reversal_invariance(self, rng):
        f = random_stdqv(rng, 12, 6)
        rev = StdQVPanel(f.values[::-1].copy())
        assert_allclose(fde_covariance(rev), fde_covariance(f), rtol=1e-12)

    def test_matches_brute_force(self, rng):
        f = random_stdqv(rng, 25, 10)
        assert_allclose(fde_covariance(f), brute_fde(f.values), rtol=1e-10)

    def test_positive_semidefinite(self, rng):
        for _ in range(4):
            f = random_stdqv(rng, 30, 12)
            cov = fde_covariance(f)
            eigs = np.linalg.eigvalsh(cov)
            assert eigs.min() >= -1e-10 * np.trace(cov)


class TestEigenSpectrum:
    def test_equal_diagonal(self):
        spectrum = eigen_spectrum(np.eye(20), threshold=0.95)
        assert spectrum.count == 19  # ceil(0.95 * 20)

    def test_two_mode_matrix(self):
        spectrum = eigen_spectrum(np.diag([9.0, 1.0]), threshold=0.95)
        assert spectrum.count == 2
        assert spectrum.explained_fraction == 1.0

    def test_threshold_just_met(self):
        spectrum = eigen_spectrum(np.diag([19.0, 1.0]), threshold=0.95)
        assert spectrum.count == 1

    def test_zero_trace_is_degenerate(self):
        with pytest.raises(DegenerateDataError, match="degenerate covariance"):
            eigen_spectrum(np.zeros((4, 4)))

    def test_asymmetric_matrix_rejected(self):
        bad = np.array([[1.0, 0.5], [0.1, 1.0]])
        with pytest.raises(ConfigError, match="symmetric"):
            eigen_spectrum(bad)


class TestBridgeDraws:
    def test_single_term_is_scaled_chi_square(self):
        draw = bb_l2_draw(1, stream(5))
        z = stream(5).standard_normal(1)[0]
        assert draw == pytest.approx(z**2 / math.pi**2, rel=1e-12)

    def test_draws_nonnegative(self):
        draws = bb_l2_draw(50, stream(6), size=1000)
        assert np.all(draws >= 0.0)

    def test_moments_match_series(self):
        # E = sum 1/(j pi)^2 -> 1/6, Var -> 1/45 as J grows
        draws = bb_l2_draw(500, stream(7), size=60_000)
        se_mean = math.sqrt(1.0 / 45.0 / draws.size)
        assert draws.mean() == pytest.approx(1.0 / 6.0, abs=4 * se_mean)


class TestShapeLimit:
    def test_zero_spectrum_gives_zero_draws(self):
        spectrum = EigenSpectrum(np.array([0.0]), 1.0)
        sample = simulate_shape_limit(spectrum, 100, 50, stream(8))
        assert np.all(sample.values == 0.0)

    def test_single_bridge_mean(self):
        spectrum = EigenSpectrum(np.array([1.0]), 1.0)
        sample = simulate_shape_limit(spectrum, 30_000, 300, stream(9))
        se = math.sqrt(1.0 / 45.0 / 30_000)
        assert sample.values.mean() == pytest.approx(1.0 / 6.0, abs=4 * se)

    def test_two_bridge_linearity(self):
        spectrum = EigenSpectrum(np.array([2.0, 1.0]), 1.0)
        sample = simulate_shape_limit(spectrum, 30_000, 300, stream(10))
        se = math.sqrt(5.0 / 45.0 / 30_000)
        assert sample.values.mean() == pytest.approx(3.0 / 6.0, abs=4 * se)

    def test_sorted_decreasing(self):
        spectrum = EigenSpectrum(np.array([1.0, 0.5]), 1.0)
        sample = simulate_shape_limit(spectrum, 500, 100, stream(11))
        assert np.all(np.diff(sample.values) <= 0.0)


class TestEmpiricalPvalue:
    def sample(self, values):
        arr = np.sort(np.asarray(values, dtype=float))[::-1]
        return LimitSample(arr, arr.size, 500)

    def test_stat_below_everything(self):
        assert empirical_pvalue(-1.0, self.sample([1.0, 2.0, 3.0])) == 1.0

    def test_stat_above_everything(self):
        assert empirical_pvalue(10.0, self.sample([1.0, 2.0, 3.0])) == pytest.approx(0.25)

    def test_median_rank(self):
        values = np.arange(1.0, 102.0)  # r = 101, median 51
        p = empirical_pvalue(51.0, self.sample(values))
        assert p == pytest.approx((1 + 51) / 102)


class TestPvalueTotal:
    def test_zero_statistic_gives_one(self):
        assert pvalue_total(0.0, 1.0, 200, 50, stream(12)) == 1.0

    def test_zero_lrv_with_positive_stat(self):
        assert pvalue_total(0.5, 0.0, 199, 50, stream(13)) == pytest.approx(1.0 / 200.0)

    def test_zero_lrv_with_zero_stat(self):
        assert pvalue_total(0.0, 0.0, 199, 50, stream(14)) == 1.0

    def test_upper_quantile_by_construction(self):
        reference = bb_l2_draw(500, stream(15), size=20_000)
        q99 = float(np.quantile(reference, 0.99))
        p = pvalue_total(q99, 1.0, 5000, 500, stream(16))
        assert p == pytest.approx(0.01, abs=0.005)


class TestFisherCombine:
    def test_no_evidence(self):
        report = fisher_combine(1.0, 1.0)
        assert report.statistic == 0.0
        assert report.p_value == 1.0

    def test_closed_form_chi4_survival(self):
        report = fisher_combine(math.exp(-1.0), math.exp(-1.0))
        assert report.statistic == pytest.approx(4.0, rel=1e-14)
        assert report.p_value == pytest.approx(3.0 * math.exp(-2.0), abs=1e-12)

    def test_symmetry_exact(self):
        a = fisher_combine(0.037, 0.61)
        b = fisher_combine(0.61, 0.037)
        assert a.statistic == b.statistic
        assert a.p_value == b.p_value

    def test_rejects_zero_pvalue(self):
        with pytest.raises(ConfigError):
            fisher_combine(0.0, 0.5)


def test_limit_simulation_reproducible():
    spectrum = EigenSpectrum(np.array([0.3, 0.1]), 0.97)
    a = simulate_shape_limit(spectrum, 400, 80, stream(17, 1))
    b = simulate_shape_limit(spectrum, 400, 80, stream(17, 1))
    assert np.array_equal(a.values, b.values)
