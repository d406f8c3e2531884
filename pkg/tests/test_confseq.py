"""Tests for the confidence sequences and fixed-sample intervals."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from privseq.confseq import (
    BoundSeries,
    Interval,
    MixtureConfig,
    gridkelly_cs,
    gridkelly_log_wealth,
    hoeffding_ci,
    hoeffding_cs,
    hoeffding_half_width,
    invert_monotone,
    laplace_hoeffding_ci,
    laplace_hoeffding_cs,
    mixture_cs_lower,
    mixture_cs_two_sided,
    one_sided_mixture_nsm,
    pmkelly_ci,
    pmkelly_log_wealth,
    sirr_lr_cs,
    sirr_lr_log_wealth,
    two_sided_mixture_nsm,
    zeta,
)
from privseq.mechanisms import (
    PrivacyParams,
    PrivateRecord,
    RandomSource,
    RecordBatch,
    laplace_privatize_batch,
    nprr_privatize_batch,
    r_of,
)
from privseq.schedules import LambdaSchedule, lambda_fixed_n


def _constant_batch(z_values, r=1.0, G=1):
    z = np.asarray(z_values, dtype=float)
    return RecordBatch(z=z, r=r, G=G)


def _bernoulli_records(p, T, r, seed, G=1):
    src = RandomSource(seed=seed)
    x = (src.generator(0).random(T) < p).astype(float)
    return nprr_privatize_batch(x, PrivacyParams(r=r, G=G), src.generator(1))


class TestZeta:
    def test_affine_map(self):
        assert zeta(0.3, 0.5) == pytest.approx(0.4)
        assert zeta(0.0, 1.0) == 0.0

    def test_vectorized(self):
        out = zeta(np.array([0.0, 1.0]), 0.5)
        assert out.tolist() == [0.25, 0.75]


class TestHoeffdingCs:
    def test_empty_stream(self):
        series = hoeffding_cs([])
        assert len(series) == 0

    def test_half_width_known_value(self):
        """Constant optimal weight at n = 100, alpha = 0.05, no privacy."""
        lam = np.full(100, lambda_fixed_n(100, 0.05))
        assert hoeffding_half_width(lam, 1.0, 0.05) == pytest.approx(
            0.122387341534041, abs=1e-12
        )
        assert hoeffding_half_width(lam, r_of(2.0, 1), 0.05) == pytest.approx(
            0.160698897932653, abs=1e-12
        )

    def test_series_matches_half_width(self):
        batch = _constant_batch(np.full(100, 0.5))
        series = hoeffding_cs(batch, LambdaSchedule(kind="fixed-n", n=100), alpha=0.05)
        half = (series.upper[-1] - series.lower[-1]) / 2
        assert half == pytest.approx(0.122387341534041, abs=1e-12)
        assert series.estimate[-1] == pytest.approx(0.5)

    def test_width_ratio_is_inverse_r(self):
        """Same weights, same z: privatized width is the clean width over r."""
        z = np.linspace(0.3, 0.7, 50)
        lam = np.full(50, 0.3)
        clean = hoeffding_cs(_constant_batch(z, r=1.0), lam, alpha=0.05, clip=False)
        priv = hoeffding_cs(_constant_batch(z, r=0.6), lam, alpha=0.05, clip=False)
        ratio = (priv.upper - priv.lower) / (clean.upper - clean.lower)
        assert ratio == pytest.approx(np.full(50, 1 / 0.6), rel=1e-12)

    def test_default_schedule_is_time_uniform(self):
        batch = _bernoulli_records(0.5, 40, r=0.7, seed=5)
        a = hoeffding_cs(batch, alpha=0.05)
        b = hoeffding_cs(batch, LambdaSchedule(kind="time-uniform"), alpha=0.05)
        assert np.array_equal(a.lower, b.lower)

    def test_width_shrinks_as_alpha_grows(self):
        batch = _bernoulli_records(0.5, 200, r=0.7, seed=6)
        wide = hoeffding_cs(batch, alpha=0.05)
        narrow = hoeffding_cs(batch, alpha=0.2)
        widths_wide = wide.upper - wide.lower
        widths_narrow = narrow.upper - narrow.lower
        assert (widths_narrow <= widths_wide + 1e-12).all()

    def test_bounds_clipped(self):
        batch = _constant_batch(np.array([1.0, 1.0, 1.0]), r=0.5)
        series = hoeffding_cs(batch, alpha=0.05)
        assert (series.lower >= 0).all() and (series.upper <= 1).all()

    def test_weight_length_mismatch(self):
        batch = _constant_batch(np.array([0.5, 0.5]))
        with pytest.raises(ValueError, match="length"):
            hoeffding_cs(batch, np.array([0.1]), alpha=0.05)


class TestHoeffdingCi:
    def test_requires_exact_count(self):
        batch = _constant_batch(np.full(9, 0.5))
        with pytest.raises(ValueError, match="exactly n=10"):
            hoeffding_ci(batch, n=10)

    def test_single_record_worked_example(self):
        """One clean record at 0.5, unit weight, degenerate alpha."""
        interval = hoeffding_ci(
            [PrivateRecord(z=0.5, r=1.0, G=1)], n=1, alpha=1.0, lam=1.0
        )
        assert interval.lower == pytest.approx(0.375)
        assert interval.upper == pytest.approx(0.625)

    def test_equals_intersected_sequence(self):
        """The interval is the running intersection of the same-weight sequence."""
        batch = _bernoulli_records(0.4, 60, r=0.8, seed=7)
        n = 60
        interval = hoeffding_ci(batch, n=n, alpha=0.1)
        lam = np.full(n, lambda_fixed_n(n, 0.1))
        series = hoeffding_cs(batch, lam, alpha=0.1).intersected()
        assert interval.lower == pytest.approx(series.lower[-1], abs=1e-15)
        assert interval.upper == pytest.approx(series.upper[-1], abs=1e-15)

    @given(st.lists(st.sampled_from([0.0, 0.5, 1.0]), min_size=2, max_size=25))
    def test_contained_in_sequence(self, zs):
        """The fixed-n interval never extends beyond the same-weight sequence."""
        n = len(zs)
        batch = _constant_batch(zs, r=0.9)
        interval = hoeffding_ci(batch, n=n, alpha=0.1)
        lam = np.full(n, lambda_fixed_n(n, 0.1))
        series = hoeffding_cs(batch, lam, alpha=0.1)
        assert interval.lower >= series.lower.max() - 1e-12
        assert interval.upper <= series.upper.min() + 1e-12


class TestMixtureCs:
    def test_two_sided_known_width(self):
        batch = _constant_batch(np.full(100, 0.5))
        config = MixtureConfig(alpha=0.05, beta=0.281661089945344)
        series = mixture_cs_two_sided(batch, config)
        half = (series.upper[-1] - series.lower[-1]) / 2
        assert half == pytest.approx(0.151760541741342, abs=1e-9)

    def test_lower_known_width(self):
        batch = _constant_batch(np.full(100, 0.5))
        config = MixtureConfig(alpha=0.05, beta=0.281661089945344)
        series = mixture_cs_lower(batch, config)
        assert series.lower[-1] == pytest.approx(0.5 - 0.138974668491270, abs=1e-9)
        assert (series.upper == 1.0).all()

    def test_default_beta_optimizes_at_t0(self):
        batch = _constant_batch(np.full(100, 0.5))
        explicit = mixture_cs_two_sided(
            batch, MixtureConfig(alpha=0.05, beta=0.281661089945344, t0=100)
        )
        default = mixture_cs_two_sided(batch, MixtureConfig(alpha=0.05, t0=100))
        assert default.lower[-1] == pytest.approx(explicit.lower[-1], abs=1e-9)

    def test_varying_mechanism_rejected(self):
        records = [
            PrivateRecord(z=0.0, r=0.5, G=1),
            PrivateRecord(z=1.0, r=0.6, G=1),
        ]
        with pytest.raises(ValueError, match="constant mechanism"):
            mixture_cs_two_sided(records)
        with pytest.raises(ValueError, match="constant mechanism"):
            mixture_cs_lower(records)

    def test_empty_stream(self):
        assert len(mixture_cs_two_sided([])) == 0
        assert len(mixture_cs_lower([])) == 0

    def test_privacy_widens(self):
        z = np.full(200, 0.5)
        clean = mixture_cs_two_sided(_constant_batch(z, r=1.0))
        priv = mixture_cs_two_sided(_constant_batch(z, r=0.5))
        assert ((priv.upper - priv.lower) >= (clean.upper - clean.lower) - 1e-12).all()


class TestMixtureNsm:
    def test_two_sided_known_value(self):
        assert two_sided_mixture_nsm(1.0, 1, 2.0) == pytest.approx(
            0.653426409720027, abs=1e-12
        )

    def test_one_sided_at_zero_score(self):
        """S = 0 gives wealth 1/sqrt(a) regardless of the tail term."""
        for t, rho in ((4, 1.0), (100, 0.3)):
            a = t * rho * rho / 4 + 1
            assert one_sided_mixture_nsm(0.0, t, rho) == pytest.approx(
                -0.5 * math.log(a), abs=1e-12
            )

    @pytest.mark.parametrize("rho", [0.5, 2.0])
    @pytest.mark.parametrize("t", [1, 100])
    @pytest.mark.parametrize("S", [-3.0, 0.0, 2.0])
    def test_matches_quadrature(self, S, t, rho):
        """Closed forms agree with direct mixing integrals."""

        def integrand(lam):
            return math.exp(lam * S - t * lam * lam / 8) * stats.norm.pdf(lam, scale=rho)

        two, _ = integrate.quad(integrand, -np.inf, np.inf)
        one, _ = integrate.quad(lambda lam: 2 * integrand(lam), 0, np.inf)
        assert two_sided_mixture_nsm(S, t, rho) == pytest.approx(
            math.log(two), rel=1e-6
        )
        assert one_sided_mixture_nsm(S, t, rho) == pytest.approx(
            math.log(one), rel=1e-6
        )

    def test_vectorized_over_time(self):
        t = np.arange(1, 5)
        S = np.ones(4)
        out = two_sided_mixture_nsm(S, t, 1.0)
        assert out.shape == (4,)

    def test_rho_domain(self):
        with pytest.raises(ValueError, match="rho"):
            two_sided_mixture_nsm(0.0, 1, 0.0)
        with pytest.raises(ValueError, match="rho"):
            one_sided_mixture_nsm(0.0, 1, -1.0)


class TestLaplaceBounds:
    def _records(self, n, eps=2.0, x=0.4, seed=51):
        src = RandomSource(seed=seed)
        return laplace_privatize_batch(np.full(n, x), eps, src.generator(0))

    def test_weights_stay_below_epsilon(self):
        batch = self._records(500)
        series = laplace_hoeffding_cs(batch, alpha=0.05)
        assert len(series) == 500
        assert (series.lower <= series.upper).all()

    def test_ci_covers_fixed_seed(self):
        batch = self._records(500)
        interval = laplace_hoeffding_ci(batch, n=500, alpha=0.05)
        assert interval.lower <= 0.4 <= interval.upper

    def test_cs_covers_fixed_seed(self):
        batch = self._records(300)
        series = laplace_hoeffding_cs(batch, alpha=0.05)
        assert (series.lower <= 0.4).all() and (series.upper >= 0.4).all()

    def test_unclipped_flag(self):
        batch = self._records(5)
        series = laplace_hoeffding_cs(batch, alpha=0.05, clip=False)
        assert (series.lower < 0).any() or (series.upper > 1).any()

    def test_truncation_validated(self):
        batch = self._records(10)
        sched = LambdaSchedule(kind="laplace", c=1.0)
        with pytest.raises(ValueError, match=r"\(0, 1\)"):
            laplace_hoeffding_cs(batch, sched)

    def test_kind_enforced(self):
        batch = self._records(10)
        with pytest.raises(ValueError, match="laplace"):
            laplace_hoeffding_cs(batch, LambdaSchedule(kind="time-uniform"))

    def test_ci_requires_exact_count(self):
        with pytest.raises(ValueError, match="exactly"):
            laplace_hoeffding_ci(self._records(10), n=20)


class TestInvertMonotone:
    def test_linear_crossing(self):
        root = invert_monotone(lambda x: 1 - x, 0.5, 0.0, 1.0)
        assert root == pytest.approx(0.5, abs=1e-5)

    def test_step_crossing(self):
        root = invert_monotone(lambda x: 1.0 if x < 0.3 else -1.0, 0.0, 0.0, 1.0)
        assert root == pytest.approx(0.3, abs=1e-5)

    def test_edge_conventions(self):
        assert invert_monotone(lambda x: -1.0, 0.0, 0.0, 1.0) == 0.0
        assert invert_monotone(lambda x: 1.0, 0.0, 0.0, 1.0) == 1.0

    def test_inclusive_flag(self):
        assert invert_monotone(lambda x: 0.0, 0.0, 0.0, 1.0) == 1.0
        assert invert_monotone(lambda x: 0.0, 0.0, 0.0, 1.0, inclusive=True) == 0.0

    def test_bad_bracket(self):
        with pytest.raises(ValueError, match="lo < hi"):
            invert_monotone(lambda x: x, 0.0, 1.0, 0.0)


class TestPmKelly:
    def test_degenerate_alpha_gives_unit_interval(self):
        batch = _constant_batch(np.array([0.0, 1.0, 1.0]))
        interval = pmkelly_ci(batch, n=3, alpha=1.0)
        assert interval.lower == 0.0
        assert interval.upper == 1.0

    def test_wealth_decreasing_in_candidate_mean(self):
        batch = _bernoulli_records(0.6, 300, r=0.8, seed=61)
        low = pmkelly_log_wealth(batch, 0.2).max()
        high = pmkelly_log_wealth(batch, 0.7).max()
        assert low >= high

    def test_covers_fixed_seed(self):
        src = RandomSource(seed=64)
        x = src.generator(0).beta(10, 30, size=2000)
        batch = nprr_privatize_batch(x, PrivacyParams(r=r_of(2.0, 1), G=1), src.generator(1))
        interval = pmkelly_ci(batch, n=2000, alpha=0.1)
        assert interval.lower <= 0.25 <= interval.upper

    def test_narrower_than_weighted_interval(self):
        """On low-variance data the betting interval beats the worst-case one."""
        src = RandomSource(seed=63)
        x = src.generator(0).beta(10, 30, size=4000)
        batch = nprr_privatize_batch(x, PrivacyParams(r=r_of(2.0, 1), G=1), src.generator(1))
        betting = pmkelly_ci(batch, n=4000, alpha=0.1)
        weighted = hoeffding_ci(batch, n=4000, alpha=0.1)
        assert betting.width < weighted.width

    def test_requires_exact_count(self):
        batch = _constant_batch(np.full(5, 0.5))
        with pytest.raises(ValueError, match="exactly"):
            pmkelly_ci(batch, n=6)

    def test_log_wealth_finite_on_extreme_streams(self):
        for value in (0.0, 1.0):
            batch = _constant_batch(np.full(1_000_000, value), r=0.9)
            wealth = pmkelly_log_wealth(batch, 0.5)
            assert np.isfinite(wealth).all()


class TestGridKelly:
    def test_single_record_wealth(self):
        """Hand-computed wealth for one record, two bets per sign."""
        batch = _constant_batch(np.array([1.0]), r=1.0)
        logk = gridkelly_log_wealth(batch, [0.4], D=2, theta=0.5)
        # positive bets: (1/2)[(1 + (1/1.2) 0.6) + (1 + (2/1.2) 0.6)] = 1.75
        # negative bets: (1/2)[(1 - (1/1.8) 0.6) + (1 - (2/1.8) 0.6)] = 0.5
        assert logk[0, 0] == pytest.approx(math.log(0.5 * 1.75 + 0.5 * 0.5), abs=1e-12)

    def test_wealth_at_truth_stays_modest(self):
        batch = _bernoulli_records(0.5, 400, r=0.8, seed=71)
        logk = gridkelly_log_wealth(batch, [0.5], D=10, theta=0.5)
        assert logk[-1, 0] < math.log(1 / 0.05)

    def test_sublevel_sets_contiguous(self):
        """Accepted candidate sets have no holes on the evaluation grid."""
        mus = np.linspace(0, 1, 201)
        for seed in range(5):
            batch = _bernoulli_records(0.4, 100, r=0.7, seed=100 + seed)
            logk = gridkelly_log_wealth(batch, mus, D=10, theta=0.5)
            below = logk[-1] < math.log(1 / 0.05)
            idx = np.flatnonzero(below)
            assert idx.size > 0
            assert idx[-1] - idx[0] + 1 == idx.size

    def test_cs_bounds_and_coverage_fixed_seed(self):
        batch = _bernoulli_records(0.4, 150, r=0.8, seed=72)
        series = gridkelly_cs(batch, D=10, theta=0.5, alpha=0.05, grid_step=5e-3)
        assert len(series) == 150
        assert (series.lower <= series.upper).all()
        assert (series.lower >= 0).all() and (series.upper <= 1).all()
        assert (series.lower <= 0.4).all() and (series.upper >= 0.4).all()

    def test_late_widths_narrower_than_early(self):
        batch = _bernoulli_records(0.5, 300, r=0.9, seed=73)
        series = gridkelly_cs(batch, D=10, alpha=0.05, grid_step=5e-3)
        width = series.upper - series.lower
        assert width[-1] < width[10]

    def test_parameter_validation(self):
        batch = _constant_batch(np.array([0.5]), G=2)
        with pytest.raises(ValueError, match="D must"):
            gridkelly_log_wealth(batch, [0.5], D=0)
        with pytest.raises(ValueError, match="theta"):
            gridkelly_log_wealth(batch, [0.5], theta=1.0)

    def test_log_wealth_finite_on_extreme_streams(self):
        for value in (0.0, 1.0):
            batch = _constant_batch(np.full(1_000_000, value), r=0.9)
            logk = gridkelly_log_wealth(batch, [0.5], D=5)
            assert np.isfinite(logk).all()


class TestSirrLr:
    def test_binary_mechanism_required(self):
        records = [PrivateRecord(z=0.5, r=0.5, G=2)]
        with pytest.raises(ValueError, match="G = 1"):
            sirr_lr_cs(records)

    def test_single_record_worked_example(self):
        """One clean one: wealth is 1/(2p), so the set is p > alpha/2."""
        records = [PrivateRecord(z=1.0, r=1.0, G=1)]
        series = sirr_lr_cs(records, alpha=0.1)
        assert series.lower[0] == pytest.approx(0.05, abs=1e-4)
        assert series.upper[0] == 1.0
        wealth = sirr_lr_log_wealth(records, 0.25)
        assert wealth[0] == pytest.approx(math.log(0.5 / 0.25), abs=1e-12)

    def test_covers_fixed_seed(self):
        src = RandomSource(seed=81)
        x = (src.generator(0).random(400) < 0.3).astype(float)
        batch = nprr_privatize_batch(x, PrivacyParams(r=0.6, G=1), src.generator(1))
        series = sirr_lr_cs(batch, alpha=0.05, grid_step=5e-3)
        assert (series.lower <= 0.3).all() and (series.upper >= 0.3).all()

    def test_interval_shrinks(self):
        src = RandomSource(seed=82)
        x = (src.generator(0).random(500) < 0.5).astype(float)
        batch = nprr_privatize_batch(x, PrivacyParams(r=0.8, G=1), src.generator(1))
        series = sirr_lr_cs(batch, alpha=0.05, grid_step=5e-3)
        width = series.upper - series.lower
        assert width[-1] < width[5]

    def test_log_wealth_finite_on_extreme_streams(self):
        for value in (0.0, 1.0):
            batch = _constant_batch(np.full(1_000_000, value), r=0.9)
            wealth = sirr_lr_log_wealth(batch, 0.5)
            assert np.isfinite(wealth).all()

    def test_empty_stream(self):
        assert len(sirr_lr_cs([])) == 0


class TestContainersAndSeries:
    def test_intersected_is_monotone(self):
        series = BoundSeries(
            t=np.array([1, 2, 3]),
            estimate=np.array([0.5, 0.5, 0.5]),
            lower=np.array([0.1, 0.3, 0.2]),
            upper=np.array([0.9, 0.7, 0.8]),
        )
        tightened = series.intersected()
        assert tightened.lower.tolist() == [0.1, 0.3, 0.3]
        assert tightened.upper.tolist() == [0.9, 0.7, 0.7]

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            BoundSeries(
                t=np.array([1, 2]),
                estimate=np.array([0.5]),
                lower=np.array([0.1, 0.2]),
                upper=np.array([0.9, 0.8]),
            )

    def test_interval_width(self):
        assert Interval(lower=0.2, upper=0.7).width == pytest.approx(0.5)
        assert Interval(lower=0.7, upper=0.2).width == 0.0
