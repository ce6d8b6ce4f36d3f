import math

from unittest.case import TestCase

import numpy as np

from django.test.utils import override_settings

from scipy.stats import norm

from germanium.tools import (
    assert_true, assert_equal, assert_raises, assert_almost_equal, assert_less_equal, assert_is_none
)

from pdldp.coefficients import TimeGrid
from pdldp.coefficients.builtin import get_builtin_spec
from pdldp.exception import InvalidParameterException, SlopeFitException
from pdldp.rate import TerminalHalfSpace, min_rate_event
from pdldp.simulation import SmallNoiseSchedule
from pdldp.skeleton import Control
from pdldp.verify import (
    EstimateMethod, ProbEstimate, best_estimate, clopper_pearson_upper, estimate_event_prob, estimate_schedule,
    importance_estimate, ldp_slope
)

from .test_case import PdldpTestCase


def exact_estimates(schedule, probability):
    return [
        ProbEstimate(epsilon, theta, probability(theta), 0.0, 1, 1, EstimateMethod.PLAIN) for epsilon, theta in schedule
    ]


def exact_schilder_estimates(schedule):
    # P(theta W(1) >= 1)
    return exact_estimates(schedule, lambda theta: float(norm.sf(1.0 / theta)))


class SlopeFitTestCase(TestCase):

    def test_exact_probabilities_should_extrapolate_to_rate(self):
        schedule = SmallNoiseSchedule.from_thetas([0.5, 0.35, 0.25, 0.15])
        fit = ldp_slope(schedule, exact_schilder_estimates(schedule), 0.5)
        assert_equal(fit.degree, 2)
        assert_equal(fit.theory_value, -0.5)
        assert_less_equal(fit.rel_gap, 0.1)
        assert_equal(len(fit.per_point_values), 4)

    def test_pure_exponential_decay_should_be_fitted_exactly(self):
        schedule = SmallNoiseSchedule.from_thetas([0.5, 0.25, 0.1])
        fit = ldp_slope(schedule, exact_estimates(schedule, lambda theta: math.exp(-0.5 / theta ** 2)), 0.5)
        for value in fit.per_point_values:
            assert_almost_equal(value, -0.5, delta=1e-12)
        assert_almost_equal(fit.fitted_limit, -0.5, delta=1e-12)
        assert_less_equal(fit.rel_gap, 1e-11)

    def test_first_order_correction_should_be_removed_by_fit(self):
        schedule = SmallNoiseSchedule.from_thetas([0.5, 0.25, 0.1])
        fit = ldp_slope(
            schedule, exact_estimates(schedule, lambda theta: math.exp((-0.5 + theta) / theta ** 2)), 0.5
        )
        assert_almost_equal(fit.fitted_limit, -0.5, delta=1e-6)
        assert_almost_equal(fit.per_point_values[0], 0.0, delta=1e-12)

    def test_scaled_log_probabilities_should_approach_rate_from_below(self):
        schedule = SmallNoiseSchedule.from_thetas([0.5, 0.35, 0.25, 0.15, 0.1])
        fit = ldp_slope(schedule, exact_schilder_estimates(schedule), 0.5)
        gaps = [fit.theory_value - value for value in fit.per_point_values]
        for value, gap in zip(fit.per_point_values, gaps):
            assert_true(value < 0.0)
            assert_true(gap > 0.0)
        for gap, next_gap in zip(gaps, gaps[1:]):
            assert_true(next_gap < gap)

    def test_infinite_rate_should_have_infinite_gap(self):
        schedule = SmallNoiseSchedule.from_thetas([0.5, 0.25])
        fit = ldp_slope(schedule, exact_schilder_estimates(schedule), math.inf)
        assert_equal(fit.theory_value, -math.inf)
        assert_equal(fit.rel_gap, math.inf)

    def test_fit_should_skip_points_without_hits(self):
        schedule = SmallNoiseSchedule.from_thetas([0.5, 0.35, 0.25])
        estimates = exact_schilder_estimates(schedule)
        estimates[-1] = ProbEstimate(0.0625, 0.25, 0.0, 0.0, 100, 0, EstimateMethod.PLAIN, 0.03)
        fit = ldp_slope(schedule, estimates, 0.5)
        assert_equal(fit.degree, 1)
        assert_equal(len(fit.points), 2)

    def test_fit_should_need_two_positive_estimates(self):
        schedule = SmallNoiseSchedule.from_thetas([0.5, 0.25])
        estimates = exact_schilder_estimates(schedule)
        estimates[0] = ProbEstimate(0.25, 0.5, 0.0, 0.0, 100, 0, EstimateMethod.PLAIN, 0.03)
        with assert_raises(SlopeFitException):
            ldp_slope(schedule, estimates, 0.5)
        with assert_raises(InvalidParameterException):
            ldp_slope(schedule, estimates[:1], 0.5)

    def test_estimate_without_hits_should_have_no_log_value(self):
        estimate = ProbEstimate(0.01, 0.1, 0.0, 0.0, 100, 0, EstimateMethod.PLAIN, 0.03)
        assert_is_none(estimate.theta_sq_log_p)
        assert_equal(estimate.relative_error, math.inf)
        assert_is_none(estimate.to_dict()['theta_sq_log_p'])

    def test_clopper_pearson_upper_bound(self):
        assert_almost_equal(clopper_pearson_upper(0, 100), 1.0 - 0.05 ** 0.01, delta=1e-12)
        assert_equal(clopper_pearson_upper(10, 10), 1.0)
        assert_true(clopper_pearson_upper(5, 100) > 0.05)


class MonteCarloTestCase(PdldpTestCase):

    def setUp(self):
        super().setUp()
        self.spec = get_builtin_spec('schilder')
        self.event = TerminalHalfSpace([1.0], 1.0)

    def test_plain_estimate_should_match_exact_probability(self):
        n = 100000
        estimate = estimate_event_prob(self.spec, [0.0], 0.5, self.event, TimeGrid(1.0, 20), n, seed=0)
        assert_equal(estimate.method, EstimateMethod.PLAIN)
        assert_equal(estimate.n_hits, round(estimate.p_hat * n))
        assert_less_equal(abs(estimate.p_hat - norm.sf(2.0)), 3.0 * estimate.std_err)
        assert_true(estimate.upper_bound > estimate.p_hat)

    def test_importance_estimate_should_resolve_rare_event(self):
        grid = TimeGrid(1.0, 100)
        n = 100000
        tilt = min_rate_event(self.spec, [0.0], self.event, grid).minimizer_control
        importance = importance_estimate(self.spec, [0.0], 0.2, self.event, grid, tilt, n, seed=0)
        plain = estimate_event_prob(self.spec, [0.0], 0.2, self.event, grid, n, seed=0)

        assert_less_equal(abs(importance.p_hat - norm.sf(5.0)), 3.0 * importance.std_err)
        assert_true(plain.upper_bound > 10.0 * importance.std_err)
        if plain.n_hits:
            assert_true(plain.std_err >= 10.0 * importance.std_err)

    def test_importance_estimate_should_be_unbiased_over_seeds(self):
        grid = TimeGrid(1.0, 20)
        tilt = Control.constant(grid, [1.0])
        p_hats = np.array([
            importance_estimate(self.spec, [0.0], 0.5, self.event, grid, tilt, 2000, seed=seed).p_hat
            for seed in range(50)
        ])
        std_err = np.std(p_hats, ddof=1) / math.sqrt(len(p_hats))
        assert_less_equal(abs(np.mean(p_hats) - norm.sf(2.0)), 3.0 * std_err)

    def test_plain_and_importance_estimates_should_agree_on_likely_event(self):
        grid = TimeGrid(1.0, 20)
        n = 20000
        plain = estimate_event_prob(self.spec, [0.0], 0.5, self.event, grid, n, seed=0)
        importance = importance_estimate(
            self.spec, [0.0], 0.5, self.event, grid, Control.constant(grid, [1.0]), n, seed=1
        )
        assert_true(plain.p_hat >= 1e-2)
        assert_less_equal(
            abs(plain.p_hat - importance.p_hat), 3.0 * math.sqrt(plain.std_err ** 2 + importance.std_err ** 2)
        )

    def test_enlarged_event_should_not_decrease_estimate(self):
        grid = TimeGrid(1.0, 20)
        estimates = [
            estimate_event_prob(self.spec, [0.0], 0.5, TerminalHalfSpace([1.0], level), grid, 5000, seed=2)
            for level in (1.5, 1.0, 0.5, 0.0, -0.5)
        ]
        for estimate, enlarged in zip(estimates, estimates[1:]):
            assert_less_equal(estimate.n_hits, enlarged.n_hits)
            assert_less_equal(estimate.p_hat, enlarged.p_hat)

    def test_zero_tilt_should_reproduce_plain_estimate(self):
        grid = TimeGrid(1.0, 20)
        importance = importance_estimate(
            self.spec, [0.0], 0.5, self.event, grid, Control.zeros(grid, 1), 5000, seed=3
        )
        plain = estimate_event_prob(self.spec, [0.0], 0.5, self.event, grid, 5000, seed=3)
        assert_equal(importance.p_hat, plain.p_hat)
        assert_equal(importance.n_hits, plain.n_hits)

    def test_estimate_should_not_depend_on_chunk_size(self):
        grid = TimeGrid(1.0, 20)
        estimate = estimate_event_prob(self.spec, [0.0], 0.5, self.event, grid, 1000, seed=1)
        with override_settings(PDLDP_MC_CHUNK_SIZE=7):
            assert_equal(estimate_event_prob(self.spec, [0.0], 0.5, self.event, grid, 1000, seed=1).p_hat,
                         estimate.p_hat)

    def test_invalid_sample_size_should_raise_exception(self):
        grid = TimeGrid(1.0, 20)
        for n in (0, -1, 2.5, True):
            with assert_raises(InvalidParameterException):
                estimate_event_prob(self.spec, [0.0], 0.5, self.event, grid, n, seed=0)
        with assert_raises(InvalidParameterException):
            importance_estimate(self.spec, [0.0], 0.5, self.event, grid, Control.zeros(TimeGrid(1.0, 10), 1), 10, 0)
        with assert_raises(InvalidParameterException):
            importance_estimate(self.spec, [0.0], 0.0, self.event, grid, Control.zeros(grid, 1), 10, 0)

    def test_schedule_estimates_should_recover_rate(self):
        grid = TimeGrid(1.0, 50)
        schedule = SmallNoiseSchedule.from_thetas([0.5, 0.35, 0.25, 0.15])
        rows = estimate_schedule(
            self.spec, [0.0], self.event, grid, schedule, 200000, seed=0,
            methods=(EstimateMethod.PLAIN, EstimateMethod.IMPORTANCE), tilt=Control.constant(grid, [1.0])
        )
        assert_equal(len(rows), 4)
        assert_equal(set(rows[0]), {EstimateMethod.PLAIN, EstimateMethod.IMPORTANCE})
        fit = ldp_slope(schedule, [best_estimate(row) for row in rows], 0.5)
        assert_less_equal(fit.rel_gap, 0.15)
        gaps = [fit.theory_value - value for value in fit.per_point_values]
        assert_true(all(value < 0.0 for value in fit.per_point_values))
        for gap, next_gap in zip(gaps, gaps[1:]):
            assert_true(abs(next_gap) < abs(gap))

    def test_importance_schedule_should_need_tilt(self):
        schedule = SmallNoiseSchedule.from_thetas([0.5])
        with assert_raises(InvalidParameterException):
            estimate_schedule(
                self.spec, [0.0], self.event, TimeGrid(1.0, 10), schedule, 10, 0, methods=(EstimateMethod.IMPORTANCE,)
            )
