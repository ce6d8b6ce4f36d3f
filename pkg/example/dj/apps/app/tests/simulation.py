import math

from unittest.case import TestCase

import numpy as np

from germanium.decorators import data_consumer
from germanium.tools import assert_true, assert_false, assert_equal, assert_raises, assert_almost_equal, assert_less_equal

from pdldp.coefficients import TimeGrid, CoefficientSpec, CurrentValue, AffineMap, ConstantMap
from pdldp.coefficients.builtin import get_builtin_spec
from pdldp.exception import DivergenceException, InvalidParameterException
from pdldp.simulation import (
    NoiseDraw, SmallNoiseSchedule, brownian_draw, brownian_batch, girsanov_log_weight, girsanov_log_weights,
    simulate, simulate_batch, simulate_controlled
)
from pdldp.skeleton import Control, solve_skeleton, growth_bound_value
from pdldp.verify import terminal_moments

from .test_case import PdldpTestCase


class NoiseTestCase(TestCase):

    def test_batch_rows_should_equal_single_stream_draws(self):
        grid = TimeGrid(1.0, 20)
        batch = brownian_batch(grid, 2, seed=3, streams=[4, 7, 11])
        for row, stream in zip(batch, (4, 7, 11)):
            assert_true(np.array_equal(row, brownian_draw(grid, 2, seed=3, stream=stream).increments))

    def test_stream_should_not_depend_on_other_streams(self):
        grid = TimeGrid(1.0, 20)
        assert_true(np.array_equal(
            brownian_batch(grid, 1, seed=0, streams=range(10))[5], brownian_batch(grid, 1, seed=0, streams=[5])[0]
        ))
        assert_false(np.array_equal(
            brownian_draw(grid, 1, seed=0, stream=0).increments, brownian_draw(grid, 1, seed=1, stream=0).increments
        ))

    def test_increments_should_have_brownian_moments(self):
        grid = TimeGrid(1.0, 1000)
        increments = brownian_batch(grid, 1, seed=0, streams=range(1000)).ravel()
        assert_less_equal(abs(np.mean(increments)), 4.0 * math.sqrt(grid.dt / increments.size))
        assert_almost_equal(np.var(increments) / grid.dt, 1.0, delta=0.01)

    def test_noise_draw_should_validate_shape(self):
        grid = TimeGrid(1.0, 10)
        with assert_raises(InvalidParameterException):
            NoiseDraw(grid, np.zeros((9, 1)))
        assert_equal(NoiseDraw(grid, np.ones(10)).brownian_path()[-1].tolist(), [10.0])

    def test_schedule_should_require_decreasing_theta(self):
        schedule = SmallNoiseSchedule.from_thetas([0.5, 0.25])
        assert_equal(schedule.epsilons.tolist(), [0.25, 0.0625])
        with assert_raises(InvalidParameterException):
            SmallNoiseSchedule.from_thetas([0.25, 0.5])
        with assert_raises(InvalidParameterException):
            SmallNoiseSchedule([(0.1, 0.0)])
        with assert_raises(InvalidParameterException):
            SmallNoiseSchedule([])


class SimulateTestCase(PdldpTestCase):

    def test_ornstein_uhlenbeck_mean_should_decay_exponentially(self):
        grid = TimeGrid(1.0, 100)
        n = 100000
        mean, variance = terminal_moments(get_builtin_spec('ornstein_uhlenbeck'), [1.0], 1.0, grid, n, seed=0)
        assert_less_equal(abs(mean[0] - math.exp(-1.0)), 3.0 * math.sqrt(variance[0] / n) + grid.dt)
        assert_almost_equal(variance[0], (1.0 - math.exp(-2.0)) / 2.0, delta=0.02)

    def test_schilder_path_should_be_scaled_brownian_motion(self):
        grid = TimeGrid(1.0, 10)
        noise = brownian_draw(grid, 1, seed=0, stream=0)
        path = simulate(get_builtin_spec('schilder'), [0.5], 0.1, grid, noise)
        np.testing.assert_allclose(path.values, 0.5 + 0.1 * noise.brownian_path(), rtol=0, atol=1e-14)

    def test_distance_to_noiseless_path_should_be_linear_in_theta(self):
        spec = get_builtin_spec('ornstein_uhlenbeck')
        grid = TimeGrid(1.0, 100)
        noise = brownian_draw(grid, 1, seed=0, stream=0)
        noiseless = simulate(spec, [1.0], 0.0, grid, noise)
        distances = [simulate(spec, [1.0], theta, grid, noise).distance(noiseless) for theta in (0.4, 0.2, 0.1, 0.05)]
        for distance, halved in zip(distances, distances[1:]):
            assert_almost_equal(distance / halved, 2.0, delta=1e-6)
        assert_true(distances[-1] > 0.0)

    def test_ornstein_uhlenbeck_strong_error_should_halve_with_step(self):
        spec = get_builtin_spec('ornstein_uhlenbeck')
        fine_grid = TimeGrid(1.0, 8192)
        coarse_steps = (32, 64, 128, 256)
        errors = np.zeros(len(coarse_steps))
        for stream in range(20):
            increments = brownian_draw(fine_grid, 1, seed=0, stream=stream).increments[:, 0]
            # X(t) = exp(-t) (x0 + int_0^t exp(s) dW(s))
            exact = np.exp(-fine_grid.times) * (1.0 + np.concatenate(
                [[0.0], np.cumsum(np.exp(fine_grid.step_times) * increments)]
            ))
            for i, n_steps in enumerate(coarse_steps):
                grid = TimeGrid(1.0, n_steps)
                factor = fine_grid.n_steps // n_steps
                noise = NoiseDraw(grid, increments.reshape(n_steps, factor).sum(axis=1))
                path = simulate(spec, [1.0], 1.0, grid, noise)
                errors[i] += np.max(np.abs(path.values[:, 0] - exact[::factor]))
        for error, halved in zip(errors, errors[1:]):
            assert_true(1.3 <= error / halved <= 2.8)

    @data_consumer('get_builtin_specs_data')
    def test_sup_moments_should_stay_below_growth_ceiling(self, name, spec):
        grid = TimeGrid(1.0, 50)
        x0 = 0.5 * np.ones(spec.dim_state)
        energy = 2.0
        amplitude = math.sqrt(2.0 * energy / spec.dim_noise)
        controls = [
            Control.zeros(grid, spec.dim_noise),
            Control.constant(grid, np.full(spec.dim_noise, amplitude)),
            Control.from_function(
                grid, lambda t: np.full(spec.dim_noise, math.sqrt(2.0) * amplitude * math.sin(2.0 * math.pi * t))
            ),
        ]
        # skeleton growth estimate with one extra unit of energy per noise dimension for theta <= 1
        ceiling = growth_bound_value(x0, spec.growth_const, grid.horizon, 2.0 * energy + spec.dim_noise)
        increments = brownian_batch(grid, spec.dim_noise, seed=0, streams=range(2000))
        moments = [
            float(np.mean(simulate_batch(spec, x0, theta, grid, increments, nu=nu).sup_norms() ** 2))
            for theta in (1.0, 0.5, 0.1) for nu in controls
        ]
        assert_true(np.all(np.isfinite(moments)))
        assert_less_equal(max(moments), ceiling)

    @data_consumer('get_builtin_specs_data')
    def test_controlled_simulation_without_noise_should_equal_skeleton(self, name, spec):
        rng = self.get_rng()
        grid = TimeGrid(1.0, 50)
        for i in range(self.N_RANDOM_INSTANCES):
            x0 = rng.standard_normal(spec.dim_state)
            nu = Control(grid, rng.standard_normal((grid.n_steps, spec.dim_noise)))
            noise = brownian_draw(grid, spec.dim_noise, seed=0, stream=i)
            assert_true(np.array_equal(
                simulate_controlled(spec, x0, 0.0, nu, grid, noise).values, solve_skeleton(spec, x0, nu, grid).values
            ))

    @data_consumer('get_builtin_specs_data')
    def test_batch_simulation_should_equal_single_paths(self, name, spec):
        grid = TimeGrid(1.0, 20)
        x0 = np.ones(spec.dim_state)
        bundle = simulate_batch(spec, x0, 0.3, grid, brownian_batch(grid, spec.dim_noise, 0, range(5)))
        for i, path in enumerate(bundle):
            single = simulate(spec, x0, 0.3, grid, brownian_draw(grid, spec.dim_noise, 0, i))
            np.testing.assert_allclose(path.values, single.values, rtol=1e-12, atol=1e-12)

    def test_divergent_path_should_raise_exception(self):
        spec = CoefficientSpec(1, 1, [CurrentValue()], AffineMap([[100.0]]), ConstantMap([[1.0]]), growth_const=100.0)
        grid = TimeGrid(1.0, 100)
        with assert_raises(DivergenceException) as cm:
            simulate(spec, [1.0], 0.1, grid, brownian_draw(grid, 1, 0, 0))
        assert_true(0 < cm.exception.index <= grid.n_steps)
        assert_almost_equal(cm.exception.time, cm.exception.index * grid.dt, delta=1e-12)

    def test_noise_on_other_grid_should_raise_exception(self):
        spec = get_builtin_spec('schilder')
        with assert_raises(InvalidParameterException):
            simulate(spec, [0.0], 0.1, TimeGrid(1.0, 10), brownian_draw(TimeGrid(1.0, 20), 1, 0, 0))
        with assert_raises(InvalidParameterException):
            simulate(spec, [0.0], 0.1, TimeGrid(1.0, 10), brownian_draw(TimeGrid(1.0, 10), 2, 0, 0))
        with assert_raises(InvalidParameterException):
            simulate(spec, [0.0], -0.1, TimeGrid(1.0, 10), brownian_draw(TimeGrid(1.0, 10), 1, 0, 0))


class GirsanovTestCase(PdldpTestCase):

    def get_tilts_data(self):
        grid = TimeGrid(1.0, 50)
        return [
            ('constant', Control.constant(grid, [0.5])),
            ('negative', Control.constant(grid, [-1.0])),
            ('oscillating', Control.from_function(grid, lambda t: 0.8 * math.sin(2.0 * math.pi * t))),
        ]

    @data_consumer('get_tilts_data')
    def test_girsanov_weights_should_have_mean_one(self, name, tilt):
        n = 100000
        increments = brownian_batch(tilt.grid, 1, seed=0, streams=range(n))
        weights = np.exp(girsanov_log_weights(tilt.values, 1.0, increments, tilt.grid.dt))
        std_err = np.std(weights, ddof=1) / math.sqrt(n)
        assert_less_equal(abs(np.mean(weights) - 1.0), 3.0 * std_err)

    def test_single_weight_should_match_closed_form(self):
        grid = TimeGrid(1.0, 4)
        noise = NoiseDraw(grid, [0.1, -0.2, 0.3, 0.0])
        nu = Control.constant(grid, [2.0])
        # -(1 / theta) sum nu dW - (1 / (2 theta^2)) |nu|^2 T with theta = 0.5
        assert_almost_equal(girsanov_log_weight(nu, 0.5, noise), -0.8 - 8.0, delta=1e-12)
        with assert_raises(InvalidParameterException):
            girsanov_log_weight(nu, 0.0, noise)
