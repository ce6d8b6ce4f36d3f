import math

from unittest.case import TestCase

import numpy as np

from django.test.utils import override_settings

from germanium.decorators import data_consumer
from germanium.tools import (
    assert_true, assert_false, assert_equal, assert_raises, assert_almost_equal, assert_less_equal, assert_is_none
)

from pdldp.coefficients import (
    TimeGrid, Path, CoefficientSpec, CurrentValue, RunningIntegral, RunningAverage, AffineMap, ConstantMap, ProductMap,
    SigmoidMap
)
from pdldp.coefficients.builtin import get_builtin_spec
from pdldp.conf import settings
from pdldp.exception import InvalidParameterException
from pdldp.rate import (
    EventParser, EventParserError, Infeasible, OptimizerConfig, SupNormExceed, TerminalBall, TerminalHalfSpace,
    TerminalPoint, control_energy, control_for_path, event_from_descriptor, get_event, min_rate_event, rate_of_path
)
from pdldp.rate.optimizer import GradientMethod, PenaltyObjective, SkeletonAdjoint
from pdldp.skeleton import Control, solve_skeleton

from .test_case import PdldpTestCase


def degenerate_spec():
    return CoefficientSpec(1, 1, [CurrentValue()], AffineMap([[-1.0]]), ConstantMap([[0.0]]), growth_const=1.0)


class EventTestCase(TestCase):

    def test_events_should_be_parsed_from_expressions(self):
        point = EventParser().parse('x(T) = [1]')
        assert_true(isinstance(point, TerminalPoint))
        assert_equal(point.point.tolist(), [1.0])
        assert_is_none(point.tol)
        assert_equal(EventParser().parse('x(T) = [1, 0] within 0.01').tol, 0.01)

        half_space = EventParser().parse('[1, -2] . x(T) >= 1.5')
        assert_true(isinstance(half_space, TerminalHalfSpace))
        assert_equal(half_space.normal.tolist(), [1.0, -2.0])
        assert_equal(half_space.level, 1.5)

        ball = EventParser().parse('|x(T) - [0]| <= 0.5')
        assert_true(isinstance(ball, TerminalBall))
        assert_equal(ball.radius, 0.5)

        sup_norm = EventParser().parse('sup |x| >= 1')
        assert_true(isinstance(sup_norm, SupNormExceed))
        assert_equal(sup_norm.level, 1.0)

    def test_invalid_expression_should_raise_parser_error(self):
        for value in ('x(T) > 1', 'x(T) = 1', '|x(T) - [0]| <= -1', 'sup |x| >= 0', '[0] . x(T) >= 1', ''):
            with assert_raises(EventParserError):
                EventParser().parse(value)

    def test_events_should_be_built_from_descriptors(self):
        event = event_from_descriptor({'kind': 'terminal_half_space', 'normal': [1], 'level': 1})
        assert_true(isinstance(event, TerminalHalfSpace))
        assert_equal(str(event_from_descriptor(event.to_descriptor())), str(event))
        assert_equal(event_from_descriptor({'kind': 'terminal_point', 'point': [2], 'tol': 0.1}).tol, 0.1)
        for descriptor in (
                {'kind': 'terminal_half_space', 'normal': [1]},
                {'kind': 'terminal_cube', 'level': 1},
                {'kind': 'sup_norm_exceed', 'level': 1, 'normal': [1]},
                {'kind': 'terminal_ball', 'center': 'a', 'radius': 1},
                [1, 2]):
            with assert_raises(InvalidParameterException):
                event_from_descriptor(descriptor)

    def test_get_event_should_accept_expression_descriptor_and_event(self):
        event = SupNormExceed(2.0)
        assert_true(get_event(event) is event)
        assert_true(isinstance(get_event('sup |x| >= 2'), SupNormExceed))
        assert_true(isinstance(get_event({'kind': 'terminal_ball', 'center': [0], 'radius': 1}), TerminalBall))

    def test_events_should_classify_batches_of_paths(self):
        values = np.array([
            [[0.0], [0.5], [1.2]],
            [[0.0], [-1.5], [0.1]],
            [[0.0], [0.2], [0.9995]],
        ])
        assert_equal(TerminalHalfSpace([1.0], 1.0).contains(values).tolist(), [True, False, False])
        assert_equal(TerminalBall([0.0], 0.5).contains(values).tolist(), [False, True, False])
        assert_equal(SupNormExceed(1.0).contains(values).tolist(), [True, True, False])
        assert_equal(TerminalPoint([1.0]).contains(values).tolist(), [False, False, True])
        assert_equal(TerminalPoint([1.0], tol=0.3).contains(values).tolist(), [True, False, True])

    def test_residual_should_vanish_inside_event(self):
        values = np.array([[0.0], [0.5], [1.2]])
        assert_equal(TerminalHalfSpace([1.0], 1.0).residual(values), 0.0)
        assert_almost_equal(TerminalHalfSpace([2.0], 3.0).residual(values), 0.3, delta=1e-12)
        assert_almost_equal(SupNormExceed(2.0).residual(values), 0.8, delta=1e-12)
        assert_almost_equal(TerminalBall([0.0], 1.0).residual(values), 0.2, delta=1e-12)
        assert_equal(TerminalPoint([1.0], tol=0.5).residual(values), 0.0)

    def test_event_dimension_should_match_state(self):
        with assert_raises(InvalidParameterException):
            TerminalPoint([1.0, 0.0]).check_dim(1)
        SupNormExceed(1.0).check_dim(3)


class RateOfPathTestCase(PdldpTestCase):

    def test_ornstein_uhlenbeck_rate_of_linear_path(self):
        grid = TimeGrid(1.0, 10000)
        g = Path(grid, grid.times)
        # 1/2 int_0^1 (1 + t)^2 dt
        assert_almost_equal(rate_of_path(get_builtin_spec('ornstein_uhlenbeck'), [0.0], g), 7.0 / 6.0, delta=1e-3)

    def test_schilder_rate_should_be_kinetic_energy(self):
        grid = TimeGrid(2.0, 100)
        g = Path.straight_line(grid, [0.0], [3.0])
        assert_almost_equal(rate_of_path(get_builtin_spec('schilder'), [0.0], g), 9.0 / 4.0, delta=1e-9)

    def test_recovered_control_should_reproduce_path(self):
        spec = get_builtin_spec('delayed_sigmoid')
        grid = TimeGrid(1.0, 200)
        g = Path.from_function(grid, lambda t: math.sin(3.0 * t))
        control = control_for_path(spec, [0.0], g)
        np.testing.assert_allclose(solve_skeleton(spec, [0.0], control, grid).values, g.values, atol=1e-9)

    def test_energy_should_be_riemann_sum_of_control(self):
        grid = TimeGrid(1.0, 10000)
        # 1/2 int_0^1 t^2 dt
        assert_almost_equal(control_energy(Control.from_function(grid, lambda t: t)), 1.0 / 6.0, delta=1e-3)
        assert_almost_equal(control_energy(Control.constant(grid, [3.0])), 4.5, delta=1e-9)
        assert_equal(control_energy(Control.zeros(grid, 2)), 0.0)

    @data_consumer('get_builtin_specs_data')
    def test_uncontrolled_flow_should_need_no_control(self, name, spec):
        grid = TimeGrid(1.0, 1000)
        x0 = 0.5 * np.ones(spec.dim_state)
        control = control_for_path(spec, x0, solve_skeleton(spec, x0, None, grid))
        assert_true(control)
        assert_less_equal(control_energy(control), 1e-8)

    @data_consumer('get_builtin_specs_data')
    def test_rate_should_vanish_only_near_uncontrolled_flow(self, name, spec):
        grid = TimeGrid(1.0, 200)
        x0 = 0.5 * np.ones(spec.dim_state)
        flow = solve_skeleton(spec, x0, None, grid)
        bump = np.sin(np.pi * grid.times)[:, None] * np.ones((1, spec.dim_state))
        tol = 1e-4
        assert_less_equal(rate_of_path(spec, x0, flow), tol)
        assert_less_equal(rate_of_path(spec, x0, flow.with_values(flow.values + 1e-4 * bump)), tol)
        assert_true(rate_of_path(spec, x0, flow.with_values(flow.values + 0.1 * bump)) > tol)

    def test_path_with_wrong_start_should_be_infeasible(self):
        grid = TimeGrid(1.0, 10)
        result = control_for_path(get_builtin_spec('schilder'), [0.0], Path.straight_line(grid, [1.0], [2.0]))
        assert_true(isinstance(result, Infeasible))
        assert_false(result)
        assert_equal(result.index, 0)
        assert_equal(rate_of_path(get_builtin_spec('schilder'), [0.0], Path.straight_line(grid, [1.0], [2.0])), math.inf)

    def test_path_outside_diffusion_range_should_have_infinite_rate(self):
        grid = TimeGrid(1.0, 10)
        assert_equal(rate_of_path(degenerate_spec(), [0.0], Path.straight_line(grid, [0.0], [1.0])), math.inf)
        # the uncontrolled flow itself is always attainable
        assert_equal(rate_of_path(degenerate_spec(), [1.0], solve_skeleton(degenerate_spec(), [1.0], None, grid)), 0.0)


class OptimizerConfigTestCase(PdldpTestCase):

    def test_defaults_should_be_loaded_from_settings(self):
        config = OptimizerConfig()
        assert_equal(config.to_dict(), dict(settings.OPTIMIZER))
        assert_equal(OptimizerConfig(penalty_rounds=3).penalties(), [10.0, 100.0, 1000.0])

    @override_settings(PDLDP_OPTIMIZER={
        'max_iters': 5, 'penalty_initial': 1.0, 'penalty_growth': 2.0, 'penalty_rounds': 2, 'step_size': 1.0,
        'gtol': 1e-6, 'feasibility_tolerance': 1e-3, 'gradient': 'finite_difference', 'method': 'lbfgsb',
        'control_bound': 10.0,
    })
    def test_defaults_should_follow_setting_override(self):
        config = OptimizerConfig()
        assert_equal(config.max_iters, 5)
        assert_equal(config.gradient, GradientMethod.FINITE_DIFFERENCE)
        assert_equal(config.penalties(), [1.0, 2.0])

    def test_invalid_options_should_raise_exception(self):
        for options in ({'unknown': 1}, {'method': 'newton'}, {'gradient': 'symbolic'}, {'max_iters': 0},
                        {'penalty_growth': 0.5}, {'control_bound': 0.0}):
            with assert_raises(InvalidParameterException):
                OptimizerConfig(**options)


class AdjointGradientTestCase(PdldpTestCase):

    @data_consumer('get_builtin_specs_data')
    def test_adjoint_gradient_should_match_finite_differences(self, name, spec):
        rng = self.get_rng()
        grid = TimeGrid(1.0, 20)
        x0 = 0.5 * rng.standard_normal(spec.dim_state)
        control = rng.standard_normal((grid.n_steps, spec.dim_noise))
        event = TerminalHalfSpace(np.ones(spec.dim_state), 10.0)
        adjoint = SkeletonAdjoint(spec, x0, grid)
        _, gradient = PenaltyObjective(adjoint, event, 10.0, GradientMethod.ADJOINT).value_and_gradient(
            control.ravel()
        )
        _, numeric = PenaltyObjective(adjoint, event, 10.0, GradientMethod.FINITE_DIFFERENCE).value_and_gradient(
            control.ravel()
        )
        np.testing.assert_allclose(gradient, numeric, rtol=1e-4, atol=1e-6)

    def test_adjoint_gradient_with_trapezoid_integral_and_product_map(self):
        spec = CoefficientSpec(
            1, 1, [CurrentValue(), RunningIntegral('trapezoid'), RunningAverage()],
            AffineMap([[-1.0, 0.5, 0.2]]),
            ProductMap([
                SigmoidMap(AffineMap([[0.3, 1.0, 0.0]], output_shape=(1, 1)), 'logistic', shift=0.5),
                SigmoidMap(AffineMap([[0.0, 0.0, 1.0]], output_shape=(1, 1)), 'arctan', shift=2.0),
            ]),
            growth_const=5.0
        )
        grid = TimeGrid(1.0, 15)
        control = self.get_rng(3).standard_normal((grid.n_steps, 1))
        adjoint = SkeletonAdjoint(spec, np.array([0.3]), grid)
        event = SupNormExceed(20.0)
        _, gradient = PenaltyObjective(adjoint, event, 5.0, GradientMethod.ADJOINT).value_and_gradient(control.ravel())
        _, numeric = PenaltyObjective(adjoint, event, 5.0, GradientMethod.FINITE_DIFFERENCE).value_and_gradient(
            control.ravel()
        )
        np.testing.assert_allclose(gradient, numeric, rtol=1e-4, atol=1e-6)


class MinRateEventTestCase(PdldpTestCase):

    def test_schilder_terminal_point_rate(self):
        grid = TimeGrid(1.0, 1000)
        result = min_rate_event(get_builtin_spec('schilder'), [0.0], TerminalPoint([1.0]), grid)
        assert_almost_equal(result.value, 0.5, delta=1e-3)
        assert_true(result.converged)
        assert_false(result.infinite)
        assert_less_equal(result.minimizer_path.distance(Path(grid, grid.times)), 1e-2)
        assert_almost_equal(result.minimizer_control.energy, result.value, delta=1e-15)

    def test_schilder_half_space_rate(self):
        grid = TimeGrid(1.0, 200)
        result = min_rate_event(get_builtin_spec('schilder'), [0.0], TerminalHalfSpace([1.0], 1.0), grid)
        assert_almost_equal(result.value, 0.5, delta=1e-3)
        assert_less_equal(result.feasibility_residual, 1e-4)

    def test_schilder_rate_should_scale_with_level_and_horizon(self):
        spec = get_builtin_spec('schilder')
        grid = TimeGrid(1.0, 200)
        unit = min_rate_event(spec, [0.0], TerminalPoint([1.0]), grid).value
        for level in (0.5, 2.0):
            value = min_rate_event(spec, [0.0], TerminalPoint([level]), grid).value
            assert_almost_equal(value / (level ** 2 * unit), 1.0, delta=1e-2)
        assert_almost_equal(
            min_rate_event(spec, [0.0], TerminalPoint([1.0]), TimeGrid(2.0, 200)).value, 0.25, delta=2.5e-3
        )

    def test_schilder_sup_norm_rate(self):
        grid = TimeGrid(1.0, 200)
        result = min_rate_event(get_builtin_spec('schilder'), [0.0], SupNormExceed(1.0), grid)
        assert_almost_equal(result.value, 0.5, delta=5e-3)

    def test_ornstein_uhlenbeck_half_space_rate(self):
        grid = TimeGrid(1.0, 200)
        result = min_rate_event(get_builtin_spec('ornstein_uhlenbeck'), [0.0], TerminalHalfSpace([1.0], 1.0), grid)
        # 1 / (2 int_0^1 exp(-2 (1 - s)) ds)
        assert_almost_equal(result.value, 1.0 / (1.0 - math.exp(-2.0)), delta=1e-2)

    def test_event_containing_uncontrolled_flow_should_have_zero_rate(self):
        grid = TimeGrid(1.0, 100)
        spec = get_builtin_spec('ornstein_uhlenbeck')
        uncontrolled = solve_skeleton(spec, [1.0], None, grid)
        for event in (TerminalBall(uncontrolled.terminal, 0.01), TerminalHalfSpace([1.0], -1.0), SupNormExceed(0.5)):
            result = min_rate_event(spec, [1.0], event, grid)
            assert_equal(result.value, 0.0)
            assert_equal(result.iterations, 0)
            assert_true(result.converged)
            assert_equal(result.minimizer_path, uncontrolled)

    def test_rate_should_not_exceed_rate_of_feasible_paths(self):
        rng = self.get_rng()
        grid = TimeGrid(1.0, 100)
        event = TerminalHalfSpace([1.0], 1.0)
        for name in ('schilder', 'ornstein_uhlenbeck'):
            spec = get_builtin_spec(name)
            value = min_rate_event(spec, [0.0], event, grid).value
            for _ in range(self.N_RANDOM_INSTANCES):
                level, coefficients = rng.uniform(1.0, 1.5), 0.3 * rng.standard_normal(3)
                g = Path.from_function(grid, lambda t: level * t + sum(
                    c * math.sin((j + 1) * math.pi * t) for j, c in enumerate(coefficients)
                ))
                assert_true(event.contains(g.values[None, :, :])[0])
                assert_less_equal(value, rate_of_path(spec, [0.0], g) + 1e-6)

    def test_unreachable_event_should_have_infinite_rate(self):
        grid = TimeGrid(1.0, 20)
        result = min_rate_event(
            degenerate_spec(), [0.0], TerminalPoint([1.0]), grid, OptimizerConfig(penalty_rounds=2)
        )
        assert_true(result.infinite)
        assert_equal(result.value, math.inf)
        assert_false(result.converged)

    def test_alternative_optimizers_should_agree(self):
        grid = TimeGrid(1.0, 50)
        spec = get_builtin_spec('schilder')
        for options in ({'method': 'projected_gradient'}, {'gradient': 'finite_difference'}):
            result = min_rate_event(spec, [0.0], TerminalPoint([1.0]), grid, OptimizerConfig(**options))
            assert_almost_equal(result.value, 0.5, delta=1e-2)
            assert_true(result.converged)

    @data_consumer('get_builtin_specs_data')
    def test_minimizer_should_reach_event_for_builtin_specs(self, name, spec):
        grid = TimeGrid(1.0, 40)
        event = TerminalHalfSpace(np.ones(spec.dim_state), 1.5)
        result = min_rate_event(spec, np.zeros(spec.dim_state), event, grid)
        assert_true(result.converged)
        assert_true(0.0 < result.value < math.inf)
        assert_less_equal(result.value, rate_of_path(
            spec, np.zeros(spec.dim_state), Path.straight_line(grid, np.zeros(spec.dim_state), event.target_point(
                solve_skeleton(spec, np.zeros(spec.dim_state), None, grid).terminal
            ))
        ) + 1e-6)
