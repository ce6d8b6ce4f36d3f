"""
Discretize-then-optimize minimization of the control energy over an event:

    min_nu 1/2 sum_k |nu_k|^2 dt   subject to   solve_skeleton(nu) in event

solved by a sequence of quadratic penalty problems 1/2 sum |nu|^2 dt + mu/2 residual(phi)^2 with increasing mu.
"""
import logging
import math

import numpy as np

from scipy.optimize import minimize

from pdldp.coefficients.grid import Path
from pdldp.conf import settings
from pdldp.exception import InvalidParameterException
from pdldp.simulation.integrator import EulerMaruyamaIntegrator
from pdldp.skeleton import Control, solve_skeleton
from pdldp.utils import StrEnum, as_vector

from .functional import control_for_path, control_energy


logger = logging.getLogger(__name__)


class GradientMethod(StrEnum):

    ADJOINT = 'adjoint'
    FINITE_DIFFERENCE = 'finite_difference'


class OptimizationMethod(StrEnum):

    LBFGSB = 'lbfgsb'
    PROJECTED_GRADIENT = 'projected_gradient'


class OptimizerConfig:
    """
    Settings of the penalty optimization, missing values are taken from the ``PDLDP_OPTIMIZER`` setting.

    :param max_iters: maximal number of iterations of every penalty round.
    :param penalty_initial: first penalty weight mu.
    :param penalty_growth: factor applied to mu after every round.
    :param penalty_rounds: number of penalty rounds.
    :param step_size: initial step of the projected gradient line search.
    :param gtol: gradient norm stopping tolerance.
    :param feasibility_tolerance: accepted event residual of the minimizer.
    :param gradient: ``adjoint`` or ``finite_difference``.
    :param method: ``lbfgsb`` or ``projected_gradient``.
    :param control_bound: box |nu_k^i| <= bound of the projection.
    """

    fields = (
        'max_iters', 'penalty_initial', 'penalty_growth', 'penalty_rounds', 'step_size', 'gtol',
        'feasibility_tolerance', 'gradient', 'method', 'control_bound'
    )

    def __init__(self, **kwargs):
        unknown = set(kwargs) - set(self.fields)
        if unknown:
            raise InvalidParameterException('Unknown optimizer options {}'.format(sorted(unknown)))
        options = dict(settings.OPTIMIZER)
        options.update(kwargs)

        self.max_iters = int(options['max_iters'])
        self.penalty_initial = float(options['penalty_initial'])
        self.penalty_growth = float(options['penalty_growth'])
        self.penalty_rounds = int(options['penalty_rounds'])
        self.step_size = float(options['step_size'])
        self.gtol = float(options['gtol'])
        self.feasibility_tolerance = float(options['feasibility_tolerance'])
        self.control_bound = float(options['control_bound'])
        if options['gradient'] not in set(GradientMethod):
            raise InvalidParameterException('Unknown gradient method "{}"'.format(options['gradient']))
        if options['method'] not in set(OptimizationMethod):
            raise InvalidParameterException('Unknown optimization method "{}"'.format(options['method']))
        self.gradient = GradientMethod(options['gradient'])
        self.method = OptimizationMethod(options['method'])

        if self.max_iters < 1 or self.penalty_rounds < 1:
            raise InvalidParameterException('max_iters and penalty_rounds must be positive')
        if self.penalty_initial <= 0 or self.penalty_growth < 1:
            raise InvalidParameterException('penalty must start positive and must not decrease')
        if self.step_size <= 0 or self.gtol < 0 or self.feasibility_tolerance < 0 or self.control_bound <= 0:
            raise InvalidParameterException('step size, tolerances and control bound must be positive')

    def to_dict(self):
        return {field: getattr(self, field) for field in self.fields}

    def penalties(self):
        return [self.penalty_initial * self.penalty_growth ** i for i in range(self.penalty_rounds)]


class RateResult:
    """
    Outcome of min_rate_event. ``value`` is the energy of ``minimizer_control`` or ``math.inf`` with
    ``infinite`` set when the control cannot move the path into the event.
    """

    def __init__(self, value, minimizer_control, minimizer_path, iterations, final_gradient_norm,
                 feasibility_residual, converged, infinite=False):
        self.value = math.inf if infinite else value
        self.infinite = infinite
        self.minimizer_control = minimizer_control
        self.minimizer_path = minimizer_path
        self.iterations = iterations
        self.final_gradient_norm = final_gradient_norm
        self.feasibility_residual = feasibility_residual
        self.converged = converged

    def to_dict(self):
        return {
            'value': self.value,
            'infinite': self.infinite,
            'iterations': self.iterations,
            'final_gradient_norm': self.final_gradient_norm,
            'feasibility_residual': self.feasibility_residual,
            'converged': self.converged,
        }

    def __repr__(self):
        return '<RateResult value={!r} iterations={} residual={!r}>'.format(
            self.value, self.iterations, self.feasibility_residual
        )


class SkeletonAdjoint:
    """
    Forward Euler sweep of the skeleton with recorded features and the reverse sweep giving the derivative of a
    function of the path with respect to every control value.
    """

    def __init__(self, spec, x0, grid):
        self.spec = spec
        self.x0 = x0
        self.grid = grid
        self.integrator = EulerMaruyamaIntegrator(spec, grid)
        self._zero_noise = np.zeros((1, grid.n_steps, spec.dim_noise))

    def forward(self, control):
        values, features = self.integrator.integrate(
            self.x0, 0.0, control=control, increments=self._zero_noise, record_features=True
        )
        return values[0], features[0]

    def backward(self, control, values, features, path_gradient):
        """
        :param control: control values (n, m).
        :param values: skeleton rows (n + 1, d) of the forward sweep.
        :param features: recorded feature vectors (n, z_size).
        :param path_gradient: derivative of the objective with respect to the path rows (n + 1, d).
        :return: derivative with respect to the control values (n, m).
        """
        spec, grid, dt = self.spec, self.grid, self.grid.dt
        t = grid.step_times
        drift_jacobian = spec.drift_map.jacobian(t, features)
        diffusion = np.asarray(spec.diffusion(t, features))
        diffusion_jacobian = spec.diffusion_map.jacobian(t, features)

        adjoint = np.array(path_gradient, dtype=float)
        control_gradient = np.empty_like(control)
        feature_adjoints = spec.features.create_adjoints(grid, values)
        for k in range(grid.n_steps - 1, -1, -1):
            adjoint[k] += adjoint[k + 1]
            upstream = adjoint[k + 1]
            control_gradient[k] = dt * diffusion[k].T @ upstream
            feature_gradient = dt * (
                drift_jacobian[k].T @ upstream +
                np.einsum('ijz,i,j->z', diffusion_jacobian[k], upstream, control[k])
            )
            spec.features.distribute(feature_adjoints, k, feature_gradient, adjoint)
        return control_gradient


class PenaltyObjective:

    def __init__(self, adjoint, constraint, penalty, gradient_method):
        self.adjoint = adjoint
        self.constraint = constraint
        self.penalty = penalty
        self.gradient_method = gradient_method
        self.shape = (adjoint.grid.n_steps, adjoint.spec.dim_noise)
        self.dt = adjoint.grid.dt

    def value(self, control):
        values, _ = self.adjoint.forward(control)
        residual = self.constraint.residual(values)
        return 0.5 * np.sum(control ** 2) * self.dt + 0.5 * self.penalty * residual ** 2

    def _finite_difference_gradient(self, control):
        gradient = np.empty_like(control)
        step = settings.FINITE_DIFFERENCE_STEP
        for index in np.ndindex(*control.shape):
            h = step * max(1.0, abs(control[index]))
            forward, backward = control.copy(), control.copy()
            forward[index] += h
            backward[index] -= h
            gradient[index] = (self.value(forward) - self.value(backward)) / (2.0 * h)
        return gradient

    def value_and_gradient(self, flat):
        control = flat.reshape(self.shape)
        values, features = self.adjoint.forward(control)
        residual = self.constraint.residual(values)
        value = 0.5 * np.sum(control ** 2) * self.dt + 0.5 * self.penalty * residual ** 2
        if self.gradient_method == GradientMethod.FINITE_DIFFERENCE:
            gradient = self._finite_difference_gradient(control)
        else:
            gradient = self.dt * control
            if residual > 0:
                path_gradient = self.penalty * residual * self.constraint.residual_gradient(values)
                gradient = gradient + self.adjoint.backward(control, values, features, path_gradient)
        return value, gradient.ravel()


def _minimize_lbfgsb(objective, start, opt):
    bounds = [(-opt.control_bound, opt.control_bound)] * start.size
    result = minimize(
        objective.value_and_gradient, start, jac=True, method='L-BFGS-B', bounds=bounds,
        options={'maxiter': opt.max_iters, 'gtol': opt.gtol, 'ftol': opt.gtol}
    )
    _, gradient = objective.value_and_gradient(result.x)
    return result.x, int(result.nit), gradient


def _minimize_projected_gradient(objective, start, opt):
    """
    Projected gradient descent on the box with Armijo backtracking, the step is measured in the L2 metric of the
    control (gradient divided by dt).
    """
    current = np.clip(start, -opt.control_bound, opt.control_bound)
    value, gradient = objective.value_and_gradient(current)
    step = opt.step_size
    iterations = 0
    for iterations in range(1, opt.max_iters + 1):
        if np.linalg.norm(gradient) <= opt.gtol:
            break
        direction = gradient / objective.dt
        while True:
            candidate = np.clip(current - step * direction, -opt.control_bound, opt.control_bound)
            candidate_value, candidate_gradient = objective.value_and_gradient(candidate)
            decrease = gradient @ (current - candidate)
            if candidate_value <= value - 1e-4 * decrease or step < 1e-14:
                break
            step *= 0.5
        if np.array_equal(candidate, current):
            break
        current, value, gradient = candidate, candidate_value, candidate_gradient
        step = min(step * 2.0, opt.step_size)
    return current, iterations, gradient


OPTIMIZERS = {
    OptimizationMethod.LBFGSB: _minimize_lbfgsb,
    OptimizationMethod.PROJECTED_GRADIENT: _minimize_projected_gradient,
}


def _initial_candidates(spec, x0, event, grid, uncontrolled):
    candidates = [np.zeros((grid.n_steps, spec.dim_noise))]
    target = event.target_point(uncontrolled.terminal)
    control = control_for_path(spec, x0, Path.straight_line(grid, x0, target))
    if control:
        candidates.insert(0, np.array(control.values))
    return candidates


def min_rate_event(spec, x0, event, grid, opt=None):
    """
    Minimal control energy of skeleton paths inside the event, an approximation of inf_{g in event} I(g).

    :param spec: coefficient spec.
    :param x0: initial state.
    :param event: path event.
    :param grid: time grid of the discretized controls.
    :param opt: OptimizerConfig, defaults from settings.
    :return: RateResult.
    """
    opt = opt or OptimizerConfig()
    x0 = as_vector(x0, spec.dim_state, name='x0')
    event.check_dim(spec.dim_state)

    uncontrolled = solve_skeleton(spec, x0, None, grid)
    if event.residual(uncontrolled.values) == 0:
        logger.info('Uncontrolled flow is already inside {}, rate is 0'.format(event))
        return RateResult(0.0, Control.zeros(grid, spec.dim_noise), uncontrolled, 0, 0.0, 0.0, True)

    constraint = event.get_constraint()
    adjoint = SkeletonAdjoint(spec, x0, grid)
    penalties = opt.penalties()
    first = PenaltyObjective(adjoint, constraint, penalties[0], opt.gradient)
    current = min(_initial_candidates(spec, x0, event, grid, uncontrolled), key=first.value).ravel()

    iterations, gradient = 0, np.zeros_like(current)
    for penalty in penalties:
        objective = PenaltyObjective(adjoint, constraint, penalty, opt.gradient)
        current, round_iterations, gradient = OPTIMIZERS[opt.method](objective, current, opt)
        iterations += round_iterations
        logger.info('Penalty round mu={!r}: {} iterations, objective {!r}'.format(
            penalty, round_iterations, objective.value(current.reshape(objective.shape))
        ))

    control = Control(grid, current.reshape((grid.n_steps, spec.dim_noise)))
    path = solve_skeleton(spec, x0, control, grid)
    residual = constraint.residual(path.values)
    gradient_norm = float(np.linalg.norm(gradient))
    converged = residual <= opt.feasibility_tolerance

    infinite = False
    if not converged:
        values, features = adjoint.forward(np.array(control.values))
        sensitivity = adjoint.backward(
            np.array(control.values), values, features, constraint.residual_gradient(values)
        )
        infinite = not np.any(sensitivity)
        logger.warning('Rate minimization for {} did not reach the event: residual {!r}{}'.format(
            event, residual, ', the control cannot move the path' if infinite else ''
        ))
    return RateResult(
        control_energy(control), control, path, iterations, gradient_norm, residual, converged, infinite
    )
