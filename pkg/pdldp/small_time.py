"""
Small-time large deviations of X(epsilon t): the rescaled problem U(t) = X(epsilon t), the drift-free skeleton rate J
and the rate J^f of images f(X) obtained by the delta method.
"""
import logging
import math

import numpy as np

from scipy.linalg import null_space
from scipy.optimize import minimize

from pdldp.coefficients.grid import Path
from pdldp.coefficients.maps import map_from_descriptor
from pdldp.conf import settings
from pdldp.exception import InvalidParameterException
from pdldp.rate.functional import coefficients_along, rate_of_path
from pdldp.simulation.noise import NoiseDraw
from pdldp.utils import as_matrix, as_vector


logger = logging.getLogger(__name__)


class FunctionalSpec:
    """
    Functional f: R^d -> R^k given by its Jacobian Df(x0) and optionally by a map descriptor of f itself.
    """

    def __init__(self, jacobian, map=None, name=None):
        self.jacobian = as_matrix(jacobian, name='functional jacobian')
        self.map = map
        self.name = name

    @classmethod
    def from_descriptor(cls, jacobian, descriptor=None, name=None):
        jacobian = as_matrix(jacobian, name='functional jacobian')
        coefficient_map = None
        if descriptor is not None:
            coefficient_map = map_from_descriptor(descriptor, (jacobian.shape[0],), jacobian.shape[1])
        return cls(jacobian, coefficient_map, name)

    @property
    def output_dim(self):
        return self.jacobian.shape[0]

    @property
    def input_dim(self):
        return self.jacobian.shape[1]

    def evaluate(self, x):
        if self.map is None:
            raise InvalidParameterException('functional has no map to evaluate')
        return np.asarray(self.map.evaluate(0.0, np.atleast_2d(x)))[0]

    def check_jacobian(self, x0, step=None, rtol=1e-4):
        """
        Central finite differences of f around x0 against the declared Jacobian.

        :return: True when they agree within ``rtol`` relative to the Jacobian norm, None without a map.
        """
        if self.map is None:
            return None
        x0 = as_vector(x0, self.input_dim, name='x0')
        step = settings.FINITE_DIFFERENCE_STEP if step is None else step
        numeric = np.empty_like(self.jacobian)
        for j in range(self.input_dim):
            h = step * max(1.0, abs(x0[j]))
            shift = np.zeros(self.input_dim)
            shift[j] = h
            numeric[:, j] = (self.evaluate(x0 + shift) - self.evaluate(x0 - shift)) / (2.0 * h)
        scale = max(float(np.linalg.norm(self.jacobian)), 1.0)
        return bool(np.linalg.norm(numeric - self.jacobian) <= rtol * scale)


class RescaledProblem:
    """
    Inputs of U(t) = X(epsilon t) on [0, T]: drift epsilon b(epsilon t, .), diffusion sigma(epsilon t, .) and noise
    amplitude sqrt(epsilon).
    """

    def __init__(self, spec, x0, grid, theta, epsilon, original_grid):
        self.spec = spec
        self.x0 = x0
        self.grid = grid
        self.theta = theta
        self.epsilon = epsilon
        self.original_grid = original_grid

    def rescale_noise(self, noise):
        """
        W_hat(s) = epsilon^(-1/2) W(epsilon s) for increments drawn on the original grid [0, epsilon T].
        """
        if noise.grid != self.original_grid:
            raise InvalidParameterException('noise must live on the original grid {!r}'.format(self.original_grid))
        return NoiseDraw(self.grid, noise.increments / math.sqrt(self.epsilon))


def rescale_problem(spec, x0, epsilon, grid):
    """
    :param spec: coefficient spec of X.
    :param x0: initial state.
    :param epsilon: time scale, positive.
    :param grid: grid of the rescaled time on [0, T].
    :return: RescaledProblem; simulating it with theta = sqrt(epsilon) reproduces the law of X on [0, epsilon T].
    """
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise InvalidParameterException('epsilon must be positive')
    x0 = spec.initial_value(x0)
    return RescaledProblem(
        spec.rescaled(epsilon), x0, grid, math.sqrt(epsilon), float(epsilon), grid.rescaled(epsilon * grid.horizon)
    )


def small_time_rate(spec, x0, g):
    """
    J(g): the rate of g against the drift-free skeleton phi' = sigma(t, phi_t) nu.
    """
    return rate_of_path(spec.without_drift(), x0, g)


def _penalized_energy(spec, x0, values, grid):
    # minimal-norm energy plus a stiff penalty on what sigma cannot produce, finite for every candidate
    path = Path(grid, values)
    drift, diffusion = coefficients_along(spec, path)
    residual = np.diff(values, axis=0) / grid.dt - drift
    control = np.einsum('kmd,kd->km', np.linalg.pinv(diffusion), residual)
    unresolved = np.einsum('kdm,km->kd', diffusion, control) - residual
    return 0.5 * grid.dt * (np.sum(control ** 2) + 1e6 * np.sum(unresolved ** 2))


def delta_method_rate(fspec, spec, x0, g, tol=None):
    """
    J^f(g) = inf {J(phi): Df(x0) (phi(t) - x0) = g(t) for all t}.

    :param fspec: FunctionalSpec with Df(x0) of shape (k, d).
    :param spec: coefficient spec of the state.
    :param x0: initial state.
    :param g: path in R^k in displacement coordinates, g(0) = 0.
    :return: rate or math.inf when g leaves the range of Df(x0).
    """
    tol = settings.FEASIBILITY_TOLERANCE if tol is None else tol
    x0 = as_vector(x0, spec.dim_state, name='x0')
    jacobian = fspec.jacobian
    if jacobian.shape[1] != spec.dim_state:
        raise InvalidParameterException(
            'functional jacobian has {} columns but the state has dimension {}'.format(jacobian.shape[1], spec.dim_state)
        )
    if g.dim != jacobian.shape[0]:
        raise InvalidParameterException(
            'target has dimension {} but the functional has {} outputs'.format(g.dim, jacobian.shape[0])
        )

    right_inverse = np.linalg.pinv(jacobian)
    displacement = g.values @ right_inverse.T
    unresolved = np.linalg.norm(displacement @ jacobian.T - g.values, axis=1)
    if np.any(unresolved > tol * (1.0 + np.linalg.norm(g.values, axis=1))):
        logger.info('Target leaves the range of Df(x0), delta method rate is infinite')
        return math.inf

    lifted = x0[None, :] + displacement
    basis = null_space(jacobian)
    if basis.shape[1] == 0:
        return small_time_rate(spec, x0, g.with_values(lifted))

    drift_free = spec.without_drift()
    shape = (g.grid.n_steps, basis.shape[1])

    def candidate(flat):
        values = lifted.copy()
        values[1:] += flat.reshape(shape) @ basis.T
        return values

    result = minimize(
        lambda flat: _penalized_energy(drift_free, x0, candidate(flat), g.grid), np.zeros(shape).ravel(),
        method='L-BFGS-B'
    )
    if not result.success:
        logger.warning('Null-space optimization of the delta method rate stopped: {}'.format(result.message))
    return min(
        small_time_rate(spec, x0, g.with_values(candidate(result.x))),
        small_time_rate(spec, x0, g.with_values(lifted)),
    )
