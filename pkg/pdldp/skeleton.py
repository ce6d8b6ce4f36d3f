"""
Deterministic controlled path-dependent equation

    phi(t) = x0 + int_0^t [b(s, phi_s) + sigma(s, phi_s) nu(s)] ds

and the growth estimate of its solutions.
"""
import math

import numpy as np

from pdldp.coefficients.grid import Path
from pdldp.exception import InvalidParameterException, NonFiniteValueException
from pdldp.simulation.integrator import EulerMaruyamaIntegrator
from pdldp.utils import frozen


class Control:
    """
    Piecewise constant control, row k is the value on [t_k, t_{k+1}).
    """

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[0] != grid.n_steps:
            raise InvalidParameterException(
                'control values must have shape ({}, m), got {}'.format(grid.n_steps, values.shape)
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteValueException('control contains non-finite values')
        self.grid = grid
        self.values = frozen(values)

    @classmethod
    def zeros(cls, grid, m):
        return cls(grid, np.zeros((grid.n_steps, m)))

    @classmethod
    def constant(cls, grid, value):
        value = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(grid, np.tile(value, (grid.n_steps, 1)))

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, np.array([np.atleast_1d(func(t)) for t in grid.step_times], dtype=float))

    @property
    def dim(self):
        return self.values.shape[1]

    @property
    def norm_sq(self):
        """||nu||_2^2 = sum_k |nu(t_k)|^2 dt."""
        return float(np.sum(self.values ** 2) * self.grid.dt)

    @property
    def energy(self):
        return 0.5 * self.norm_sq

    def __eq__(self, other):
        return isinstance(other, Control) and self.grid == other.grid and np.array_equal(self.values, other.values)

    __hash__ = None

    def __repr__(self):
        return '<Control grid={!r} dim={} energy={!r}>'.format(self.grid, self.dim, self.energy)


def solve_skeleton(spec, x0, nu, grid):
    """
    Explicit Euler solution of the skeleton equation, the arithmetic is the controlled simulation with theta = 0.

    :param spec: coefficient spec.
    :param x0: initial state.
    :param nu: control on ``grid`` or None for the uncontrolled flow.
    :param grid: time grid.
    :return: Path.
    """
    control = None
    if nu is not None:
        if nu.grid != grid:
            raise InvalidParameterException('control grid {!r} does not match {!r}'.format(nu.grid, grid))
        if nu.dim != spec.dim_noise:
            raise InvalidParameterException(
                'control has dimension {} but the coefficient spec expects {}'.format(nu.dim, spec.dim_noise)
            )
        control = nu.values
    values = EulerMaruyamaIntegrator(spec, grid).integrate(
        x0, 0.0, control=control, increments=np.zeros((1, grid.n_steps, spec.dim_noise))
    )
    return Path(grid, values[0])


def growth_bound_value(x0, M, t, nu_norm_sq):
    """
    Bound on sup_{s <= t} |phi(s)|^2 for skeleton solutions of a spec with growth constant M:

        (3 |x0|^2 + 9 M^2 t (t + ||nu||^2) + 3 M^2 t^3 (t + ||nu||^2)) exp(9 M^2 (t + ||nu||^2))
    """
    if M < 0 or t < 0 or nu_norm_sq < 0:
        raise InvalidParameterException('growth constant, time and control norm must be non-negative')
    x0_sq = float(np.sum(np.asarray(x0, dtype=float) ** 2))
    exposure = t + nu_norm_sq
    polynomial = 3.0 * x0_sq + 9.0 * M ** 2 * t * exposure + 3.0 * M ** 2 * t ** 3 * exposure
    if polynomial == 0:
        return 0.0
    try:
        return polynomial * math.exp(9.0 * M ** 2 * exposure)
    except OverflowError:
        return math.inf
