from pdldp.coefficients.grid import Path, PathBundle
from pdldp.exception import InvalidParameterException

from .girsanov import girsanov_log_weight, girsanov_log_weights  # noqa: F401
from .integrator import EulerMaruyamaIntegrator
from .noise import NoiseDraw, SmallNoiseSchedule, brownian_draw, brownian_batch, get_stream_generator  # noqa: F401


def _check_noise(spec, grid, noise):
    if noise.grid != grid:
        raise InvalidParameterException('noise grid {!r} does not match {!r}'.format(noise.grid, grid))
    if noise.dim != spec.dim_noise:
        raise InvalidParameterException(
            'noise has dimension {} but the coefficient spec expects {}'.format(noise.dim, spec.dim_noise)
        )


def _control_values(spec, grid, nu):
    if nu is None:
        return None
    if nu.grid != grid:
        raise InvalidParameterException('control grid {!r} does not match {!r}'.format(nu.grid, grid))
    if nu.dim != spec.dim_noise:
        raise InvalidParameterException(
            'control has dimension {} but the coefficient spec expects {}'.format(nu.dim, spec.dim_noise)
        )
    return nu.values


def simulate(spec, x0, theta, grid, noise):
    """
    Euler-Maruyama path of X = x0 + int b(s, X_s) ds + theta int sigma(s, X_s) dW.
    """
    _check_noise(spec, grid, noise)
    values = EulerMaruyamaIntegrator(spec, grid).integrate(x0, theta, increments=noise.increments[None, :, :])
    return Path(grid, values[0])


def simulate_controlled(spec, x0, theta, nu, grid, noise):
    """
    Euler-Maruyama path of the controlled equation with drift b + sigma nu.
    """
    _check_noise(spec, grid, noise)
    values = EulerMaruyamaIntegrator(spec, grid).integrate(
        x0, theta, control=_control_values(spec, grid, nu), increments=noise.increments[None, :, :]
    )
    return Path(grid, values[0])


def simulate_batch(spec, x0, theta, grid, increments, nu=None):
    """
    Paths for a stack of noise increments (batch, n_steps, m), optionally tilted by the control nu.
    """
    values = EulerMaruyamaIntegrator(spec, grid).integrate(
        x0, theta, control=_control_values(spec, grid, nu), increments=increments
    )
    return PathBundle(grid, values)
