import numpy as np

from pdldp.exception import InvalidParameterException


def girsanov_log_weights(control_values, theta, increments, dt):
    """
    log dP~/dP = -(1 / theta) sum_k nu_k . dW_k - (1 / (2 theta^2)) sum_k |nu_k|^2 dt for every noise row.

    :param control_values: control (n_steps, m).
    :param increments: noise increments (batch, n_steps, m).
    :return: log weights (batch,).
    """
    if not theta > 0:
        raise InvalidParameterException('Girsanov weights need theta > 0')
    if increments.shape[1:] != control_values.shape:
        raise InvalidParameterException(
            'control shape {} does not match noise shape {}'.format(control_values.shape, increments.shape[1:])
        )
    stochastic = np.einsum('bkj,kj->b', increments, control_values)
    energy = np.sum(control_values ** 2) * dt
    return -stochastic / theta - energy / (2.0 * theta ** 2)


def girsanov_log_weight(nu, theta, noise):
    """
    Discretized Girsanov exponent of the tilt nu for one noise draw.
    """
    if nu.grid != noise.grid:
        raise InvalidParameterException('control and noise live on different grids')
    return float(girsanov_log_weights(nu.values, theta, noise.increments[None, :, :], noise.grid.dt)[0])
