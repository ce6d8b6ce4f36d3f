import math

import numpy as np

from pdldp.conf import settings
from pdldp.exception import DivergenceException, InvalidParameterException
from pdldp.utils import as_vector


class EulerMaruyamaIntegrator:
    """
    Explicit left-point Euler-Maruyama scheme of the controlled path-dependent equation

        X_{k+1} = X_k + [b(t_k, X_{.<=k}) + sigma(t_k, X_{.<=k}) nu_k] dt + theta sigma(t_k, X_{.<=k}) dW_k

    integrated for a whole batch of noise realizations at once. Features are fed from the already computed states
    only, so the scheme is non-anticipative by construction. ``theta = 0`` skips the noise term, which makes the
    controlled equation and the skeleton equation share one arithmetic path.
    """

    def __init__(self, spec, grid, divergence_threshold=None):
        self.spec = spec
        self.grid = grid
        self.divergence_threshold = (
            settings.DIVERGENCE_THRESHOLD if divergence_threshold is None else divergence_threshold
        )

    def _get_initial_states(self, x0, batch):
        x0 = np.asarray(x0, dtype=float)
        if x0.ndim <= 1:
            return np.tile(as_vector(x0, self.spec.dim_state, name='x0'), (batch, 1))
        if x0.shape != (batch, self.spec.dim_state):
            raise InvalidParameterException('initial states must have shape {}'.format((batch, self.spec.dim_state)))
        return x0.copy()

    def _check_inputs(self, theta, control, increments):
        if not (theta >= 0 and math.isfinite(theta)):
            raise InvalidParameterException('theta must be a non-negative number')
        expected = (self.grid.n_steps, self.spec.dim_noise)
        if control is not None and control.shape != expected:
            raise InvalidParameterException('control must have shape {}, got {}'.format(expected, control.shape))
        if theta != 0 and increments is None:
            raise InvalidParameterException('noise increments are required for theta > 0')
        if increments is not None:
            if increments.ndim != 3 or increments.shape[1:] != expected:
                raise InvalidParameterException(
                    'noise increments must have shape (n, {}, {}), got {}'.format(*expected, increments.shape)
                )

    def _check_divergence(self, state, k):
        if not np.all(np.isfinite(state)) or np.any(np.abs(state) > self.divergence_threshold):
            raise DivergenceException(k, k * self.grid.dt, self.divergence_threshold)

    def integrate(self, x0, theta=0.0, control=None, increments=None, record_features=False):
        """
        :param x0: initial state (d,) shared by the batch or initial states (batch, d).
        :param theta: noise amplitude theta_eps >= 0.
        :param control: deterministic control values (n_steps, m) or None.
        :param increments: Brownian increments (batch, n_steps, m), required for theta > 0.
        :param record_features: return also the feature vectors used at every step.
        :return: states with shape (batch, n_steps + 1, d) and optionally features (batch, n_steps, z_size).
        """
        theta = float(theta)
        control = None if control is None else np.asarray(control, dtype=float)
        increments = None if increments is None else np.asarray(increments, dtype=float)
        self._check_inputs(theta, control, increments)

        if increments is not None:
            batch = increments.shape[0]
        else:
            batch = np.shape(x0)[0] if np.ndim(x0) == 2 else 1
        x = self._get_initial_states(x0, batch)
        self._check_divergence(x, 0)

        n_steps, dt = self.grid.n_steps, self.grid.dt
        spec, features = self.spec, self.spec.features
        needs_diffusion = control is not None or theta != 0

        values = np.empty((batch, n_steps + 1, spec.dim_state))
        values[:, 0] = x
        recorded = np.empty((batch, n_steps, features.size)) if record_features else None
        trackers = features.create_trackers(self.grid, x)

        for k in range(n_steps):
            z = features.observe(trackers, x)
            if record_features:
                recorded[:, k] = z
            t = k * dt
            drift = spec.drift(t, z)
            if needs_diffusion:
                diffusion = spec.diffusion(t, z)
            if control is not None:
                drift = drift + np.einsum('bij,j->bi', diffusion, control[k])
            x = x + drift * dt
            if theta != 0:
                x = x + theta * np.einsum('bij,bj->bi', diffusion, increments[:, k])
            self._check_divergence(x, k + 1)
            values[:, k + 1] = x

        return (values, recorded) if record_features else values
