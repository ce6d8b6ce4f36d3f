import math

import numpy as np

from pdldp.conf import settings
from pdldp.exception import InvalidParameterException
from pdldp.skeleton import Control
from pdldp.utils import as_vector


class Infeasible:
    """
    Target path no control can produce, its rate is +inf.
    """

    def __init__(self, reason, index=None, residual=None):
        self.reason = reason
        self.index = index
        self.residual = residual

    def __bool__(self):
        return False

    def __str__(self):
        return self.reason

    def __repr__(self):
        return '<Infeasible {}>'.format(self.reason)


def control_energy(nu):
    """
    1/2 sum_k |nu(t_k)|^2 dt
    """
    return nu.energy


def coefficients_along(spec, path, upto=None):
    """
    Drift (n, d) and diffusion (n, d, m) evaluated at t_0..t_{n-1} on the stopped path, time is the batch axis.
    """
    grid = path.grid
    upto = grid.n_steps - 1 if upto is None else upto
    z = spec.features.evaluate_path(path.values, grid, upto=upto)
    t = grid.times[:upto + 1]
    return np.asarray(spec.drift(t, z)), np.asarray(spec.diffusion(t, z))


def control_for_path(spec, x0, g, tol_feas=None):
    """
    Inverts the skeleton equation interval by interval. The residual r_k = (g_{k+1} - g_k) / dt - b(t_k, g_{<=k})
    is solved by the minimal-norm solution of sigma(t_k, g_{<=k}) nu = r_k.

    :return: Control or Infeasible when some interval leaves a residual above tol_feas (1 + |r_k|).
    """
    tol_feas = settings.FEASIBILITY_TOLERANCE if tol_feas is None else tol_feas
    x0 = as_vector(x0, spec.dim_state, name='x0')
    if g.dim != spec.dim_state:
        raise InvalidParameterException(
            'path has dimension {} but the coefficient spec expects {}'.format(g.dim, spec.dim_state)
        )
    start_gap = float(np.linalg.norm(g.initial - x0))
    if start_gap > settings.INITIAL_VALUE_TOLERANCE * (1.0 + float(np.linalg.norm(x0))):
        return Infeasible('path starts at {} instead of x0 = {}'.format(g.initial.tolist(), x0.tolist()), 0, start_gap)

    drift, diffusion = coefficients_along(spec, g)
    residual = np.diff(g.values, axis=0) / g.grid.dt - drift
    values = np.einsum('kmd,kd->km', np.linalg.pinv(diffusion), residual)
    unresolved = np.linalg.norm(np.einsum('kdm,km->kd', diffusion, values) - residual, axis=1)
    bad = np.nonzero(unresolved > tol_feas * (1.0 + np.linalg.norm(residual, axis=1)))[0]
    if bad.size:
        k = int(bad[0])
        return Infeasible(
            'interval {} cannot be produced by any control (unresolved residual {!r})'.format(k, unresolved[k]),
            k, float(unresolved[k])
        )
    return Control(g.grid, values)


def rate_of_path(spec, x0, g, tol_feas=None):
    """
    I(g) = 1/2 int |nu|^2 for the minimal control producing g, +inf when g is unattainable.
    """
    control = control_for_path(spec, x0, g, tol_feas)
    return control_energy(control) if control else math.inf
