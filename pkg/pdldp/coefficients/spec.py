import math

import numpy as np

from pdldp.exception import InvalidParameterException, NonFiniteValueException
from pdldp.utils import StrEnum, as_vector

from .features import FeatureSet
from .grid import TimeGrid
from .maps import ZeroMap, SumMap, time_scaled


class CoefficientSlug(StrEnum):

    DRIFT = 'drift'
    DIFFUSION = 'diffusion'


class LipschitzTable:
    """
    Local Lipschitz constants R -> L_R given as a step table of (R, L_R) pairs or one global constant.
    """

    def __init__(self, table):
        if isinstance(table, (int, float)):
            table = [(math.inf, table)]
        try:
            table = sorted((float(radius), float(constant)) for radius, constant in table)
        except (TypeError, ValueError):
            raise InvalidParameterException('Lipschitz table must be a number or a list of (R, L) pairs')
        if not table or any(radius <= 0 or constant < 0 for radius, constant in table):
            raise InvalidParameterException('Lipschitz table needs positive radii and non-negative constants')
        self.table = tuple(table)

    def __call__(self, radius):
        for table_radius, constant in self.table:
            if radius <= table_radius:
                return constant
        return math.inf

    def __repr__(self):
        return '<LipschitzTable {}>'.format(list(self.table))


class EpsilonFamily:
    """
    b_eps = b + eps * drift_perturbation, sigma_eps = sigma + eps * diffusion_perturbation and
    X_0^eps = x0 + eps * initial_shift. Missing parts are eps independent.
    """

    def __init__(self, drift_perturbation=None, diffusion_perturbation=None, initial_shift=None):
        self.drift_perturbation = drift_perturbation
        self.diffusion_perturbation = diffusion_perturbation
        self.initial_shift = None if initial_shift is None else as_vector(initial_shift, name='initial shift')

    @property
    def is_trivial(self):
        return self.drift_perturbation is None and self.diffusion_perturbation is None and self.initial_shift is None


class CoefficientSpec:
    """
    Non-anticipative coefficient pair b(t, x_t), sigma(t, x_t) written as maps of path features, together with
    the declared growth constant M and the local Lipschitz table R -> L_R.
    """

    def __init__(self, dim_state, dim_noise, features, drift_map, diffusion_map, growth_const,
                 lipschitz_const=None, epsilon_family=None, name=None):
        if int(dim_state) != dim_state or dim_state < 1 or int(dim_noise) != dim_noise or dim_noise < 1:
            raise InvalidParameterException('state and noise dimensions must be positive integers')
        self.dim_state = int(dim_state)
        self.dim_noise = int(dim_noise)
        self.features = features if isinstance(features, FeatureSet) else FeatureSet(features, self.dim_state)

        if drift_map.output_shape != (self.dim_state,):
            raise InvalidParameterException(
                'drift map must have shape ({},), got {}'.format(self.dim_state, drift_map.output_shape)
            )
        if diffusion_map.output_shape != (self.dim_state, self.dim_noise):
            raise InvalidParameterException(
                'diffusion map must have shape {}, got {}'.format(
                    (self.dim_state, self.dim_noise), diffusion_map.output_shape
                )
            )
        drift_map.check_input_size(self.features.size)
        diffusion_map.check_input_size(self.features.size)
        self.drift_map = drift_map
        self.diffusion_map = diffusion_map

        if not math.isfinite(growth_const) or growth_const <= 0:
            raise InvalidParameterException('growth constant M must be positive')
        self.growth_const = float(growth_const)
        self.lipschitz_const = (
            lipschitz_const if isinstance(lipschitz_const, LipschitzTable) or lipschitz_const is None
            else LipschitzTable(lipschitz_const)
        )
        self.epsilon_family = epsilon_family or EpsilonFamily()
        if self.epsilon_family.initial_shift is not None and self.epsilon_family.initial_shift.shape != (dim_state,):
            raise InvalidParameterException('initial shift must have dimension {}'.format(dim_state))
        self.name = name

    def _copy(self, **kwargs):
        attrs = {
            'dim_state': self.dim_state,
            'dim_noise': self.dim_noise,
            'features': self.features,
            'drift_map': self.drift_map,
            'diffusion_map': self.diffusion_map,
            'growth_const': self.growth_const,
            'lipschitz_const': self.lipschitz_const,
            'epsilon_family': self.epsilon_family,
            'name': self.name,
        }
        attrs.update(kwargs)
        return CoefficientSpec(**attrs)

    def get_map(self, which):
        return self.drift_map if CoefficientSlug(which) == CoefficientSlug.DRIFT else self.diffusion_map

    def drift(self, t, z):
        return self.drift_map.evaluate(t, z)

    def diffusion(self, t, z):
        return self.diffusion_map.evaluate(t, z)

    def at_epsilon(self, epsilon):
        """
        Concrete coefficients (b_eps, sigma_eps) of the epsilon family.
        """
        family = self.epsilon_family
        if family.drift_perturbation is None and family.diffusion_perturbation is None:
            return self
        drift_map, diffusion_map = self.drift_map, self.diffusion_map
        if family.drift_perturbation is not None:
            drift_map = SumMap([drift_map, time_scaled(family.drift_perturbation, amplitude=epsilon)])
        if family.diffusion_perturbation is not None:
            diffusion_map = SumMap([diffusion_map, time_scaled(family.diffusion_perturbation, amplitude=epsilon)])
        return self._copy(drift_map=drift_map, diffusion_map=diffusion_map, epsilon_family=EpsilonFamily())

    def initial_value(self, x0, epsilon=0.0):
        x0 = as_vector(x0, self.dim_state, name='x0')
        if self.epsilon_family.initial_shift is None or epsilon == 0:
            return x0
        return x0 + epsilon * self.epsilon_family.initial_shift

    def with_epsilon_family(self, epsilon_family):
        return self._copy(epsilon_family=epsilon_family)

    def without_drift(self):
        return self._copy(drift_map=ZeroMap((self.dim_state,)), epsilon_family=EpsilonFamily())

    def rescaled(self, epsilon):
        """
        Coefficients of U(t) = X(epsilon t): drift epsilon * b(epsilon t, .), diffusion sigma(epsilon t, .)
        with features mapped to the rescaled clock.
        """
        if epsilon == 1.0:
            return self
        return self._copy(
            features=self.features.rescaled(epsilon),
            drift_map=time_scaled(self.drift_map, epsilon, epsilon),
            diffusion_map=time_scaled(self.diffusion_map, epsilon, 1.0),
            epsilon_family=EpsilonFamily(),
        )

    def __repr__(self):
        return '<CoefficientSpec {} d={} m={} features=[{}]>'.format(
            self.name or '', self.dim_state, self.dim_noise, self.features
        )


def eval_coeff(spec, which, k, prefix):
    """
    Evaluates the drift or the diffusion at t_k from the rows 0..k of the prefix path.

    :param spec: coefficient spec.
    :param which: ``drift`` or ``diffusion``.
    :param k: grid index.
    :param prefix: path, only its rows 0..k are read.
    :return: vector (d,) or matrix (d, m).
    """
    coefficient_map = spec.get_map(which)
    if prefix.dim != spec.dim_state:
        raise InvalidParameterException(
            'prefix has dimension {} but the coefficient spec expects {}'.format(prefix.dim, spec.dim_state)
        )
    prefix.grid.check_index(k, upper=prefix.values.shape[0] - 1)

    z = spec.features.evaluate_path(prefix.values, prefix.grid, upto=k)[-1]
    if not np.all(np.isfinite(z)):
        raise NonFiniteValueException('feature vector at index {} is not finite'.format(k))
    return np.array(coefficient_map.evaluate(k * prefix.grid.dt, z[None, :])[0])


class CheckReport:
    """
    Result of a sampled check of a declared inequality lhs <= rhs.
    """

    def __init__(self, name, n_samples, worst_ratio, violations):
        self.name = name
        self.n_samples = n_samples
        self.worst_ratio = worst_ratio
        self.violations = violations

    @property
    def passed(self):
        return not self.violations

    def __repr__(self):
        return '<CheckReport {} samples={} worst_ratio={!r} violations={}>'.format(
            self.name, self.n_samples, self.worst_ratio, len(self.violations)
        )


def _sample_path(rng, grid, dim, radius):
    walk = np.vstack([np.zeros((1, dim)), np.cumsum(rng.standard_normal((grid.n_steps, dim)), axis=0)])
    walk = walk + rng.standard_normal(dim)
    sup = np.max(np.linalg.norm(walk, axis=1))
    return walk * (radius * rng.uniform() / sup) if sup > 0 else walk


def _coefficients_at(spec, values, grid, k):
    z = spec.features.evaluate_path(values, grid, upto=k)[-1][None, :]
    t = k * grid.dt
    return spec.drift(t, z)[0], spec.diffusion(t, z)[0]


def check_growth(spec, grid=None, n_samples=1000, radius=10.0, seed=0):
    """
    Checks |b(t, w)| + |sigma(t, w)| <= M (1 + sup_{s <= t} |w(s)| + |t|) on random stopped paths with sup norm
    at most ``radius``.
    """
    grid = grid or TimeGrid(1.0, 50)
    rng = np.random.default_rng(seed)
    worst, violations = 0.0, []
    for _ in range(n_samples):
        values = _sample_path(rng, grid, spec.dim_state, radius)
        k = int(rng.integers(0, grid.n_steps + 1))
        drift, diffusion = _coefficients_at(spec, values, grid, k)
        lhs = np.linalg.norm(drift) + np.linalg.norm(diffusion)
        rhs = spec.growth_const * (1.0 + np.max(np.linalg.norm(values[:k + 1], axis=1)) + k * grid.dt)
        worst = max(worst, lhs / rhs)
        if lhs > rhs * (1 + 1e-12):
            violations.append((k, lhs, rhs))
    return CheckReport('growth', n_samples, worst, violations)


def check_lipschitz(spec, radius=10.0, grid=None, n_samples=1000, seed=0):
    """
    Checks |b(t, w) - b(t, w')| + |sigma(t, w) - sigma(t, w')| <= L_R sup_{s <= t} |w(s) - w'(s)| on random pairs
    inside the ball of radius R.
    """
    if spec.lipschitz_const is None:
        raise InvalidParameterException('spec does not declare Lipschitz constants')
    constant = spec.lipschitz_const(radius)
    grid = grid or TimeGrid(1.0, 50)
    rng = np.random.default_rng(seed)
    worst, violations = 0.0, []
    for _ in range(n_samples):
        values = _sample_path(rng, grid, spec.dim_state, radius)
        other = values + _sample_path(rng, grid, spec.dim_state, rng.uniform(1e-3, 1.0) * radius)
        sup = np.max(np.linalg.norm(other, axis=1))
        if sup > radius:
            other = other * (radius / sup)
        k = int(rng.integers(0, grid.n_steps + 1))
        distance = np.max(np.linalg.norm(values[:k + 1] - other[:k + 1], axis=1))
        if distance == 0:
            continue
        drift, diffusion = _coefficients_at(spec, values, grid, k)
        other_drift, other_diffusion = _coefficients_at(spec, other, grid, k)
        lhs = np.linalg.norm(drift - other_drift) + np.linalg.norm(diffusion - other_diffusion)
        rhs = constant * distance
        worst = max(worst, lhs / rhs if rhs > 0 else (math.inf if lhs > 0 else 0.0))
        if lhs > rhs * (1 + 1e-9) + 1e-12:
            violations.append((k, lhs, rhs))
    return CheckReport('lipschitz', n_samples, worst, violations)


def check_convergence(spec, epsilons=(1e-1, 1e-2, 1e-3, 1e-4), grid=None, n_samples=100, radius=10.0, seed=0):
    """
    Largest sampled |b_eps - b| + |sigma_eps - sigma| for every epsilon, the sequence tends to zero when the family
    converges pointwise.
    """
    grid = grid or TimeGrid(1.0, 50)
    rng = np.random.default_rng(seed)
    samples = [
        (_sample_path(rng, grid, spec.dim_state, radius), int(rng.integers(0, grid.n_steps + 1)))
        for _ in range(n_samples)
    ]
    limits = [_coefficients_at(spec, values, grid, k) for values, k in samples]
    deviations = []
    for epsilon in epsilons:
        perturbed = spec.at_epsilon(epsilon)
        deviation = 0.0
        for (values, k), (drift, diffusion) in zip(samples, limits):
            drift_eps, diffusion_eps = _coefficients_at(perturbed, values, grid, k)
            deviation = max(
                deviation, np.linalg.norm(drift_eps - drift) + np.linalg.norm(diffusion_eps - diffusion)
            )
        deviations.append((epsilon, deviation))
    return deviations
