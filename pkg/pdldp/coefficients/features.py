"""
Non-anticipative path features. A feature turns the stopped path x_{t_k} into a d-vector using only the rows 0..k.

Features are evaluated incrementally by trackers: the simulator feeds states in grid order and reads the feature
value after every observation, ``eval_coeff`` replays a prefix through the very same trackers.
"""
import math

from collections import deque

import numpy as np

from pdldp.exception import InvalidParameterException
from pdldp.utils import StrEnum


class FeatureSlug(StrEnum):

    CURRENT = 'x'
    RUNNING_MAX = 'max'
    RUNNING_INTEGRAL = 'int'
    RUNNING_AVERAGE = 'avg'
    LAGGED = 'lag'


class IntegralRule(StrEnum):

    LEFT = 'left'
    TRAPEZOID = 'trapezoid'


class FeatureTracker:

    def __init__(self, feature, grid, x0):
        self.feature = feature
        self.grid = grid
        self.x0 = x0
        self.index = -1

    def observe(self, state):
        self.index += 1
        self._observe(state)

    def _observe(self, state):
        raise NotImplementedError

    @property
    def value(self):
        raise NotImplementedError


class FeatureAdjoint:
    """
    Reverse-mode helper: distributes the derivative with respect to the feature value at t_k onto the path rows.
    """

    def __init__(self, feature, grid, values):
        self.feature = feature
        self.grid = grid
        self.values = values

    def distribute(self, k, gradient, adjoint):
        raise NotImplementedError

    def carry(self, k, adjoint):
        pass


class PathFeature:
    """
    Abstract path feature.
    """

    slug = None
    tracker_class = None
    adjoint_class = None

    def create_tracker(self, grid, x0):
        """
        :param grid: time grid of the observed states.
        :param x0: initial states with shape (..., d).
        """
        return self.tracker_class(self, grid, x0)

    def create_adjoint(self, grid, values):
        return self.adjoint_class(self, grid, values)

    def rescaled(self, epsilon):
        """
        Returns the feature of U(t) = X(epsilon t) that equals this feature of X at time epsilon t.
        """
        return self

    def _key(self):
        return (self.slug,)

    def __eq__(self, other):
        return isinstance(other, PathFeature) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __str__(self):
        return str(self.slug)

    def __repr__(self):
        return '<{} {}>'.format(self.__class__.__name__, self)


class CurrentValueTracker(FeatureTracker):

    def _observe(self, state):
        self._value = state

    @property
    def value(self):
        return self._value


class CurrentValueAdjoint(FeatureAdjoint):

    def distribute(self, k, gradient, adjoint):
        adjoint[k] += gradient


class CurrentValue(PathFeature):

    slug = FeatureSlug.CURRENT
    tracker_class = CurrentValueTracker
    adjoint_class = CurrentValueAdjoint


class RunningMaxTracker(FeatureTracker):

    def _observe(self, state):
        if self.index == 0:
            self._value = state
        else:
            self._value = np.maximum(self._value, state)

    @property
    def value(self):
        return self._value


class RunningMaxAdjoint(FeatureAdjoint):

    def __init__(self, feature, grid, values):
        super().__init__(feature, grid, values)
        running_max = np.maximum.accumulate(values, axis=0)
        previous = np.vstack([np.full((1, values.shape[1]), -np.inf), running_max[:-1]])
        steps = np.arange(values.shape[0])[:, None]
        # first index where the running max has been attained, ties keep the earlier row
        self.argmax = np.maximum.accumulate(np.where(values > previous, steps, 0), axis=0)
        self.components = np.arange(values.shape[1])

    def distribute(self, k, gradient, adjoint):
        np.add.at(adjoint, (self.argmax[k], self.components), gradient)


class RunningMax(PathFeature):
    """Componentwise sup_{s <= t} x(s)."""

    slug = FeatureSlug.RUNNING_MAX
    tracker_class = RunningMaxTracker
    adjoint_class = RunningMaxAdjoint


class RunningIntegralTracker(FeatureTracker):

    def _observe(self, state):
        if self.index == 0:
            self._sum = np.zeros_like(state)
        elif self.feature.rule == IntegralRule.LEFT:
            self._sum = self._sum + self._previous * self.grid.dt
        else:
            self._sum = self._sum + (self._previous + state) * (0.5 * self.grid.dt)
        self._previous = state

    @property
    def value(self):
        return self._sum if self.feature.scale == 1.0 else self.feature.scale * self._sum


class RunningIntegralAdjoint(FeatureAdjoint):

    def __init__(self, feature, grid, values):
        super().__init__(feature, grid, values)
        self.weight = feature.scale * grid.dt
        self.pending = np.zeros(values.shape[1])

    def distribute(self, k, gradient, adjoint):
        if k == 0:
            return
        self.pending += self.weight * gradient
        if self.feature.rule == IntegralRule.TRAPEZOID:
            adjoint[k] += 0.5 * self.weight * gradient
            adjoint[0] -= 0.5 * self.weight * gradient

    def carry(self, k, adjoint):
        if k > 0:
            adjoint[k - 1] += self.pending


class RunningIntegral(PathFeature):
    """
    Running integral of the path, ``left`` rule is sum_{j<k} x(t_j) dt, ``trapezoid`` averages both interval ends.
    """

    slug = FeatureSlug.RUNNING_INTEGRAL
    tracker_class = RunningIntegralTracker
    adjoint_class = RunningIntegralAdjoint

    def __init__(self, rule=IntegralRule.LEFT, scale=1.0):
        if rule not in set(IntegralRule):
            raise InvalidParameterException('Unknown integral rule "{}"'.format(rule))
        self.rule = IntegralRule(rule)
        self.scale = float(scale)

    def rescaled(self, epsilon):
        # int_0^{eps t} X(r) dr = eps * int_0^t U(s) ds
        return RunningIntegral(self.rule, self.scale * epsilon)

    def _key(self):
        return (self.slug, str(self.rule), self.scale)

    def __str__(self):
        args = [] if self.rule == IntegralRule.LEFT else [str(self.rule)]
        if self.scale != 1.0:
            args.append('scale={!r}'.format(self.scale))
        return 'int({})'.format(', '.join(['x'] + args))


class RunningAverageTracker(FeatureTracker):

    def _observe(self, state):
        if self.index == 0:
            self._sum = np.zeros_like(state)
            self._value = state
        else:
            self._sum = self._sum + self._previous
            self._value = self._sum / self.index
        self._previous = state

    @property
    def value(self):
        return self._value


class RunningAverageAdjoint(FeatureAdjoint):

    def __init__(self, feature, grid, values):
        super().__init__(feature, grid, values)
        self.pending = np.zeros(values.shape[1])

    def distribute(self, k, gradient, adjoint):
        if k == 0:
            adjoint[0] += gradient
        else:
            self.pending += gradient / k

    def carry(self, k, adjoint):
        if k > 0:
            adjoint[k - 1] += self.pending


class RunningAverage(PathFeature):
    """Left-point running integral divided by t_k, the initial value at t_0."""

    slug = FeatureSlug.RUNNING_AVERAGE
    tracker_class = RunningAverageTracker
    adjoint_class = RunningAverageAdjoint


class LaggedValueTracker(FeatureTracker):

    def __init__(self, feature, grid, x0):
        super().__init__(feature, grid, x0)
        self.lag_steps = feature.get_lag_steps(grid)
        self._buffer = deque(maxlen=self.lag_steps + 1)

    def _observe(self, state):
        self._buffer.append(state)

    @property
    def value(self):
        return self._buffer[0] if len(self._buffer) == self._buffer.maxlen else self.x0


class LaggedValueAdjoint(FeatureAdjoint):

    def __init__(self, feature, grid, values):
        super().__init__(feature, grid, values)
        self.lag_steps = feature.get_lag_steps(grid)

    def distribute(self, k, gradient, adjoint):
        adjoint[max(k - self.lag_steps, 0)] += gradient


class LaggedValue(PathFeature):
    """
    x(t - lag) read at the nearest grid point not after t - lag, x(0) before the start.
    """

    slug = FeatureSlug.LAGGED
    tracker_class = LaggedValueTracker
    adjoint_class = LaggedValueAdjoint

    def __init__(self, lag):
        lag = float(lag)
        if not math.isfinite(lag) or lag < 0:
            raise InvalidParameterException('lag must be a non-negative number')
        self.lag = lag

    def get_lag_steps(self, grid):
        return int(math.ceil(self.lag / grid.dt - 1e-9))

    def rescaled(self, epsilon):
        return LaggedValue(self.lag / epsilon)

    def _key(self):
        return (self.slug, self.lag)

    def __str__(self):
        return 'lag(x, {!r})'.format(self.lag)


class FeatureSet:
    """
    Ordered feature list, the feature vector is the concatenation of the d-vectors of every feature.
    """

    def __init__(self, features, dim):
        if not features:
            raise InvalidParameterException('at least one path feature is required')
        for feature in features:
            if not isinstance(feature, PathFeature):
                raise InvalidParameterException('{!r} is not a path feature'.format(feature))
        self.features = tuple(features)
        self.dim = dim

    @property
    def size(self):
        return len(self.features) * self.dim

    def create_trackers(self, grid, x0):
        return [feature.create_tracker(grid, x0) for feature in self.features]

    def observe(self, trackers, state):
        for tracker in trackers:
            tracker.observe(state)
        return np.concatenate([tracker.value for tracker in trackers], axis=-1)

    def evaluate_path(self, values, grid, upto=None):
        """
        Feature vectors of a single path for the indices 0..upto, shape (upto + 1, size).
        """
        upto = values.shape[0] - 1 if upto is None else upto
        trackers = self.create_trackers(grid, values[0])
        return np.array([self.observe(trackers, values[k]) for k in range(upto + 1)])

    def create_adjoints(self, grid, values):
        return [feature.create_adjoint(grid, values) for feature in self.features]

    def distribute(self, adjoints, k, gradient, adjoint):
        for i, feature_adjoint in enumerate(adjoints):
            feature_adjoint.distribute(k, gradient[i * self.dim:(i + 1) * self.dim], adjoint)
        for feature_adjoint in adjoints:
            feature_adjoint.carry(k, adjoint)

    def rescaled(self, epsilon):
        return FeatureSet([feature.rescaled(epsilon) for feature in self.features], self.dim)

    def __iter__(self):
        return iter(self.features)

    def __len__(self):
        return len(self.features)

    def __str__(self):
        return ', '.join(map(str, self.features))
