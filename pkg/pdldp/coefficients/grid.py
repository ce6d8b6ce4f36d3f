import math

import numpy as np

from pdldp.exception import InvalidParameterException, GridIndexException, NonFiniteValueException
from pdldp.utils import frozen


class TimeGrid:
    """
    Uniform grid t_k = k * dt, k = 0..n_steps on [0, horizon].
    """

    def __init__(self, horizon, n_steps):
        try:
            horizon = float(horizon)
        except (TypeError, ValueError):
            raise InvalidParameterException('horizon must be a number')
        if not math.isfinite(horizon) or horizon <= 0:
            raise InvalidParameterException('horizon must be a positive finite number')
        if isinstance(n_steps, bool) or int(n_steps) != n_steps or n_steps < 1:
            raise InvalidParameterException('n_steps must be a positive integer')

        self.horizon = horizon
        self.n_steps = int(n_steps)
        self.dt = self.horizon / self.n_steps
        self._times = None

    @property
    def times(self):
        if self._times is None:
            self._times = frozen(np.arange(self.n_steps + 1) * self.dt)
        return self._times

    @property
    def step_times(self):
        """Left end points t_0..t_{n-1} of the grid intervals."""
        return self.times[:-1]

    def check_index(self, k, upper=None):
        upper = self.n_steps if upper is None else upper
        if isinstance(k, bool) or int(k) != k or not 0 <= k <= upper:
            raise GridIndexException('index {} is outside 0..{}'.format(k, upper))

    def refine(self, factor=2):
        return TimeGrid(self.horizon, self.n_steps * factor)

    def rescaled(self, horizon):
        return TimeGrid(horizon, self.n_steps)

    def __eq__(self, other):
        return (
            isinstance(other, TimeGrid) and self.horizon == other.horizon and self.n_steps == other.n_steps
        )

    def __hash__(self):
        return hash((self.horizon, self.n_steps))

    def __repr__(self):
        return '<TimeGrid horizon={!r} n_steps={}>'.format(self.horizon, self.n_steps)


class Path:
    """
    Discretized trajectory, row k is the state at t_k.
    """

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[0] != grid.n_steps + 1:
            raise InvalidParameterException(
                'path values must have shape ({}, d), got {}'.format(grid.n_steps + 1, values.shape)
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteValueException('path contains non-finite values')

        self.grid = grid
        self.values = frozen(values)

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, np.array([np.atleast_1d(func(t)) for t in grid.times], dtype=float))

    @classmethod
    def straight_line(cls, grid, start, end):
        start, end = np.atleast_1d(np.asarray(start, dtype=float)), np.atleast_1d(np.asarray(end, dtype=float))
        fraction = (grid.times / grid.horizon)[:, None]
        return cls(grid, start[None, :] + fraction * (end - start)[None, :])

    @property
    def dim(self):
        return self.values.shape[1]

    @property
    def initial(self):
        return self.values[0]

    @property
    def terminal(self):
        return self.values[-1]

    def sup_norm(self):
        return float(np.max(np.linalg.norm(self.values, axis=1)))

    def distance(self, other):
        """Sup-norm distance to a path on the same grid."""
        if self.grid != other.grid:
            raise InvalidParameterException('paths live on different grids')
        return float(np.max(np.linalg.norm(self.values - other.values, axis=1)))

    def with_values(self, values):
        return Path(self.grid, values)

    def __eq__(self, other):
        return isinstance(other, Path) and self.grid == other.grid and np.array_equal(self.values, other.values)

    __hash__ = None

    def __repr__(self):
        return '<Path grid={!r} dim={}>'.format(self.grid, self.dim)


class PathBundle:
    """
    Many paths on one grid stored as an array (n_paths, n_steps + 1, d).
    """

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 3 or values.shape[1] != grid.n_steps + 1:
            raise InvalidParameterException(
                'bundle values must have shape (n, {}, d), got {}'.format(grid.n_steps + 1, values.shape)
            )
        self.grid = grid
        self.values = values

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i):
        return Path(self.grid, self.values[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def terminal(self):
        return self.values[:, -1, :]

    def sup_norms(self):
        return np.max(np.linalg.norm(self.values, axis=2), axis=1)
