import math

import numpy as np

from pdldp.exception import InvalidParameterException, NonFiniteValueException
from pdldp.utils import frozen


STREAM_SHIFT = 192


def get_stream_generator(seed, stream):
    """
    Counter-based generator of one Monte Carlo stream. The stream index occupies the top word of the 256 bit Philox
    counter so streams never overlap and draw i does not depend on which other streams were generated.
    """
    if seed < 0 or stream < 0:
        raise InvalidParameterException('seed and stream must be non-negative integers')
    return np.random.Generator(np.random.Philox(key=int(seed), counter=int(stream) << STREAM_SHIFT))


class NoiseDraw:
    """
    Brownian increments, row k is W(t_{k+1}) - W(t_k).
    """

    def __init__(self, grid, increments):
        increments = np.asarray(increments, dtype=float)
        if increments.ndim == 1:
            increments = increments.reshape(-1, 1)
        if increments.ndim != 2 or increments.shape[0] != grid.n_steps:
            raise InvalidParameterException(
                'increments must have shape ({}, m), got {}'.format(grid.n_steps, increments.shape)
            )
        if not np.all(np.isfinite(increments)):
            raise NonFiniteValueException('noise increments must be finite')
        self.grid = grid
        self.increments = frozen(increments)

    @property
    def dim(self):
        return self.increments.shape[1]

    def brownian_path(self):
        return np.vstack([np.zeros((1, self.dim)), np.cumsum(self.increments, axis=0)])


def _check_noise_dimension(m):
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise InvalidParameterException('noise dimension must be a positive integer')


def brownian_draw(grid, m, seed, stream):
    _check_noise_dimension(m)
    generator = get_stream_generator(seed, stream)
    return NoiseDraw(grid, generator.standard_normal((grid.n_steps, int(m))) * math.sqrt(grid.dt))


def brownian_batch(grid, m, seed, streams):
    """
    Increments of many streams stacked to shape (len(streams), n_steps, m); row i equals brownian_draw of
    streams[i].
    """
    _check_noise_dimension(m)
    scale = math.sqrt(grid.dt)
    batch = np.empty((len(streams), grid.n_steps, int(m)))
    for i, stream in enumerate(streams):
        batch[i] = get_stream_generator(seed, stream).standard_normal((grid.n_steps, int(m))) * scale
    return batch


class SmallNoiseSchedule:
    """
    (epsilon, theta_eps) pairs with theta strictly decreasing to zero.
    """

    def __init__(self, entries):
        entries = [(float(epsilon), float(theta)) for epsilon, theta in entries]
        if not entries:
            raise InvalidParameterException('schedule must contain at least one entry')
        for epsilon, theta in entries:
            if not (epsilon > 0 and theta > 0 and math.isfinite(epsilon) and math.isfinite(theta)):
                raise InvalidParameterException('schedule needs positive finite epsilon and theta')
        thetas = [theta for _, theta in entries]
        if any(later >= earlier for earlier, later in zip(thetas, thetas[1:])):
            raise InvalidParameterException('theta must be strictly decreasing along the schedule')
        self.entries = tuple(entries)

    @classmethod
    def from_thetas(cls, thetas):
        """Schedule with epsilon = theta^2, the usual small-noise scaling."""
        return cls([(theta ** 2, theta) for theta in thetas])

    @property
    def thetas(self):
        return np.array([theta for _, theta in self.entries])

    @property
    def epsilons(self):
        return np.array([epsilon for epsilon, _ in self.entries])

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)
