"""
Path events. Every event answers membership for a batch of simulated paths and exposes a non-negative residual
(distance-like amount of violation) with its gradient so the rate optimizer can penalize it.
"""
import numpy as np

from pdldp.conf import settings
from pdldp.exception import InvalidParameterException
from pdldp.utils import StrEnum, as_vector


class EventKind(StrEnum):

    TERMINAL_POINT = 'terminal_point'
    TERMINAL_HALF_SPACE = 'terminal_half_space'
    TERMINAL_BALL = 'terminal_ball'
    SUP_NORM_EXCEED = 'sup_norm_exceed'


def _unit(vector, dim):
    norm = np.linalg.norm(vector)
    if norm > 0:
        return vector / norm
    unit = np.zeros(dim)
    unit[0] = 1.0
    return unit


class Event:

    kind = None
    dim = None

    def check_dim(self, dim):
        if self.dim is not None and self.dim != dim:
            raise InvalidParameterException(
                '{} event has dimension {} but the state has dimension {}'.format(self.kind, self.dim, dim)
            )

    def contains(self, values):
        """
        :param values: paths with shape (batch, n_steps + 1, d).
        :return: boolean array (batch,).
        """
        raise NotImplementedError

    def contains_path(self, path):
        return bool(self.contains(path.values[None, :, :])[0])

    def residual(self, values):
        """
        :param values: one path (n_steps + 1, d).
        :return: 0 inside the event, positive outside.
        """
        raise NotImplementedError

    def residual_gradient(self, values):
        """Derivative of the residual with respect to every path row, shape (n_steps + 1, d)."""
        raise NotImplementedError

    def target_point(self, reference):
        """Point of the event closest to the terminal value ``reference`` of the uncontrolled flow."""
        raise NotImplementedError

    def get_constraint(self):
        """Constraint used by the rate minimization once the uncontrolled flow is known to be outside."""
        return self

    def to_descriptor(self):
        raise NotImplementedError

    def __repr__(self):
        return '<{} {}>'.format(self.__class__.__name__, self)


class TerminalPoint(Event):
    """
    phi(T) = a. Membership of simulated paths is |X(T) - a| <= tol, the optimizer targets the point itself unless
    tol is given explicitly.
    """

    kind = EventKind.TERMINAL_POINT

    def __init__(self, point, tol=None):
        self.point = as_vector(point, name='terminal point')
        self.dim = self.point.shape[0]
        if tol is not None and not tol >= 0:
            raise InvalidParameterException('terminal point tolerance must be non-negative')
        self.tol = tol

    @property
    def membership_tol(self):
        return settings.TERMINAL_POINT_TOLERANCE if self.tol is None else self.tol

    def contains(self, values):
        return np.linalg.norm(values[:, -1, :] - self.point, axis=1) <= self.membership_tol

    def residual(self, values):
        return max(float(np.linalg.norm(values[-1] - self.point)) - (self.tol or 0.0), 0.0)

    def residual_gradient(self, values):
        gradient = np.zeros_like(values)
        difference = values[-1] - self.point
        distance = np.linalg.norm(difference)
        if distance > (self.tol or 0.0):
            gradient[-1] = difference / distance
        return gradient

    def target_point(self, reference):
        return self.point.copy()

    def to_descriptor(self):
        descriptor = {'kind': str(self.kind), 'point': self.point.tolist()}
        if self.tol is not None:
            descriptor['tol'] = self.tol
        return descriptor

    def __str__(self):
        value = 'x(T) = {}'.format(self.point.tolist())
        return value if self.tol is None else '{} within {!r}'.format(value, self.tol)


class TerminalHyperplane(Event):
    """
    <w, phi(T)> = c, the boundary of a terminal half-space.
    """

    kind = EventKind.TERMINAL_HALF_SPACE

    def __init__(self, normal, level):
        self.normal = as_vector(normal, name='half-space normal')
        self.dim = self.normal.shape[0]
        self.norm = float(np.linalg.norm(self.normal))
        if self.norm == 0:
            raise InvalidParameterException('half-space normal must be non-zero')
        self.level = float(level)

    def gap(self, terminal):
        return (self.level - terminal @ self.normal) / self.norm

    def residual(self, values):
        return abs(float(self.gap(values[-1])))

    def residual_gradient(self, values):
        gradient = np.zeros_like(values)
        gradient[-1] = -np.sign(self.gap(values[-1])) * self.normal / self.norm
        return gradient

    def target_point(self, reference):
        return reference + self.gap(reference) * self.normal / self.norm

    def __str__(self):
        return '{} . x(T) = {!r}'.format(self.normal.tolist(), self.level)


class TerminalHalfSpace(TerminalHyperplane):
    """
    <w, phi(T)> >= c.
    """

    def contains(self, values):
        return values[:, -1, :] @ self.normal >= self.level

    def residual(self, values):
        return max(float(self.gap(values[-1])), 0.0)

    def residual_gradient(self, values):
        gradient = np.zeros_like(values)
        if self.gap(values[-1]) > 0:
            gradient[-1] = -self.normal / self.norm
        return gradient

    def target_point(self, reference):
        return reference + max(self.gap(reference), 0.0) * self.normal / self.norm

    def get_constraint(self):
        # energy is convex in the control, an infeasible start is resolved on the boundary
        return TerminalHyperplane(self.normal, self.level)

    def to_descriptor(self):
        return {'kind': str(self.kind), 'normal': self.normal.tolist(), 'level': self.level}

    def __str__(self):
        return '{} . x(T) >= {!r}'.format(self.normal.tolist(), self.level)


class TerminalBall(Event):
    """
    |phi(T) - center| <= radius.
    """

    kind = EventKind.TERMINAL_BALL

    def __init__(self, center, radius):
        self.center = as_vector(center, name='ball center')
        self.dim = self.center.shape[0]
        if not radius > 0:
            raise InvalidParameterException('ball radius must be positive')
        self.radius = float(radius)

    def contains(self, values):
        return np.linalg.norm(values[:, -1, :] - self.center, axis=1) <= self.radius

    def residual(self, values):
        return max(float(np.linalg.norm(values[-1] - self.center)) - self.radius, 0.0)

    def residual_gradient(self, values):
        gradient = np.zeros_like(values)
        difference = values[-1] - self.center
        distance = np.linalg.norm(difference)
        if distance > self.radius:
            gradient[-1] = difference / distance
        return gradient

    def target_point(self, reference):
        difference = reference - self.center
        if np.linalg.norm(difference) <= self.radius:
            return reference.copy()
        return self.center + self.radius * _unit(difference, self.dim)

    def to_descriptor(self):
        return {'kind': str(self.kind), 'center': self.center.tolist(), 'radius': self.radius}

    def __str__(self):
        return '|x(T) - {}| <= {!r}'.format(self.center.tolist(), self.radius)


class SupNormExceed(Event):
    """
    max_k |phi(t_k)| >= level, the supremum is taken over the grid points.
    """

    kind = EventKind.SUP_NORM_EXCEED

    def __init__(self, level):
        if not level > 0:
            raise InvalidParameterException('sup-norm level must be positive')
        self.level = float(level)

    def contains(self, values):
        return np.max(np.linalg.norm(values, axis=2), axis=1) >= self.level

    def residual(self, values):
        return max(self.level - float(np.max(np.linalg.norm(values, axis=1))), 0.0)

    def residual_gradient(self, values):
        gradient = np.zeros_like(values)
        norms = np.linalg.norm(values, axis=1)
        k = int(np.argmax(norms))
        if norms[k] < self.level:
            gradient[k] = -_unit(values[k], values.shape[1])
        return gradient

    def target_point(self, reference):
        if np.linalg.norm(reference) >= self.level:
            return reference.copy()
        return self.level * _unit(reference, reference.shape[0])

    def to_descriptor(self):
        return {'kind': str(self.kind), 'level': self.level}

    def __str__(self):
        return 'sup |x| >= {!r}'.format(self.level)


EVENT_CLASSES = {
    EventKind.TERMINAL_POINT: (TerminalPoint, ('point',), ('tol',)),
    EventKind.TERMINAL_HALF_SPACE: (TerminalHalfSpace, ('normal', 'level'), ()),
    EventKind.TERMINAL_BALL: (TerminalBall, ('center', 'radius'), ()),
    EventKind.SUP_NORM_EXCEED: (SupNormExceed, ('level',), ()),
}


def event_from_descriptor(descriptor):
    """
    Builds an event from its experiment-file dict, e.g. {"kind": "terminal_half_space", "normal": [1], "level": 1}.
    """
    if not isinstance(descriptor, dict):
        raise InvalidParameterException('event must be an object or an expression')
    descriptor = dict(descriptor)
    kind = descriptor.pop('kind', None)
    if kind not in EVENT_CLASSES:
        raise InvalidParameterException('Unknown event kind "{}"'.format(kind))
    event_class, required, optional = EVENT_CLASSES[EventKind(kind)]
    missing = [key for key in required if key not in descriptor]
    if missing:
        raise InvalidParameterException('Missing keys {} for event kind "{}"'.format(missing, kind))
    unknown = set(descriptor) - set(required) - set(optional)
    if unknown:
        raise InvalidParameterException('Unknown keys {} for event kind "{}"'.format(sorted(unknown), kind))
    try:
        return event_class(**descriptor)
    except (TypeError, ValueError) as ex:
        raise InvalidParameterException('Invalid event parameters: {}'.format(ex))
