from enum import Enum

import numpy as np

from pdldp.exception import InvalidParameterException, NonFiniteValueException


class StrEnum(str, Enum):

    def __str__(self):
        return self.value


def as_vector(value, dim=None, name='vector'):
    """
    Converts input to a finite 1-D float array, scalars are accepted for one dimensional vectors.
    """
    if value is None:
        raise InvalidParameterException('{} is required'.format(name))
    try:
        vector = np.atleast_1d(np.asarray(value, dtype=float))
    except (TypeError, ValueError):
        raise InvalidParameterException('{} must be a list of numbers'.format(name))
    if vector.ndim != 1:
        raise InvalidParameterException('{} must be one dimensional'.format(name))
    if dim is not None and vector.shape[0] != dim:
        raise InvalidParameterException('{} must have dimension {}, got {}'.format(name, dim, vector.shape[0]))
    if not np.all(np.isfinite(vector)):
        raise NonFiniteValueException('{} contains non-finite values'.format(name))
    return vector


def as_matrix(value, shape=None, name='matrix'):
    if value is None:
        raise InvalidParameterException('{} is required'.format(name))
    try:
        matrix = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise InvalidParameterException('{} must be a nested list of numbers'.format(name))
    if matrix.ndim == 0:
        matrix = matrix.reshape(1, 1)
    elif matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.ndim != 2:
        raise InvalidParameterException('{} must be two dimensional'.format(name))
    if shape is not None and matrix.shape != tuple(shape):
        raise InvalidParameterException('{} must have shape {}, got {}'.format(name, tuple(shape), matrix.shape))
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteValueException('{} contains non-finite values'.format(name))
    return matrix


def frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array
