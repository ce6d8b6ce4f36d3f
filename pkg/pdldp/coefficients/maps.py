"""
Coefficient maps (t, z) -> R^shape where z is the feature vector of the stopped path.

Every map evaluates a batch: ``t`` is a scalar or an array (B,), ``z`` has shape (B, n_features * d); results have
shape (B,) + output_shape and Jacobians with respect to z shape (B,) + output_shape + (z_size,).
"""
import numpy as np

from scipy.special import expit

from pdldp.exception import InvalidParameterException
from pdldp.utils import StrEnum, as_vector, as_matrix, frozen


class MapKind(StrEnum):

    ZERO = 'zero'
    CONSTANT = 'constant'
    AFFINE = 'affine'
    SIGMOID = 'sigmoid'
    PRODUCT = 'product'
    SUM = 'sum'


class SigmoidFunction(StrEnum):

    LOGISTIC = 'logistic'
    TANH = 'tanh'
    ARCTAN = 'arctan'


def _batch_times(t, batch):
    return np.broadcast_to(np.asarray(t, dtype=float), (batch,))


class CoefficientMap:
    """
    Abstract coefficient map.
    """

    kind = None

    def __init__(self, output_shape):
        self.output_shape = tuple(output_shape)

    @property
    def output_size(self):
        return int(np.prod(self.output_shape))

    def evaluate(self, t, z):
        raise NotImplementedError

    def jacobian(self, t, z):
        raise NotImplementedError

    def check_input_size(self, input_size):
        pass

    def __call__(self, t, z):
        return self.evaluate(t, z)


class ConstantMap(CoefficientMap):

    kind = MapKind.CONSTANT

    def __init__(self, value, output_shape=None):
        if value is None:
            raise InvalidParameterException('constant map value is required')
        value = np.asarray(value, dtype=float)
        if output_shape is not None:
            if value.size != int(np.prod(output_shape)):
                raise InvalidParameterException(
                    'constant value of size {} does not fit shape {}'.format(value.size, tuple(output_shape))
                )
            value = value.reshape(output_shape)
        if not np.all(np.isfinite(value)):
            raise InvalidParameterException('constant map value must be finite')
        super().__init__(value.shape)
        self.value = frozen(value)

    def evaluate(self, t, z):
        return np.broadcast_to(self.value, (z.shape[0],) + self.output_shape)

    def jacobian(self, t, z):
        return np.zeros((z.shape[0],) + self.output_shape + (z.shape[1],))


class ZeroMap(ConstantMap):

    kind = MapKind.ZERO

    def __init__(self, output_shape):
        super().__init__(np.zeros(output_shape), output_shape)


class AffineMap(CoefficientMap):
    """
    A z + c + t a, the flat output reshaped to ``output_shape``.
    """

    kind = MapKind.AFFINE

    def __init__(self, matrix, offset=None, time_coefficient=None, output_shape=None):
        matrix = as_matrix(matrix, name='affine matrix')
        output_shape = (matrix.shape[0],) if output_shape is None else tuple(output_shape)
        super().__init__(output_shape)
        if matrix.shape[0] != self.output_size:
            raise InvalidParameterException(
                'affine matrix has {} rows but the output needs {}'.format(matrix.shape[0], self.output_size)
            )
        self.matrix = frozen(matrix)
        self.offset = frozen(
            np.zeros(self.output_size) if offset is None
            else as_vector(offset, self.output_size, name='affine offset')
        )
        self.time_coefficient = (
            None if time_coefficient is None
            else frozen(as_vector(time_coefficient, self.output_size, name='affine time coefficient'))
        )

    @property
    def input_size(self):
        return self.matrix.shape[1]

    def check_input_size(self, input_size):
        if self.input_size != input_size:
            raise InvalidParameterException(
                'affine matrix has {} columns but the feature vector has size {}'.format(self.input_size, input_size)
            )

    def flat(self, t, z):
        value = z @ self.matrix.T + self.offset
        if self.time_coefficient is not None:
            value = value + _batch_times(t, z.shape[0])[:, None] * self.time_coefficient
        return value

    def evaluate(self, t, z):
        return self.flat(t, z).reshape((z.shape[0],) + self.output_shape)

    def jacobian(self, t, z):
        return np.broadcast_to(
            self.matrix.reshape(self.output_shape + (self.input_size,)),
            (z.shape[0],) + self.output_shape + (self.input_size,)
        )


class SigmoidMap(CoefficientMap):
    """
    Componentwise bounded smooth nonlinearity shift + scale * h(A z + c + t a).
    """

    kind = MapKind.SIGMOID

    FUNCTIONS = {
        SigmoidFunction.LOGISTIC: (expit, lambda u: expit(u) * (1.0 - expit(u))),
        SigmoidFunction.TANH: (np.tanh, lambda u: 1.0 - np.tanh(u) ** 2),
        SigmoidFunction.ARCTAN: (np.arctan, lambda u: 1.0 / (1.0 + u ** 2)),
    }

    def __init__(self, inner, function=SigmoidFunction.TANH, scale=1.0, shift=0.0):
        if not isinstance(inner, AffineMap):
            raise InvalidParameterException('sigmoid pre-activation must be an affine map')
        if function not in set(SigmoidFunction):
            raise InvalidParameterException('Unknown sigmoid function "{}"'.format(function))
        super().__init__(inner.output_shape)
        self.inner = inner
        self.function = SigmoidFunction(function)
        self.scale = frozen(np.broadcast_to(np.asarray(scale, dtype=float), (self.output_size,)))
        self.shift = frozen(np.broadcast_to(np.asarray(shift, dtype=float), (self.output_size,)))

    def check_input_size(self, input_size):
        self.inner.check_input_size(input_size)

    def evaluate(self, t, z):
        value, _ = self.FUNCTIONS[self.function]
        return (self.shift + self.scale * value(self.inner.flat(t, z))).reshape((z.shape[0],) + self.output_shape)

    def jacobian(self, t, z):
        _, derivative = self.FUNCTIONS[self.function]
        slope = self.scale * derivative(self.inner.flat(t, z))
        return (slope[:, :, None] * self.inner.matrix[None, :, :]).reshape(
            (z.shape[0],) + self.output_shape + (z.shape[1],)
        )


class CompositeMap(CoefficientMap):

    def __init__(self, maps):
        if not maps:
            raise InvalidParameterException('{} map needs at least one operand'.format(self.kind))
        shapes = {coefficient_map.output_shape for coefficient_map in maps}
        if len(shapes) != 1:
            raise InvalidParameterException('{} map operands have different shapes {}'.format(self.kind, shapes))
        super().__init__(maps[0].output_shape)
        self.maps = tuple(maps)

    def check_input_size(self, input_size):
        for coefficient_map in self.maps:
            coefficient_map.check_input_size(input_size)


class SumMap(CompositeMap):

    kind = MapKind.SUM

    def evaluate(self, t, z):
        result = self.maps[0].evaluate(t, z)
        for coefficient_map in self.maps[1:]:
            result = result + coefficient_map.evaluate(t, z)
        return result

    def jacobian(self, t, z):
        result = self.maps[0].jacobian(t, z)
        for coefficient_map in self.maps[1:]:
            result = result + coefficient_map.jacobian(t, z)
        return result


class ProductMap(CompositeMap):
    """Elementwise product of maps with equal output shapes."""

    kind = MapKind.PRODUCT

    def evaluate(self, t, z):
        result = self.maps[0].evaluate(t, z)
        for coefficient_map in self.maps[1:]:
            result = result * coefficient_map.evaluate(t, z)
        return result

    def jacobian(self, t, z):
        values = [coefficient_map.evaluate(t, z) for coefficient_map in self.maps]
        result = 0.0
        for i, coefficient_map in enumerate(self.maps):
            others = np.ones_like(values[i])
            for j, value in enumerate(values):
                if j != i:
                    others = others * value
            result = result + others[..., None] * coefficient_map.jacobian(t, z)
        return result


class TimeScaledMap(CoefficientMap):
    """
    amplitude * inner(time_scale * t, z).
    """

    def __init__(self, inner, time_scale=1.0, amplitude=1.0):
        super().__init__(inner.output_shape)
        self.inner = inner
        self.kind = inner.kind
        self.time_scale = float(time_scale)
        self.amplitude = float(amplitude)

    def check_input_size(self, input_size):
        self.inner.check_input_size(input_size)

    def evaluate(self, t, z):
        return self.amplitude * self.inner.evaluate(self.time_scale * np.asarray(t, dtype=float), z)

    def jacobian(self, t, z):
        return self.amplitude * self.inner.jacobian(self.time_scale * np.asarray(t, dtype=float), z)


def time_scaled(coefficient_map, time_scale=1.0, amplitude=1.0):
    if time_scale == 1.0 and amplitude == 1.0:
        return coefficient_map
    return TimeScaledMap(coefficient_map, time_scale, amplitude)


def map_from_descriptor(descriptor, output_shape, input_size):
    """
    Builds a map from the declarative experiment-file schema, e.g.
        {"kind": "affine", "matrix": [[-1]], "offset": [0]}
        {"kind": "sigmoid", "function": "tanh", "matrix": [[1, 0]], "scale": 0.5}
        {"kind": "product", "factors": [...]}, {"kind": "sum", "terms": [...]}
    Plain numbers and nested lists are constants.
    """
    if not isinstance(descriptor, dict):
        return ConstantMap(descriptor, output_shape)

    descriptor = dict(descriptor)
    kind = descriptor.pop('kind', None)
    allowed = {
        MapKind.ZERO: set(),
        MapKind.CONSTANT: {'value'},
        MapKind.AFFINE: {'matrix', 'offset', 'time_coefficient'},
        MapKind.SIGMOID: {'function', 'matrix', 'offset', 'time_coefficient', 'scale', 'shift'},
        MapKind.PRODUCT: {'factors'},
        MapKind.SUM: {'terms'},
    }
    if kind not in allowed:
        raise InvalidParameterException('Unknown map kind "{}"'.format(kind))
    unknown = set(descriptor) - allowed[kind]
    if unknown:
        raise InvalidParameterException('Unknown keys {} for map kind "{}"'.format(sorted(unknown), kind))

    if kind == MapKind.ZERO:
        coefficient_map = ZeroMap(output_shape)
    elif kind == MapKind.CONSTANT:
        coefficient_map = ConstantMap(descriptor.get('value'), output_shape)
    elif kind in {MapKind.AFFINE, MapKind.SIGMOID}:
        affine = AffineMap(
            descriptor.get('matrix'), descriptor.get('offset'), descriptor.get('time_coefficient'), output_shape
        )
        coefficient_map = affine if kind == MapKind.AFFINE else SigmoidMap(
            affine, descriptor.get('function', SigmoidFunction.TANH), descriptor.get('scale', 1.0),
            descriptor.get('shift', 0.0)
        )
    else:
        operands = descriptor.get('factors' if kind == MapKind.PRODUCT else 'terms') or []
        maps = [map_from_descriptor(operand, output_shape, input_size) for operand in operands]
        coefficient_map = ProductMap(maps) if kind == MapKind.PRODUCT else SumMap(maps)

    coefficient_map.check_input_size(input_size)
    return coefficient_map
