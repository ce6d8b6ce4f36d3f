"""
Built-in coefficient specs. Factories are registered through the ``PDLDP_SPEC_REGISTRY`` setting and looked up by
their function name.
"""
from django.utils.module_loading import import_string

from pdldp.conf import settings
from pdldp.exception import InvalidParameterException

from .features import CurrentValue, RunningMax, RunningAverage, RunningIntegral, LaggedValue
from .maps import ZeroMap, ConstantMap, AffineMap, SigmoidMap, SumMap, SigmoidFunction
from .spec import CoefficientSpec


def schilder():
    """Brownian motion, b = 0 and sigma = 1."""
    return CoefficientSpec(
        1, 1, [CurrentValue()], ZeroMap((1,)), ConstantMap([[1.0]]), growth_const=1.0, lipschitz_const=1.0,
        name='schilder'
    )


def ornstein_uhlenbeck():
    """b(t, x) = -x, sigma = 1."""
    return CoefficientSpec(
        1, 1, [CurrentValue()], AffineMap([[-1.0]]), ConstantMap([[1.0]]), growth_const=1.0, lipschitz_const=1.0,
        name='ornstein_uhlenbeck'
    )


def running_max_feedback():
    """
    b = -x(t) + tanh(sup_{s<=t} x(s)) / 2, sigma = (1 + logistic(running average)) / 2.
    """
    return CoefficientSpec(
        1, 1,
        [CurrentValue(), RunningMax(), RunningAverage()],
        SumMap([
            AffineMap([[-1.0, 0.0, 0.0]]),
            SigmoidMap(AffineMap([[0.0, 1.0, 0.0]]), SigmoidFunction.TANH, scale=0.5),
        ]),
        SigmoidMap(
            AffineMap([[0.0, 0.0, 1.0]], output_shape=(1, 1)), SigmoidFunction.LOGISTIC, scale=0.5, shift=0.5
        ),
        growth_const=1.5,
        lipschitz_const=2.0,
        name='running_max_feedback'
    )


def delayed_sigmoid():
    """
    b = -x(t) / 2 + tanh(x(t - 0.1)), sigma = 1 + tanh(int_0^t x) / 2. Lipschitz constants hold for horizons
    up to 2.
    """
    return CoefficientSpec(
        1, 1,
        [CurrentValue(), LaggedValue(0.1), RunningIntegral()],
        SumMap([
            AffineMap([[-0.5, 0.0, 0.0]]),
            SigmoidMap(AffineMap([[0.0, 1.0, 0.0]]), SigmoidFunction.TANH),
        ]),
        SigmoidMap(AffineMap([[0.0, 0.0, 1.0]], output_shape=(1, 1)), SigmoidFunction.TANH, scale=0.5, shift=1.0),
        growth_const=2.5,
        lipschitz_const=2.5,
        name='delayed_sigmoid'
    )


def planar_delay():
    """
    Two dimensional rotation-damped drift with delayed saturated feedback and constant diagonal noise.
    """
    return CoefficientSpec(
        2, 2,
        [CurrentValue(), LaggedValue(0.2)],
        SumMap([
            AffineMap([[-1.0, 0.5, 0.0, 0.0], [-0.5, -1.0, 0.0, 0.0]]),
            SigmoidMap(AffineMap([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]), SigmoidFunction.TANH, scale=0.5),
        ]),
        ConstantMap([[1.0, 0.0], [0.0, 0.5]]),
        growth_const=2.0,
        lipschitz_const=2.0,
        name='planar_delay'
    )


def get_builtin_spec_factories():
    factories = {}
    for factory_path in settings.SPEC_REGISTRY:
        factory = import_string(factory_path)
        factories[factory.__name__] = factory
    return factories


def get_builtin_spec(name):
    factories = get_builtin_spec_factories()
    if name not in factories:
        raise InvalidParameterException(
            'Unknown built-in spec "{}", choose one of {}'.format(name, ', '.join(sorted(factories)))
        )
    return factories[name]()


def get_builtin_specs():
    return [factory() for factory in get_builtin_spec_factories().values()]
