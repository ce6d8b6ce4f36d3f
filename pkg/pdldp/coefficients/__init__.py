from .grid import TimeGrid, Path, PathBundle  # noqa: F401
from .features import (  # noqa: F401
    PathFeature, CurrentValue, RunningMax, RunningIntegral, RunningAverage, LaggedValue, FeatureSet, IntegralRule
)
from .maps import (  # noqa: F401
    ConstantMap, ZeroMap, AffineMap, SigmoidMap, ProductMap, SumMap, TimeScaledMap, map_from_descriptor
)
from .spec import (  # noqa: F401
    CoefficientSpec, CoefficientSlug, EpsilonFamily, LipschitzTable, eval_coeff, check_growth, check_lipschitz,
    check_convergence
)
