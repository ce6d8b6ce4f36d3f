from .events import (  # noqa: F401
    Event, EventKind, TerminalPoint, TerminalHalfSpace, TerminalBall, SupNormExceed, event_from_descriptor
)
from .functional import Infeasible, control_energy, control_for_path, rate_of_path  # noqa: F401
from .optimizer import OptimizerConfig, RateResult, min_rate_event  # noqa: F401
from .parser import EventParser, EventParserError  # noqa: F401


def get_event(value):
    """
    Event from an experiment-file value, either a descriptor dict or a short expression.
    """
    if isinstance(value, Event):
        return value
    if isinstance(value, str):
        return EventParser().parse(value)
    return event_from_descriptor(value)
