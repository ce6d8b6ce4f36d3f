import pyparsing as pp

from pdldp.exception import InvalidParameterException

from .events import TerminalPoint, TerminalHalfSpace, TerminalBall, SupNormExceed


class EventParserError(Exception):
    """
    Exception that is raised if an event expression is invalid.
    """
    pass


class EventParser:
    """
    Parser for the short event expressions of the experiment file.
    E.q.:
        x(T) = [1]
        x(T) = [1, 0] within 0.01
        [1] . x(T) >= 1
        |x(T) - [0]| <= 0.5
        sup |x| >= 1
    """

    def _build_grammar(self):
        number = pp.Regex(r'[+-]?\d+(\.\d*)?([eE][+-]?\d+)?|[+-]?\.\d+([eE][+-]?\d+)?')
        number.setParseAction(lambda _s, _l, t: float(t[0]))
        vector = pp.Group(pp.Suppress('[') + pp.delimitedList(number, delim=',') + pp.Suppress(']'))
        terminal = pp.Suppress(pp.Literal('x') + '(' + 'T' + ')')

        point = (
            terminal + pp.Suppress('=') + vector + pp.Optional(pp.Suppress(pp.Keyword('within')) + number)
        ).setParseAction(lambda _s, _l, t: TerminalPoint(t[0].asList(), *t[1:]))
        half_space = (
            vector + pp.Suppress('.') + terminal + pp.Suppress('>=') + number
        ).setParseAction(lambda _s, _l, t: TerminalHalfSpace(t[0].asList(), t[1]))
        ball = (
            pp.Suppress('|') + terminal + pp.Suppress('-') + vector + pp.Suppress('|') + pp.Suppress('<=') + number
        ).setParseAction(lambda _s, _l, t: TerminalBall(t[0].asList(), t[1]))
        sup_norm = (
            pp.Suppress(pp.Keyword('sup') + '|' + 'x' + '|' + '>=') + number
        ).setParseAction(lambda _s, _l, t: SupNormExceed(t[0]))
        return point | half_space | ball | sup_norm

    def parse(self, input):
        try:
            return self._build_grammar().parseString(input, parseAll=True)[0]
        except pp.ParseException as ex:
            raise EventParserError('Invalid event expression "{}": {}'.format(input, ex))
        except InvalidParameterException as ex:
            raise EventParserError('Invalid event expression "{}": {}'.format(input, ex))
