import pyparsing as pp

from pdldp.exception import InvalidParameterException

from .features import CurrentValue, RunningMax, RunningIntegral, RunningAverage, LaggedValue, FeatureSlug


class FeatureParserError(Exception):
    """
    Exception that is raised if a feature expression is invalid.
    """
    pass


class FeatureParser:
    """
    Parser for feature lists of the experiment file.
    E.q.:
        x, max(x), int(x, trapezoid), avg(x), lag(x, 0.25)
    """

    def _build_grammar(self):
        number = pp.Regex(r'[+-]?\d+(\.\d*)?([eE][+-]?\d+)?|[+-]?\.\d+([eE][+-]?\d+)?')
        number.setParseAction(lambda _s, _l, t: float(t[0]))
        variable = pp.Suppress(pp.Literal('x'))
        rule = pp.Regex('left|trapezoid')

        def functional(slug, argument=None):
            head = pp.Keyword(slug) + pp.Suppress('(') + variable
            if argument is not None:
                head = head + pp.Optional(pp.Suppress(',') + argument)
            return pp.Group(head + pp.Suppress(')'))

        current = pp.Group(pp.Keyword('x').setParseAction(lambda _s, _l, _t: FeatureSlug.CURRENT.value))
        feature = (
            functional(FeatureSlug.RUNNING_MAX.value) |
            functional(FeatureSlug.RUNNING_INTEGRAL.value, rule) |
            functional(FeatureSlug.RUNNING_AVERAGE.value) |
            functional(FeatureSlug.LAGGED.value, number) |
            current
        )
        return pp.delimitedList(feature, delim=',')

    def _to_feature(self, term):
        slug = term[0]
        if slug == FeatureSlug.CURRENT:
            return CurrentValue()
        elif slug == FeatureSlug.RUNNING_MAX:
            return RunningMax()
        elif slug == FeatureSlug.RUNNING_INTEGRAL:
            return RunningIntegral(*term[1:])
        elif slug == FeatureSlug.RUNNING_AVERAGE:
            return RunningAverage()
        elif len(term) != 2:
            raise FeatureParserError('lag(x, delay) requires the delay')
        else:
            return LaggedValue(term[1])

    def parse(self, input):
        if isinstance(input, (list, tuple)):
            input = ', '.join(input)
        try:
            terms = self._build_grammar().parseString(input, parseAll=True).asList()
        except pp.ParseException as ex:
            raise FeatureParserError('Invalid feature list "{}": {}'.format(input, ex))
        try:
            return [self._to_feature(term) for term in terms]
        except InvalidParameterException as ex:
            raise FeatureParserError('Invalid feature list "{}": {}'.format(input, ex))
