class PdldpException(Exception):
    message = None

    def __init__(self, message=None):
        super().__init__(message or self.message)
        self.message = message or self.message

    def __str__(self):
        return str(self.message)


class InvalidParameterException(PdldpException):
    message = 'Invalid parameter.'


class GridIndexException(InvalidParameterException, IndexError):
    message = 'Index is out of the grid range.'


class NonFiniteValueException(PdldpException):
    message = 'Non-finite value.'


class DivergenceException(PdldpException):
    """
    Raised by the Euler scheme when the state leaves the divergence threshold or becomes non-finite.
    """

    def __init__(self, index, time, threshold):
        super().__init__(
            'Path diverged at index {} (t={!r}): |X| exceeded {!r} or became non-finite.'.format(
                index, time, threshold
            )
        )
        self.index = index
        self.time = time
        self.threshold = threshold


class SlopeFitException(PdldpException):
    message = (
        'At least two schedule points with positive probability estimate are required, '
        'use importance sampling for the rare points.'
    )


class ConfigParseException(PdldpException):

    def __init__(self, message, line=None):
        super().__init__(message if line is None else '{} (line {})'.format(message, line))
        self.line = line


class ConfigInvalidException(PdldpException):

    def __init__(self, errors):
        self.errors = errors
        super().__init__('; '.join(
            '{}: {}'.format(field, ' '.join(messages)) for field, messages in sorted(errors.items())
        ))
