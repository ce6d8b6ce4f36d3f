import json

from enum import Enum

import numpy as np

from django.core.serializers.json import DjangoJSONEncoder
from django.utils.module_loading import import_string

from pdldp.conf import settings
from pdldp.exception import ConfigParseException

from .file_generators import CsvGenerator


def get_converters():
    """
    Converter instances of the ``PDLDP_CONVERTERS`` setting keyed by their format.
    """
    return {
        converter.format: converter
        for converter in (import_string(converter_path)() for converter_path in settings.CONVERTERS)
    }


def get_converter(file_format, converters=None):
    converters = get_converters() if converters is None else converters
    try:
        return converters[file_format]
    except KeyError:
        raise ValueError('Converter for format "{}" is not registered'.format(file_format))


class Converter:
    """
    Base of the report and experiment file converters. Subclasses implement ``_encode`` or
    ``_encode_to_stream`` for output and ``_decode`` for input.
    """

    format = None

    def _encode(self, data, options=None, **kwargs):
        raise NotImplementedError

    def _decode(self, data, **kwargs):
        raise NotImplementedError('{} converter cannot read input'.format(self.format))

    def _encode_to_stream(self, output_stream, data, options=None, **kwargs):
        output_stream.write(self._encode(data, options=options, **kwargs))

    def encode(self, data, options=None, **kwargs):
        return self._encode(data, options=options, **kwargs)

    def encode_to_stream(self, output_stream, data, options=None, **kwargs):
        self._encode_to_stream(output_stream, data, options=options, **kwargs)

    def decode(self, data, **kwargs):
        return self._decode(data, **kwargs)


class NumpyJsonEncoder(DjangoJSONEncoder):

    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        elif isinstance(o, np.generic):
            return o.item()
        elif isinstance(o, Enum):
            return o.value
        elif isinstance(o, (tuple, set)):
            return list(o)
        return super().default(o)


class JsonConverter(Converter):
    """
    Reads experiment files and writes the resolved config embedded in reports.
    """

    format = 'json'

    def _encode(self, data, options=None, **kwargs):
        options = settings.JSON_CONVERTER_OPTIONS if options is None else options
        return json.dumps(data, cls=NumpyJsonEncoder, ensure_ascii=False, **options)

    def _decode(self, data, **kwargs):
        try:
            return json.loads(data)
        except json.JSONDecodeError as ex:
            raise ConfigParseException('Invalid JSON: {}'.format(ex.msg), ex.lineno)


class CsvConverter(Converter):
    """
    Writes CSV reports. Data is a dict with ``header`` (column names), ``rows`` (iterable of value lists) and an
    optional ``preamble`` of comment blocks written before the header.
    """

    format = 'csv'
    generator_class = CsvGenerator

    def _encode_to_stream(self, output_stream, data, options=None, **kwargs):
        options = settings.CSV_GENERATOR_OPTIONS if options is None else options
        self.generator_class(**options).generate(
            data['header'], data['rows'], output_stream, comments=data.get('preamble')
        )
