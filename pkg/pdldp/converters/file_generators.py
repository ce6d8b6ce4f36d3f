import codecs
import csv

from django.utils.encoding import force_str


class CsvGenerator:
    """
    Writes report rows, floats with ``repr`` so the files are lossless and byte-stable between reruns.
    """

    def __init__(self, delimiter=',', quotechar='"', quoting=csv.QUOTE_MINIMAL, use_bom=False, **kwargs):
        self.csv_options = dict(kwargs, delimiter=delimiter, quotechar=quotechar, quoting=quoting)
        self.use_bom = use_bom

    def generate(self, header, rows, output_stream, comments=None):
        for block in comments or ():
            output_stream.writelines('# {}\n'.format(line) for line in block.splitlines())

        writer = StreamCSV(output_stream, use_bom=self.use_bom and not comments, lineterminator='\n', **self.csv_options)
        if header:
            writer.writerow(self._format_row(header))
        for row in rows:
            writer.writerow(self._format_row(row))

    def _format_row(self, values):
        return [self._format_value(value) for value in values]

    def _format_value(self, value):
        if value is None:
            return ''
        elif isinstance(value, bool):
            return 'true' if value else 'false'
        elif isinstance(value, float):
            return repr(float(value))
        elif hasattr(value, 'item'):
            # numpy scalar
            return self._format_value(value.item())
        return force_str(value)


class StreamCSV:

    def __init__(self, stream, dialect=csv.excel, use_bom=False, **kwargs):
        if use_bom:
            stream.write(force_str(codecs.BOM_UTF8))  # BOM for Excel
        self.stream = stream
        self.writer = csv.writer(stream, dialect=dialect, **kwargs)

    def writerow(self, row):
        self.writer.writerow(row)
        self.stream.flush()
