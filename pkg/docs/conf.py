# django-pdldp documentation build configuration file.
import os
import sys

sys.path.insert(0, os.path.abspath('..'))

from pdldp.version import get_version  # noqa: E402


extensions = [
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
    'sphinx.ext.mathjax',
]

templates_path = ['.templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'django-pdldp'
copyright = '2023, Luboš Mátl'
author = 'Luboš Mátl'

release = get_version()
version = '.'.join(release.split('.')[:2])

exclude_patterns = ['.build']
pygments_style = 'sphinx'

html_theme = 'sphinx_rtd_theme'
html_static_path = ['.static']
htmlhelp_basename = 'django-pdldpdoc'

latex_documents = [
    (master_doc, 'django-pdldp.tex', 'django-pdldp Documentation', author, 'manual'),
]

man_pages = [
    (master_doc, 'django-pdldp', 'django-pdldp Documentation', [author], 1)
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'scipy': ('https://docs.scipy.org/doc/scipy', None),
}
