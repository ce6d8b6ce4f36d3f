import collections
import collections.abc
import os
import sys

import django


# django-germanium 2.3.0 (pinned in example/requirements.txt) still uses collections.Iterable,
# which Python 3.10 removed.
if not hasattr(collections, 'Iterable'):
    collections.Iterable = collections.abc.Iterable

PROJECT_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'example')

sys.path.insert(0, PROJECT_DIR)
sys.path.insert(0, os.path.join(PROJECT_DIR, 'dj', 'apps'))
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'dj.settings')

django.setup()
