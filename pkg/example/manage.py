#!/usr/bin/env python
"""
Management script of the example project, runs the test suite and the ``pdldp`` experiment command.
"""
import os
import sys


PROJECT_DIR = os.path.dirname(os.path.abspath(__file__))


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'dj.settings')
    sys.path.append(os.path.join(PROJECT_DIR, 'dj', 'apps'))

    from django.core.management import execute_from_command_line

    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
