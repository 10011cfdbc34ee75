#!/usr/bin/env python
"""Точка входа Django для kmlab: run <suite>, list, all и test lab."""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'kmlab.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError('Django is not installed in the active environment; '
                          'run `pip install -r requirements.txt` first') from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
