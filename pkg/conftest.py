"""Настройка Django для запуска тестов lab через pytest."""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'kmlab.settings')
django.setup()
