"""Приложение Celery для распределённого прогона наборов (`kmlab all`)."""
import os

from celery import Celery

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'kmlab.settings')

app = Celery('kmlab')
# CELERY_TASK_ALWAYS_EAGER, брокер и бэкенд результатов берутся из kmlab.settings
app.config_from_object('django.conf:settings', namespace='CELERY')
app.autodiscover_tasks(['lab'])
