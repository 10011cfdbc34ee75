"""
Django settings for kmlab project.

Лаборатория численной проверки формул для c-функций Хариш-Чандры,
мер на грассманианах, потоков Костанта-Тоды и весов петлевых групп.
Веб-интерфейса нет: проект используется через management-команды
(manage.py или bin/kmlab) и Celery-задачи.
"""
import os
from pathlib import Path

import sentry_sdk
from dotenv import load_dotenv

load_dotenv()

# Sentry подключается только при явно заданном DSN
SENTRY_DSN = os.getenv('SENTRY_DSN')
if SENTRY_DSN:
    sentry_sdk.init(
        dsn=SENTRY_DSN,
        send_default_pii=False,
        environment=os.getenv('KMLAB_ENVIRONMENT', 'development'),
    )

# ------------------------------------------------------------------------------
# BASE DIR
# ------------------------------------------------------------------------------
BASE_DIR = Path(__file__).resolve().parent.parent

# ------------------------------------------------------------------------------
# SECURITY
# ------------------------------------------------------------------------------
SECRET_KEY = os.getenv(
    'DJANGO_SECRET_KEY',
    'unsafe-secret-key-for-development-only'
)

DEBUG = os.getenv('DJANGO_DEBUG', '0') == '1'

ALLOWED_HOSTS = []

# ------------------------------------------------------------------------------
# APPLICATIONS
# ------------------------------------------------------------------------------
INSTALLED_APPS = [
    # Third-party
    'rest_framework',

    # Local
    'lab',
]

# ------------------------------------------------------------------------------
# DATABASE
# ------------------------------------------------------------------------------
# Лаборатория не хранит состояние в БД: отчёты пишутся в файлы
DATABASES = {}

# ------------------------------------------------------------------------------
# INTERNATIONALIZATION
# ------------------------------------------------------------------------------
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# ------------------------------------------------------------------------------
# DRF
# ------------------------------------------------------------------------------
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': (
        'rest_framework.renderers.JSONRenderer',
    ),
    'UNAUTHENTICATED_USER': None,
}

# ------------------------------------------------------------------------------
# LOGGING
# ------------------------------------------------------------------------------
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'lab': {
            'handlers': ['console'],
            'level': os.getenv('KMLAB_LOG_LEVEL', 'WARNING'),
            'propagate': False,
        },
    },
}

# ------------------------------------------------------------------------------
# KMLAB
# ------------------------------------------------------------------------------
# Значения по умолчанию для прогонов; файл конфигурации и флаги CLI
# переопределяют их, KMLAB_SEED переопределяет всё остальное.
KMLAB = {
    'SEED': int(os.getenv('KMLAB_DEFAULT_SEED', '20240101')),
    'THREADS': int(os.getenv('KMLAB_THREADS', '1')),
    'OUTPUT_DIR': os.getenv('KMLAB_OUTPUT_DIR', str(BASE_DIR / 'reports')),
    'FORMATS': ['json', 'csv'],
    'CHUNK_SIZE': 4096,
    'Z_THRESHOLD': 4.0,
    'MAX_REJECT_FRACTION': 0.01,
    'MIN_ESS_FRACTION': 0.01,
}

# ------------------------------------------------------------------------------
# CELERY
# ------------------------------------------------------------------------------
# По умолчанию задачи выполняются синхронно; для распределённого прогона
# задайте CELERY_BROKER_URL (например, redis://localhost:6379/0)
CELERY_BROKER_URL = os.getenv('CELERY_BROKER_URL', 'memory://')
CELERY_RESULT_BACKEND = os.getenv('CELERY_RESULT_BACKEND', 'cache+memory://')
CELERY_TASK_ALWAYS_EAGER = os.getenv('CELERY_TASK_ALWAYS_EAGER', '1') == '1'
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = 'UTC'
