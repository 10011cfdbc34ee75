from django.apps import AppConfig


class LabConfig(AppConfig):
    """
    Конфигурация приложения lab.

    Метод ready() импортирует signals.py, чтобы зарегистрировать обработчики
    событий завершения наборов проверок (логирование и отправка в Sentry).
    """
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'lab'
    verbose_name = 'kmlab verification suites'

    def ready(self):
        """
        Выполняется при готовности приложения.

        Импортирует модуль signals.py и модуль suites, чтобы наборы проверок
        зарегистрировались в реестре до первого обращения к нему.
        """
        import lab.signals  # noqa
        import lab.suites  # noqa
