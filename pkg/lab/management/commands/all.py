import logging

from django.core.management.base import BaseCommand, CommandError

from lab.exceptions import ConfigError
from lab.suites import REGISTRY, load_config_file
from lab.tasks import run_suite_task

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    """
    Прогон всех наборов: по одной задаче Celery на набор.
    В режиме CELERY_TASK_ALWAYS_EAGER задачи выполняются последовательно в процессе.
    """
    help = 'Run every registered suite'

    def add_arguments(self, parser):
        parser.add_argument('--config', help='YAML file applied to every suite (params are ignored)')

    def handle(self, *args, **options):
        try:
            base = load_config_file(options['config']) if options['config'] else {}
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=2) from exc
        base.pop('params', None)
        logger.info('dispatching %d suites', len(REGISTRY))

        failed = []
        for name in sorted(REGISTRY):
            try:
                data = run_suite_task.delay(name, base).get()
            except ConfigError as exc:
                raise CommandError(str(exc), returncode=2) from exc
            counts = data['counts']
            self.stdout.write(f'{name}: ' + ', '.join(f'{k}={v}' for k, v in counts.items()))
            if counts['fail']:
                failed.append(name)
        if failed:
            raise CommandError(f'suites with failed checks: {", ".join(failed)}', returncode=1)
        self.stdout.write(self.style.SUCCESS('all suites passed'))
