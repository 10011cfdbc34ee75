from django.core.management.base import BaseCommand, CommandError

from lab.exceptions import ConfigError, UnknownSuite
from lab.reports import emit
from lab.serializers import FORMATS
from lab.suites import build_config, load_config_file, run_suite


def parse_formats(value):
    """'json,csv' -> ['json', 'csv']; неизвестный формат даёт ConfigError."""
    formats = [item.strip() for item in value.split(',') if item.strip()]
    unknown = sorted(set(formats) - set(FORMATS))
    if not formats or unknown:
        raise ConfigError({'format': f'expected a comma list of {list(FORMATS)}, got {value!r}'})
    return formats


class Command(BaseCommand):
    """
    Прогон одного набора проверок: `kmlab run <suite>`.
    Код выхода 0 - все проверки прошли, 1 - есть проваленные, 2 - ошибка использования.
    """
    help = 'Run a verification suite and write JSON/CSV reports'

    def add_arguments(self, parser):
        parser.add_argument('suite')
        parser.add_argument('--config', help='YAML file with seed, threads, out, formats, chunk_size, params')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--threads', type=int)
        parser.add_argument('--out')
        parser.add_argument('--format', dest='formats')

    def handle(self, *args, **options):
        try:
            file_values = load_config_file(options['config']) if options['config'] else None
            formats = parse_formats(options['formats']) if options['formats'] else None
            config = build_config(options['suite'], file_values, seed=options['seed'],
                                  threads=options['threads'], out=options['out'], formats=formats)
        except (UnknownSuite, ConfigError) as exc:
            raise CommandError(str(exc), returncode=2) from exc

        report = run_suite(options['suite'], config)
        try:
            paths = emit(report, config.out, config.formats)
        except OSError as exc:
            raise CommandError(str(exc), returncode=2) from exc

        counts = report.counts
        self.stdout.write(f'{report.suite}: ' + ', '.join(f'{k}={v}' for k, v in counts.items()))
        for path in paths:
            self.stdout.write(f'  {path}')
        if counts['fail']:
            failed = ', '.join(check.name for check in report.failed)
            raise CommandError(f'{counts["fail"]} failed checks in {report.suite}: {failed}', returncode=1)
        self.stdout.write(self.style.SUCCESS(f'{report.suite}: ok'))
