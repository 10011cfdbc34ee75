from django.core.management.base import BaseCommand

from lab.suites import REGISTRY


class Command(BaseCommand):
    help = 'List registered verification suites'

    def handle(self, *args, **options):
        width = max(len(name) for name in REGISTRY)
        for name in sorted(REGISTRY):
            suite = REGISTRY[name]
            marker = ' (exploratory)' if suite.exploratory else ''
            self.stdout.write(f'{name:<{width}}  {suite.description}{marker}')
