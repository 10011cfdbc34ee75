"""
Реестр наборов проверок и их исполнение.

Набор - функция suite(ctx), зарегистрированная декоратором register с
параметрами по умолчанию. Контекст ctx выдаёт каждой проверке собственный
поток случайных чисел (по имени проверки) и собирает записи CheckRecord.
"""
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Callable

import yaml
from django.conf import settings

import kmlab
from lab.ensembles import StreamKey
from lab.exceptions import ConfigError, PoleHit, Unreliable, UnknownSuite
from lab.reports import CheckRecord, SuiteReport
from lab.serializers import SuiteConfigSerializer
from lab.signals import check_recorded, suite_finished

logger = logging.getLogger(__name__)

REGISTRY = {}


@dataclass(frozen=True)
class Suite:
    name: str
    func: Callable
    defaults: dict
    description: str = ''
    exploratory: bool = False


@dataclass
class SuiteConfig:
    """Параметры прогона: у каждого поля есть значение по умолчанию."""
    suite: str
    seed: int
    threads: int
    out: str
    formats: list
    chunk_size: int
    params: dict = field(default_factory=dict)


def register(name, defaults=None, description='', exploratory=False):
    """Декоратор регистрации набора проверок под именем name."""
    def decorator(func):
        REGISTRY[name] = Suite(name=name, func=func, defaults=dict(defaults or {}),
                               description=description or (func.__doc__ or '').strip().split('\n')[0],
                               exploratory=exploratory)
        return func
    return decorator


def get_suite(name):
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownSuite(name) from None


def load_config_file(path):
    """Читает YAML-файл конфигурации; возвращает отображение верхнего уровня."""
    try:
        with open(path, 'rb') as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError({'config': f'cannot read {path}: {exc}'}) from exc
    except yaml.YAMLError as exc:
        raise ConfigError({'config': f'invalid YAML in {path}: {exc}'}) from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError({'config': 'expected a mapping at the top level'})
    return data


def build_config(name, file_values=None, **flags):
    """
    Собирает SuiteConfig: настройки KMLAB < файл конфигурации < флаги CLI
    < переменная окружения KMLAB_SEED (только зерно). Флаги проходят ту же
    валидацию, что и файл; неизвестные ключи и параметры набора дают ConfigError.
    """
    suite = get_suite(name)
    data = dict(file_values or {})
    data.update({k: v for k, v in flags.items() if v is not None})
    serializer = SuiteConfigSerializer(data=data)
    if not serializer.is_valid():
        raise ConfigError(serializer.errors)
    values = dict(serializer.validated_data)

    params = dict(suite.defaults)
    overrides = dict(values.pop('params', {}) or {})
    unknown = sorted(set(overrides) - set(suite.defaults))
    if unknown:
        raise ConfigError({'params': f'unknown parameters for {name}: {unknown}'})
    params.update(overrides)

    seed = values.get('seed', settings.KMLAB['SEED'])
    env_seed = os.getenv('KMLAB_SEED')
    if env_seed:
        try:
            seed = int(env_seed)
        except ValueError:
            raise ConfigError({'seed': f'KMLAB_SEED is not an integer: {env_seed!r}'}) from None
        if seed < 0:
            raise ConfigError({'seed': f'KMLAB_SEED must be non-negative, got {seed}'})

    return SuiteConfig(
        suite=name,
        seed=int(seed),
        threads=int(values.get('threads', settings.KMLAB['THREADS'])),
        out=str(values.get('out', settings.KMLAB['OUTPUT_DIR'])),
        formats=list(values.get('formats', settings.KMLAB['FORMATS'])),
        chunk_size=int(values.get('chunk_size', settings.KMLAB['CHUNK_SIZE'])),
        params=params,
    )


class SuiteContext:
    """
    Контекст исполнения набора: параметры, потоки случайных чисел, записи.
    Методы record_* превращают результаты библиотечных проверок в CheckRecord.
    """

    def __init__(self, suite, config):
        self.suite = suite
        self.config = config
        self.params = config.params
        self.threads = config.threads
        self.chunk_size = config.chunk_size
        self.records = []
        self.notes = []

    @property
    def parallel(self):
        return {'threads': self.threads, 'chunk_size': self.chunk_size}

    def key(self, name):
        return StreamKey.named(self.config.seed, f'{self.suite.name}/{name}')

    def note(self, text):
        self.notes.append(text)

    def add(self, record):
        if self.suite.exploratory and record.verdict in ('pass', 'fail'):
            record.verdict = 'exploratory'
        self.records.append(record)
        check_recorded.send(sender=self.__class__, suite=self.suite.name, record=record)
        return record

    def verdict(self, name, verdict, note=''):
        """Запись по ComparisonVerdict (z-критерий)."""
        return self.add(CheckRecord(
            name=name, verdict='pass' if verdict.passed else 'fail', params=verdict.params,
            estimate=verdict.value, reference=verdict.reference, stderr=verdict.stderr,
            score=verdict.z, note=note,
        ))

    def gap(self, name, estimate, reference, tol, params=None, note=''):
        """Детерминированная проверка: |estimate - reference| < tol."""
        score = abs(complex(estimate) - complex(reference))
        return self.add(CheckRecord(
            name=name, verdict='pass' if score < tol else 'fail', params=dict(params or {}, tol=tol),
            estimate=estimate, reference=reference, score=score, note=note,
        ))

    def flag(self, name, passed, params=None, estimate=None, reference=None, score=None, note=''):
        """Проверка логического условия (монотонность, KS-критерий и т. п.)."""
        return self.add(CheckRecord(
            name=name, verdict='pass' if passed else 'fail', params=params or {},
            estimate=estimate, reference=reference, score=score, note=note,
        ))

    def explore(self, name, estimate=None, params=None, reference=None, note=''):
        """Исследовательская запись без эталона; на код выхода не влияет."""
        return self.add(CheckRecord(name=name, verdict='exploratory', params=params or {},
                                    estimate=estimate, reference=reference, note=note))

    def guarded(self, name, func, params=None):
        """
        Выполняет func(); PoleHit даёт вердикт pole, Unreliable - fail с пометкой.
        Возвращает результат func или None.
        """
        try:
            return func()
        except PoleHit as exc:
            self.add(CheckRecord(name=name, verdict='pole', params=params or {}, note=str(exc)))
        except Unreliable as exc:
            self.add(CheckRecord(name=name, verdict='fail', params=params or {}, note=f'unreliable: {exc}'))
        return None


def run_suite(name, config=None):
    """
    Выполняет набор name и возвращает SuiteReport. Результат определяется
    (config, seed, версия) и не зависит от числа потоков.
    """
    suite = get_suite(name)
    config = config or build_config(name)
    ctx = SuiteContext(suite, config)
    logger.info('running suite %s (seed %d, %d threads)', name, config.seed, config.threads)
    started = time.perf_counter()
    suite.func(ctx)
    report = SuiteReport(suite=name, seed=config.seed, version=kmlab.__version__,
                         checks=ctx.records, notes=ctx.notes,
                         wall_time=time.perf_counter() - started)
    suite_finished.send(sender=run_suite, report=report)
    return report


from lab.suites import diag, grassmann, loops, spherical, toda  # noqa: E402,F401
