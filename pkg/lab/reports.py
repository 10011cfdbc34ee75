"""
Отчёты наборов проверок: записи проверок, сводка прогона и её выгрузка
в JSON (через DRF JSONRenderer) и CSV (фиксированный порядок столбцов,
числа с 17 значащими цифрами).
"""
import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from rest_framework.renderers import JSONRenderer

from lab.serializers import SuiteReportSerializer

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('suite', 'check', 'param_json', 'estimate_re', 'estimate_im', 'reference_re',
               'reference_im', 'stderr', 'score', 'verdict')


def plain(value):
    """Приводит параметры к JSON-совместимому виду (numpy, complex, кортежи)."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [plain(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return [plain(value.real), plain(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def _finite(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class CheckRecord:
    """Одна проверка: оценка, эталон, ошибка, счёт (z или разрыв) и вердикт."""
    name: str
    verdict: str
    params: dict = field(default_factory=dict)
    estimate: complex = None
    reference: complex = None
    stderr: float = None
    score: float = None
    note: str = ''

    def __post_init__(self):
        self.params = plain(self.params)

    def _part(self, value, imag):
        if value is None:
            return None
        value = complex(value)
        return _finite(value.imag if imag else value.real)

    @property
    def estimate_re(self):
        return self._part(self.estimate, False)

    @property
    def estimate_im(self):
        return self._part(self.estimate, True)

    @property
    def reference_re(self):
        return self._part(self.reference, False)

    @property
    def reference_im(self):
        return self._part(self.reference, True)

    @property
    def stderr_finite(self):
        return _finite(self.stderr)

    @property
    def score_finite(self):
        return _finite(self.score)


@dataclass
class SuiteReport:
    suite: str
    seed: int
    version: str
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def counts(self):
        out = {'pass': 0, 'fail': 0, 'pole': 0, 'exploratory': 0}
        for check in self.checks:
            out[check.verdict] += 1
        return out

    @property
    def failed(self):
        return [check for check in self.checks if check.verdict == 'fail']


def report_data(report, with_time=True):
    data = dict(SuiteReportSerializer(report).data)
    if not with_time:
        data.pop('wall_time')
    return data


def render_json(report, with_time=True):
    """JSON-сводка; with_time=False убирает время выполнения (тело для сравнения прогонов)."""
    return JSONRenderer().render(report_data(report, with_time=with_time))


def _csv_number(x):
    return '' if x is None else format(float(x), '.17g')


def csv_rows(report):
    for check in report.checks:
        yield {
            'suite': report.suite,
            'check': check.name,
            'param_json': json.dumps(check.params, sort_keys=True),
            'estimate_re': _csv_number(check.estimate_re),
            'estimate_im': _csv_number(check.estimate_im),
            'reference_re': _csv_number(check.reference_re),
            'reference_im': _csv_number(check.reference_im),
            'stderr': _csv_number(check.stderr_finite),
            'score': _csv_number(check.score_finite),
            'verdict': check.verdict,
        }


def _write_csv(path, report):
    with open(path, 'w', newline='', encoding='utf-8') as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in csv_rows(report):
            writer.writerow(row)


def emit(report, out_dir, formats=('json', 'csv')):
    """
    Пишет <suite>.json и/или <suite>.csv в out_dir. Ошибки ввода-вывода
    поднимаются как OSError с путём в сообщении.
    """
    out_dir = Path(out_dir)
    paths = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if 'json' in formats:
            path = out_dir / f'{report.suite}.json'
            path.write_bytes(render_json(report))
            paths.append(path)
        if 'csv' in formats:
            path = out_dir / f'{report.suite}.csv'
            _write_csv(path, report)
            paths.append(path)
    except OSError as exc:
        raise OSError(f'cannot write report to {out_dir}: {exc}') from exc
    logger.info('report %s written: %s', report.suite, ', '.join(str(p) for p in paths))
    return paths
