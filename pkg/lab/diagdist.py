"""
Эмпирическая сторона тождеств для c-функций: выборки из групп, a-координаты
(модули ведущих элементов разложения Брюа), эмпирические характеристические
функции со стандартными ошибками и сравнение с замкнутыми формулами.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings
from scipy.special import comb

from lab import cfunc
from lab.ensembles import GroupSpec, bounded_statistics, ginibre, haar_compact, to_form_basis
from lab.exceptions import OffStratum, SingularMinor, Unreliable
from lab.linalg_core import ldu, leading_minors_batch
from lab.parallel import map_chunks

logger = logging.getLogger(__name__)

MINOR_TOL = 1e-12


@dataclass(frozen=True)
class EmpiricalCF:
    """Оценка E[a^{-i lambda}] по выборке и её покомпонентная стандартная ошибка."""
    value: complex
    stderr: float
    n_samples: int
    n_rejected: int = 0
    ess: float = None

    @property
    def reject_fraction(self):
        total = self.n_samples + self.n_rejected
        return self.n_rejected / total if total else 0.0

    @property
    def reliable(self):
        return self.reject_fraction < settings.KMLAB['MAX_REJECT_FRACTION']


@dataclass(frozen=True)
class ACoordinates:
    a: np.ndarray
    group: GroupSpec

    @property
    def log_a(self):
        return np.log(self.a)


@dataclass(frozen=True)
class ComparisonVerdict:
    """Результат сравнения оценки с эталоном: z = |value - reference| / stderr."""
    value: complex
    reference: complex
    stderr: float
    z: float
    passed: bool
    params: dict = field(default_factory=dict)


def a_coordinates(g, spec, depth=None):
    """
    a-координаты элемента g группы spec.

    A: a_j = |sigma_j / sigma_{j-1}|, первые n - 1 координат (a_n = prod_{j<n} a_j^{-1}
    при |det g| = 1), либо первые depth;
    B/C/D: LDU ведущего блока l x l в базисе квадратичной формы,
    a_j = |d| в j-й отрицательной позиции (eps_{-j}), то есть d в обратном порядке.
    """
    g = np.asarray(g, dtype=complex)
    if spec.family != 'A' and spec.basis == 'standard':
        g = to_form_basis(g, spec)
    block = spec.rank if spec.family != 'A' else (depth or g.shape[0])
    try:
        d = ldu(g[:block, :block]).d
    except SingularMinor as exc:
        raise OffStratum(exc.j) from exc
    if spec.family == 'A':
        a = np.abs(d) if depth else np.abs(d)[:max(block - 1, 1)]
    else:
        a = np.abs(d)[::-1]
    return ACoordinates(a=a, group=spec)


def log_a_batch(gs, spec, depth=None):
    """
    Векторизованные log a для стопки матриц. Возвращает (log_a, accepted):
    образцы с численно нулевым ведущим минором отбраковываются.
    Для типа A столбец a_n сохраняется: носитель lambda может доходить до n.
    """
    gs = np.asarray(gs)
    if spec.family != 'A' and spec.basis == 'standard':
        gs = to_form_basis(gs, spec)
    if spec.family == 'A':
        depth = depth or gs.shape[-1]
    else:
        depth = spec.rank
    minors = leading_minors_batch(gs[..., :depth, :depth], depth)
    absm = np.abs(minors)
    accepted = np.all(absm > MINOR_TOL, axis=-1)
    with np.errstate(divide='ignore'):
        log_sigma = np.log(np.where(accepted[:, None], absm, 1.0))
    log_d = np.diff(log_sigma, axis=-1, prepend=0.0)
    log_a = log_d if spec.family == 'A' else log_d[:, ::-1]
    return log_a[accepted], accepted


def sample_log_a(spec, draws, key, sampler=None, depth=None, chunk_size=None, threads=None):
    """
    Монте-Карло выборка log a. sampler(key, index, size) по умолчанию -
    мера Хаара группы spec. Возвращает (log_a, n_rejected).
    """
    if sampler is None:
        def sampler(k, index, size):
            return haar_compact(spec, k, index=index, size=size)

    def chunk(index, size):
        log_a, accepted = log_a_batch(sampler(key, index, size), spec, depth=depth)
        return log_a, int(size - np.count_nonzero(accepted))

    parts = map_chunks(chunk, draws, chunk_size=chunk_size, threads=threads)
    log_a = np.concatenate([p[0] for p in parts], axis=0)
    rejected = sum(p[1] for p in parts)
    if rejected:
        logger.info('sample_log_a %s: %d of %d samples off the top stratum', spec.label, rejected, draws)
    return log_a, rejected


def _lam_vector(lam, width):
    lam = cfunc.as_spectral(lam)
    return lam.dense(width)


def _component_stderr(values):
    n = len(values)
    if n < 2:
        return 0.0
    return float(max(np.std(values.real, ddof=1), np.std(values.imag, ddof=1)) / np.sqrt(n))


def weighted_mean(values, log_w=None, n_rejected=0):
    """
    Среднее выборки со стандартной ошибкой, либо самонормированная оценка
    sum w f / sum w с весами exp(log_w) и ошибкой по дельта-методу.
    """
    f = np.asarray(values).astype(complex)
    n = len(f)
    if log_w is None:
        return EmpiricalCF(value=complex(f.mean()), stderr=_component_stderr(f),
                           n_samples=n, n_rejected=n_rejected, ess=float(n))
    w = np.exp(log_w - np.max(log_w))
    total = w.sum()
    value = complex(np.sum(w * f) / total)
    resid = w * (f - value) / total
    stderr = float(max(np.sqrt(np.sum(resid.real ** 2)), np.sqrt(np.sum(resid.imag ** 2))))
    ess = float(total ** 2 / np.sum(w ** 2))
    return EmpiricalCF(value=value, stderr=stderr, n_samples=n, n_rejected=n_rejected, ess=ess)


def cf_from_log_a(log_a, lam, log_w=None, n_rejected=0):
    """E[exp(-i sum lambda_j log a_j)], при заданных log_w - взвешенная."""
    vec = _lam_vector(lam, log_a.shape[-1])
    return weighted_mean(np.exp(-1j * (log_a @ vec)), log_w=log_w, n_rejected=n_rejected)


def check_reliable(estimate):
    if not estimate.reliable:
        raise Unreliable(f'{estimate.reject_fraction:.2%} of samples rejected', estimate.reject_fraction)
    return estimate


def empirical_cf(samples, spec, lam):
    """Эмпирическая характеристическая функция диагонального закона по стопке samples."""
    log_a, accepted = log_a_batch(samples, spec)
    estimate = cf_from_log_a(log_a, lam, n_rejected=int(len(accepted) - np.count_nonzero(accepted)))
    return check_reliable(estimate)


def weight_log(log_a, spec, s, r=None):
    """log |sigma_r|^{2s} = 2s sum_j w_j log a_j."""
    return 2.0 * s * (log_a @ cfunc.weight_vector(_root_spec(spec), r))


def _root_spec(spec):
    return cfunc.RootSystemSpec(spec.family, spec.rank)


def empirical_cf_weighted(samples, spec, lam, s, r=None):
    """
    Взвешенный закон с весом |sigma_r|^{2s}: E[a^{-i lambda} w]/E[w].
    Unreliable, если эффективный размер выборки меньше доли MIN_ESS_FRACTION.
    """
    log_a, accepted = log_a_batch(samples, spec)
    rejected = int(len(accepted) - np.count_nonzero(accepted))
    estimate = cf_from_log_a(log_a, lam, log_w=weight_log(log_a, spec, s, r), n_rejected=rejected)
    check_ess(estimate)
    return check_reliable(estimate)


def check_ess(estimate):
    if estimate.ess < settings.KMLAB['MIN_ESS_FRACTION'] * estimate.n_samples:
        raise Unreliable(f'effective sample size {estimate.ess:.1f} of {estimate.n_samples}')


def compare(e, reference, params=None, threshold=None):
    """
    z = |value - reference| / stderr; pass при z <= порога (4 по умолчанию).
    При нулевой stderr требуется точное совпадение.
    """
    threshold = threshold or settings.KMLAB['Z_THRESHOLD']
    gap = abs(complex(e.value) - complex(reference))
    if e.stderr > 0:
        z = gap / e.stderr
        passed = z <= threshold
    else:
        z = 0.0 if gap < 1e-12 else float('inf')
        passed = gap < 1e-12
    return ComparisonVerdict(value=complex(e.value), reference=complex(reference),
                             stderr=float(e.stderr), z=float(z), passed=bool(passed),
                             params=dict(params or {}))


def weyl_dimension_check(spec, key, draws=100000, r=1, chunk_size=None, threads=None):
    """
    E|sigma_r|^2 по мере Хаара SU(n) против 1/dim(Lambda^r C^n);
    при r = 1 это E|g_11|^2 = 1/n.
    """
    n = spec.size

    def chunk(index, size):
        g = haar_compact(spec, key, index=index, size=size)
        return np.abs(np.linalg.det(g[..., :r, :r])) ** 2

    values = np.concatenate(map_chunks(chunk, draws, chunk_size=chunk_size, threads=threads))
    reference = 1.0 / comb(n, r, exact=True)
    return compare(weighted_mean(values), reference, params={'group': spec.label, 'r': r})


def selberg_mc_check(n, s, key, draws=100000, chunk_size=None, threads=None):
    """
    E[det(g* g)^{-is}] по гауссовой матрице с единичной дисперсией элементов
    (|g_ij|^2 ~ Exp(1)) против prod Gamma(j - is)/Gamma(j).
    """
    def chunk(index, size):
        g = ginibre(n, 2.0, key, index=index, size=size)
        _, logabs = np.linalg.slogdet(g)
        return np.exp(-2j * s * logabs)

    values = np.concatenate(map_chunks(chunk, draws, chunk_size=chunk_size, threads=threads))
    reference = cfunc.selberg_gamma_ratio(n, s)
    return compare(weighted_mean(values), reference, params={'n': n, 's': s})


def two_sample_compare(x, y, params=None, threshold=None):
    """Сравнение средних двух независимых выборок: z по объединённой ошибке."""
    ex, ey = weighted_mean(x), weighted_mean(y)
    combined = EmpiricalCF(value=ex.value - ey.value,
                           stderr=float(np.hypot(ex.stderr, ey.stderr)),
                           n_samples=ex.n_samples + ey.n_samples)
    return compare(combined, 0.0, params=params, threshold=threshold)


def haar_invariance_check(spec, key, u, draws=100000, chunk_size=None, threads=None):
    """
    Инвариантность меры Хаара: закон u g совпадает с законом g на батарее из 8
    ограниченных статистик (двухвыборочный z-критерий по каждой).
    """
    left, right = key.child('base'), key.child('shifted')

    def stats_of(k, shift):
        def chunk(index, size):
            g = haar_compact(spec, k, index=index, size=size)
            return bounded_statistics(u @ g if shift else g)
        return np.concatenate(map_chunks(chunk, draws, chunk_size=chunk_size, threads=threads))

    base, shifted = stats_of(left, False), stats_of(right, True)
    return [two_sample_compare(shifted[:, i], base[:, i], params={'statistic': i})
            for i in range(base.shape[1])]
