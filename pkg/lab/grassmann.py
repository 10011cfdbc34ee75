"""
Меры на грассманиане в графовой координате Z (плоскость = график {(x, Zx)}).

Инвариантная плотность det(1 + Z*Z)^{-2M-s}, точный генератор Z = X Y^{-1},
согласованность угловых проекций, дробно-линейное действие с коциклом
и плотности mu_s^{(n)} на GL(2n) с цепочкой проекций Шура.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from lab.diagdist import EmpiricalCF, compare, two_sample_compare, weighted_mean
from lab.ensembles import complex_normal, ginibre
from lab.exceptions import KmlabError, SingularBlock, Transversality
from lab.linalg_core import BLOCK_COND_LIMIT, schur_complement
from lab.parallel import map_chunks

logger = logging.getLogger(__name__)

MAX_RETRIES = 8
# порции гауссовых матриц 2N x 2N ограничены по памяти
GAUSSIAN_CHUNK = 128
KS_CRITICAL_1PCT = 1.63


@dataclass(frozen=True)
class GraphCoordinate:
    """Точка Gr(M, C^{2M}) в графовой карте."""
    Z: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.Z)):
            raise KmlabError('graph coordinate has non-finite entries')

    @property
    def M(self):
        return self.Z.shape[-1]


@dataclass(frozen=True)
class MuSDensitySpec:
    """
    Параметры меры mu_s^{(n)} на GL(2n): строки и столбцы нумеруются -n..n-1,
    блок A^{(r)} состоит из индексов <= r.
    """
    n: int
    r: int = 0
    s: float = 0.0

    def __post_init__(self):
        if self.s <= -1:
            raise KmlabError('mu_s is finite only for s > -1')
        if abs(self.r) >= self.n:
            raise KmlabError(f'pivot index r={self.r} must satisfy |r| < n={self.n}')

    @property
    def block(self):
        return self.n + self.r + 1


@dataclass(frozen=True)
class MoebiusResult:
    Z: np.ndarray
    log_cocycle: np.ndarray


def logdet_one_plus(Z):
    """log det(1 + Z*Z) через разложение Холецкого (работает и для стопок)."""
    Z = np.asarray(Z, dtype=complex)
    eye = np.eye(Z.shape[-1])
    chol = np.linalg.cholesky(eye + np.swapaxes(Z.conj(), -1, -2) @ Z)
    return 2.0 * np.sum(np.log(np.real(np.diagonal(chol, axis1=-2, axis2=-1))), axis=-1)


def grassmann_logdensity(Z, M=None, s=0.0):
    """-(2M + s) log det(1 + Z*Z)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    M = Z.shape[-1] if M is None else M
    return -(2 * M + s) * logdet_one_plus(Z)


def grassmann_normalization(M=1, s=0.0):
    """
    Интеграл exp(logdensity) по C при M = 1 радиальной квадратурой:
    2pi int r (1 + r^2)^{-2-s} dr = pi/(1 + s).
    """
    if M != 1:
        raise KmlabError('radial quadrature is available for M = 1 only')
    value, _ = integrate.quad(lambda r: 2 * np.pi * r * (1 + r * r) ** (-2 - s), 0, np.inf,
                              epsabs=1e-12, epsrel=1e-12)
    return value


def _ill_conditioned(y):
    return np.linalg.cond(y) > BLOCK_COND_LIMIT


def sample_grassmann_invariant(M, key, index=0, size=None):
    """
    Инвариантная мера на Gr(M, C^{2M}): Z = X Y^{-1}, X и Y независимы
    с единичной дисперсией элементов. Плохо обусловленные Y перевыбираются
    из того же потока (не более MAX_RETRIES раз).
    """
    if M < 1:
        raise KmlabError('M must be positive')
    rng = key.generator(index)
    batch = 1 if size is None else size
    x = complex_normal(rng, (batch, M, M), 1.0)
    y = complex_normal(rng, (batch, M, M), 1.0)
    bad = _ill_conditioned(y)
    for _ in range(MAX_RETRIES):
        if not bad.any():
            break
        count = int(bad.sum())
        x[bad] = complex_normal(rng, (count, M, M), 1.0)
        y[bad] = complex_normal(rng, (count, M, M), 1.0)
        bad = _ill_conditioned(y)
    else:
        if bad.any():
            raise SingularBlock('Y stays singular after retries')
    z = np.swapaxes(np.linalg.solve(np.swapaxes(y, -1, -2), np.swapaxes(x, -1, -2)), -1, -2)
    return z[0] if size is None else z


def project_corner(Z, m):
    """Угловой блок m x m (ортогональная проекция L(C^M) -> L(C^m))."""
    Z = np.asarray(Z)
    M = Z.shape[-1]
    if not 0 < m < M:
        raise KmlabError(f'corner size must satisfy 0 < m < M, got m={m}, M={M}')
    return Z[..., :m, :m]


def _blocks(g):
    g = np.asarray(g, dtype=complex)
    size = g.shape[-1]
    if size % 2:
        raise KmlabError('moebius action needs an even-sized block matrix')
    m = size // 2
    return g[..., :m, :m], g[..., :m, m:], g[..., m:, :m], g[..., m:, m:]


def log_cocycle(g, Z):
    """
    Прямой коцикл kappa(g, Z) = log|det(a + bZ)|;
    kappa(gh, Z) = kappa(g, h.Z) + kappa(h, Z).
    """
    a, b, _, _ = _blocks(g)
    return np.linalg.slogdet(a + b @ Z)[1]


def moebius(g, Z, strict=True):
    """
    Дробно-линейное действие g = [[a, b], [c, d]] на график Z:
    Z' = (c + dZ)(a + bZ)^{-1}. Возвращает также log|det(a(g^{-1}) + b(g^{-1}) Z)|,
    так что g_*(mu_s) = exp(2s * log_cocycle) mu_s.

    Нетрансверсальный результат даёт Transversality (strict) либо NaN в Z'.
    """
    Z = np.asarray(Z, dtype=complex)
    single = Z.ndim == 2
    zs = Z[None] if single else Z
    a, b, c, d = _blocks(g)
    top = a + b @ zs
    bad = _ill_conditioned(top)
    if bad.any():
        if strict:
            raise Transversality('a + bZ is singular after the action')
        top[bad] = np.eye(top.shape[-1])
    z_new = np.swapaxes(np.linalg.solve(np.swapaxes(top, -1, -2),
                                        np.swapaxes(c + d @ zs, -1, -2)), -1, -2)
    z_new[bad] = np.nan
    ia, ib, _, _ = _blocks(np.linalg.inv(np.asarray(g, dtype=complex)))
    cocycle = np.linalg.slogdet(ia + ib @ zs)[1]
    if single:
        return MoebiusResult(Z=z_new[0], log_cocycle=float(cocycle[0]))
    return MoebiusResult(Z=z_new, log_cocycle=cocycle)


def mu_s_logdensity(g, spec):
    """
    2s log|det A^{(r)}(g)| - (4n + s) log det(1 + g*g) на GL(2n);
    A^{(r)} - левый верхний блок размера n + r + 1 (индексы -n..r).
    """
    g = np.asarray(g, dtype=complex)
    if g.shape[-1] != 2 * spec.n:
        raise KmlabError(f'expected a {2 * spec.n}x{2 * spec.n} matrix')
    base = -(4 * spec.n + spec.s) * logdet_one_plus(g)
    if spec.s == 0:
        return base
    k = spec.block
    with np.errstate(divide='ignore'):
        minor = np.linalg.slogdet(g[..., :k, :k])[1]
    return 2.0 * spec.s * minor + base


def mu_s_sample_weights(gs, spec):
    """Логарифмы весов mu_s^{(n)} относительно mu_0^{(n)} для выборки из mu_0."""
    zero = MuSDensitySpec(n=spec.n, r=spec.r, s=0.0)
    return mu_s_logdensity(gs, spec) - mu_s_logdensity(gs, zero)


def hill_tail_index(values, tail_fraction=0.02):
    """Оценка Хилла хвостового индекса по верхней доле tail_fraction выборки."""
    x = np.sort(np.asarray(values, dtype=float))[::-1]
    k = max(int(len(x) * tail_fraction), 2)
    logs = np.log(x[:k]) - np.log(x[k])
    return float(k / np.sum(logs))


def mu_s_normalization_probe(spec, key, draws=100000):
    """
    Зонд конечности mu_s^{(n)}: веса |det A^{(r)}|^{2s} det(1+g*g)^{-s}
    на выборке mu_0^{(n)}. Среднее конечно при хвостовом индексе > 1.
    """
    gs = sample_grassmann_invariant(2 * spec.n, key, size=draws)
    w = np.exp(mu_s_sample_weights(gs, spec))
    return {
        'mean_weight': float(np.mean(w)),
        'stderr': float(np.std(w, ddof=1) / np.sqrt(draws)),
        'tail_index': hill_tail_index(w),
    }


def schur_chain_maps(g, N, n):
    """
    Четыре отображения доказательства: Pr1 (левый верхний блок m + 2n),
    I1 (обращение), Pr2 (правый нижний блок 2n), I2 (обращение).
    Возвращает промежуточные результаты (h, k, b22, result).
    """
    m = _check_chain(g, N, n)
    h = np.asarray(g, dtype=complex)[:m + 2 * n, :m + 2 * n]
    if np.linalg.cond(h) > BLOCK_COND_LIMIT:
        raise SingularBlock('upper-left block of g is singular')
    k = np.linalg.inv(h)
    b22 = k[m:, m:]
    if np.linalg.cond(b22) > BLOCK_COND_LIMIT:
        raise SingularBlock('corner block of the inverse is singular')
    return h, k, b22, np.linalg.inv(b22)


def _check_chain(g, N, n):
    if not 0 < n < N:
        raise KmlabError(f'schur chain needs 0 < n < N, got n={n}, N={N}')
    if np.shape(g)[-1] != 2 * N:
        raise KmlabError(f'expected a {2 * N}x{2 * N} matrix')
    return N - n


def schur_chain(g, N, n):
    """Проекция GL(2N) -> GL(2n): a22 - a21 a11^{-1} a12, блоки (m, 2n, m), m = N - n."""
    m = _check_chain(g, N, n)
    h = np.asarray(g, dtype=complex)[:m + 2 * n, :m + 2 * n]
    return schur_complement(h, (m, 2 * n))


def _schur_batch(gs, m, width):
    a11 = gs[:, :m, :m]
    a12 = gs[:, :m, m:m + width]
    a21 = gs[:, m:m + width, :m]
    a22 = gs[:, m:m + width, m:m + width]
    accepted = np.linalg.cond(a11) <= BLOCK_COND_LIMIT
    out = a22[accepted] - a21[accepted] @ np.linalg.solve(a11[accepted], a12[accepted])
    return out, accepted


def grassmann_statistics(Z):
    """
    Восемь ограниченных статистик матрицы Z через W = (1 + Z*Z)^{-1}
    и Q = Z W (норма Q не больше 1/2).
    """
    Z = np.asarray(Z, dtype=complex)
    M = Z.shape[-1]
    eye = np.eye(M)
    w = np.linalg.inv(eye + np.swapaxes(Z.conj(), -1, -2) @ Z)
    q = Z @ w
    last = M - 1
    return np.stack([
        np.real(np.trace(w, axis1=-2, axis2=-1)) / M,
        np.real(q[..., 0, 0]),
        np.imag(q[..., 0, 0]),
        np.abs(q[..., 0, 0]) ** 2,
        np.real(q[..., 0, 0] ** 2),
        np.real(np.linalg.det(w)),
        np.real(np.trace(q, axis1=-2, axis2=-1)) / M,
        np.imag(q[..., 0, last]),
    ], axis=-1)


def uniform_reduction(Z):
    """tr(Z*Z (1 + Z*Z)^{-1})/M; при M = 1 это |z|^2/(1 + |z|^2)."""
    Z = np.asarray(Z, dtype=complex)
    M = Z.shape[-1]
    return 1.0 - np.real(np.trace(np.linalg.inv(np.eye(M) + np.swapaxes(Z.conj(), -1, -2) @ Z),
                                  axis1=-2, axis2=-1)) / M


def ks_uniform_check(values):
    """Критерий Колмогорова - Смирнова на равномерность: D < 1.63/sqrt(N)."""
    result = stats.kstest(values, 'uniform')
    critical = KS_CRITICAL_1PCT / np.sqrt(len(values))
    return {'statistic': float(result.statistic), 'critical': float(critical),
            'passed': bool(result.statistic < critical)}


def ks_two_sample_check(x, y):
    """Двухвыборочный KS с критическим значением 1.63 sqrt((n + m)/(n m))."""
    result = stats.ks_2samp(x, y)
    n, m = len(x), len(y)
    critical = KS_CRITICAL_1PCT * np.sqrt((n + m) / (n * m))
    return {'statistic': float(result.statistic), 'critical': float(critical),
            'passed': bool(result.statistic < critical)}


def _sample_many(M, key, draws, chunk_size=None, threads=None):
    def chunk(index, size):
        return sample_grassmann_invariant(M, key, index=index, size=size)
    return np.concatenate(map_chunks(chunk, draws, chunk_size=chunk_size, threads=threads))


def mean_trace_check(M, key, draws=100000, chunk_size=None, threads=None):
    """E tr(Z*Z (1 + Z*Z)^{-1}) = M/2 (симметрия плоскости и её ортодополнения)."""
    zs = _sample_many(M, key, draws, chunk_size, threads)
    values = M * uniform_reduction(zs)
    return compare(weighted_mean(values), M / 2.0, params={'M': M})


def inversion_invariance_check(M, key, draws=100000, chunk_size=None, threads=None):
    """Закон Z и закон Z^{-1} совпадают: KS на tr(Z*Z(1+Z*Z)^{-1})/M по независимым выборкам."""
    direct = uniform_reduction(_sample_many(M, key.child('direct'), draws, chunk_size, threads))
    inverted = uniform_reduction(np.linalg.inv(_sample_many(M, key.child('inverted'), draws,
                                                            chunk_size, threads)))
    return ks_two_sample_check(direct, inverted)


def unitary_invariance_check(M, key, u, draws=100000, chunk_size=None, threads=None):
    """Закон moebius(u, Z) совпадает с законом Z на восьми статистиках (двухвыборочный z)."""
    base = grassmann_statistics(_sample_many(M, key.child('base'), draws, chunk_size, threads))
    moved = moebius(u, _sample_many(M, key.child('moved'), draws, chunk_size, threads), strict=False).Z
    moved = moved[np.all(np.isfinite(moved), axis=(-2, -1))]
    shifted = grassmann_statistics(moved)
    return [two_sample_compare(shifted[:, i], base[:, i], params={'statistic': i, 'M': M})
            for i in range(base.shape[1])]


def change_of_variables_check(g, s, key, draws=100000, statistics=5, chunk_size=None, threads=None):
    """
    E_{mu_s}[f(g.Z)] = E_{mu_s}[f(Z) exp(2s log_cocycle(g, Z))] для унитарного g.

    Обе стороны - самонормированные оценки на независимых выборках mu_0
    с весами det(1 + Z*Z)^{-s}.
    """
    M = np.shape(g)[-1] // 2
    left_z = _sample_many(M, key.child('left'), draws, chunk_size, threads)
    right_z = _sample_many(M, key.child('right'), draws, chunk_size, threads)

    moved = moebius(g, left_z, strict=False)
    ok = np.all(np.isfinite(moved.Z), axis=(-2, -1))
    left_w = -s * logdet_one_plus(left_z[ok])
    left_stats = grassmann_statistics(moved.Z[ok])

    right = moebius(g, right_z, strict=False)
    right_w = -s * logdet_one_plus(right_z) + 2.0 * s * right.log_cocycle
    right_stats = grassmann_statistics(right_z)

    verdicts = []
    for i in range(statistics):
        lhs = weighted_mean(left_stats[:, i], log_w=left_w)
        rhs = weighted_mean(right_stats[:, i], log_w=right_w)
        combined = EmpiricalCF(value=lhs.value - rhs.value, stderr=float(np.hypot(lhs.stderr, rhs.stderr)),
                             n_samples=lhs.n_samples + rhs.n_samples)
        verdicts.append(compare(combined, 0.0, params={'statistic': i, 's': s, 'M': M}))
    return verdicts


def schur_pushforward_check(N, n, key, draws=100000, statistics=6, chunk_size=None, threads=None):
    """
    Образ mu_0^{(N)} при проекции Шура совпадает с mu_0^{(n)}: сравнение
    шести ограниченных статистик с прямой выборкой.
    """
    m = _check_chain(np.zeros((2 * N, 2 * N)), N, n)

    def projected(index, size):
        gs = sample_grassmann_invariant(2 * N, key.child('upper'), index=index, size=size)
        return _schur_batch(gs, m, 2 * n)[0]

    upper = np.concatenate(map_chunks(projected, draws, chunk_size=chunk_size, threads=threads))
    direct = _sample_many(2 * n, key.child('direct'), draws, chunk_size, threads)
    a, b = grassmann_statistics(upper), grassmann_statistics(direct)
    return [two_sample_compare(a[:, i], b[:, i], params={'statistic': i, 'N': N, 'n': n})
            for i in range(statistics)]


def gaussian_schur_sample(n, N, key, index=0, size=None, scaled=True):
    """
    N^{-1/2} (a22 - a21 a11^{-1} a12) для стандартной гауссовой g в GL(2N);
    вырожденные a11 отбрасываются.
    """
    if N <= n:
        raise KmlabError(f'gaussian schur limit needs N > n, got N={N}, n={n}')
    batch = 1 if size is None else size
    gs = ginibre(2 * N, 2.0, key, index=index, size=batch)
    out, accepted = _schur_batch(gs, N - n, 2 * n)
    if not accepted.all():
        logger.info('gaussian_schur_sample: %d singular blocks dropped', int((~accepted).sum()))
    return out / np.sqrt(N) if scaled else out


def gaussian_schur_limit_check(n, N, key, draws=4000, chunk_size=None, threads=None, scaled=True):
    """
    Предел Шура для гауссовой меры: статистика E[tr (1 + Z*Z)^{-1}]/(2n)
    против прямой выборки mu_0^{(n)}.
    """
    gauss_chunk = min(chunk_size or GAUSSIAN_CHUNK, GAUSSIAN_CHUNK)

    def chunk(index, size):
        return gaussian_schur_sample(n, N, key.child('gauss'), index=index, size=size, scaled=scaled)

    limit = np.concatenate(map_chunks(chunk, draws, chunk_size=gauss_chunk, threads=threads))
    direct = _sample_many(2 * n, key.child('direct'), draws, chunk_size, threads)
    return two_sample_compare(grassmann_statistics(limit)[:, 0], grassmann_statistics(direct)[:, 0],
                              params={'n': n, 'N': N, 'scaled': scaled})


def gaussian_unscaled_drift(n, sizes, key, draws=4000, chunk_size=None, threads=None):
    """
    Контрольный прогон без множителя N^{-1/2}: среднее tr (1 + Z*Z)^{-1}/(2n)
    по возрастающим N. Возвращает (средние, монотонность).
    """
    sizes = sorted(sizes)
    gauss_chunk = min(chunk_size or GAUSSIAN_CHUNK, GAUSSIAN_CHUNK)
    means = []
    for N in sizes:
        def chunk(index, size, N=N):
            return gaussian_schur_sample(n, N, key.child(f'N{N}'), index=index, size=size, scaled=False)

        z = np.concatenate(map_chunks(chunk, draws, chunk_size=gauss_chunk, threads=threads))
        means.append(float(weighted_mean(grassmann_statistics(z)[:, 0]).value.real))
    steps = np.diff(means)
    monotone = bool(len(steps) > 0 and (np.all(steps < 0) or np.all(steps > 0)))
    return means, monotone
