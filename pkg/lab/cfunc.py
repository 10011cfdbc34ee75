"""
Замкнутые формулы: конечные c-функции Хариш-Чандры для систем корней
A/B/C/D, регуляризованные бесконечные произведения, отношение гамма-функций
Сельберга и статсумма абелевой петлевой меры.

Словарь координат зафиксирован один раз: корни записываются в координатах
e_1, ..., e_l (индекс 1 ближе всего к центру), rho - сумма положительных
корней, спектральный параметр lambda спаривается с корнем евклидово, и
    c(lambda) = prod_{alpha > 0} <rho, alpha> / <rho - i lambda, alpha>
             = harish_c_rational(roots, rho, rho - i lambda).

Бесконечные произведения считаются в логарифмах; хвосты за отсечкой
суммируются точно через log-гамму и дигамму (scipy.special).
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from lab.exceptions import KmlabError, PoleHit

logger = logging.getLogger(__name__)

POLE_TOL = 1e-300


@dataclass(frozen=True)
class SpectralParam:
    """
    Финитный спектральный параметр: пары (индекс, lambda_j), прочие нули.
    Для двусторонних произведений индексы могут быть любыми целыми.
    """
    values: tuple

    def __post_init__(self):
        cleaned = tuple(sorted((int(j), complex(v) if np.iscomplexobj(v) else float(v))
                               for j, v in dict(self.values).items()))
        object.__setattr__(self, 'values', cleaned)

    @classmethod
    def of(cls, mapping):
        return cls(tuple(dict(mapping).items()))

    @classmethod
    def from_vector(cls, vector):
        """Плотный вектор (lambda_1, ..., lambda_n) с индексами от 1."""
        return cls(tuple((j + 1, v) for j, v in enumerate(vector)))

    @property
    def support(self):
        return [j for j, v in self.values if v != 0]

    @property
    def total(self):
        return sum(v for _, v in self.values)

    @property
    def max_index(self):
        support = self.support
        return max(support) if support else 0

    def dense(self, n):
        """Вектор длины n с компонентами lambda_1..lambda_n."""
        out = np.zeros(n, dtype=complex if self.is_complex else float)
        for j, v in self.values:
            if v != 0:
                if not 1 <= j <= n:
                    raise KmlabError(f'lambda index {j} outside 1..{n}')
                out[j - 1] = v
        return out

    @property
    def is_complex(self):
        return any(isinstance(v, complex) for _, v in self.values)

    def __neg__(self):
        return SpectralParam(tuple((j, -v) for j, v in self.values))

    def as_dict(self):
        return {str(j): v for j, v in self.values if v != 0}


def as_spectral(lam):
    if isinstance(lam, SpectralParam):
        return lam
    if isinstance(lam, dict):
        return SpectralParam.of(lam)
    return SpectralParam.from_vector(lam)


@dataclass(frozen=True)
class RootSystemSpec:
    """
    Система корней классического типа. Для A rank = n - 1 (координат n),
    для B/C/D rank = l. rho_j = 2(j-1) для D, 2j для C, 2j-1 для B.
    """
    family: str
    rank: int

    def __post_init__(self):
        if self.family not in ('A', 'B', 'C', 'D'):
            raise KmlabError(f'unknown root system family: {self.family}')
        if self.rank < 1:
            raise KmlabError('rank must be positive')

    @property
    def dim(self):
        return self.rank + 1 if self.family == 'A' else self.rank

    @property
    def rho(self):
        return _root_data(self.family, self.rank)[1]

    @property
    def positive_roots(self):
        return _root_data(self.family, self.rank)[0]


@lru_cache(maxsize=None)
def _root_data(family, rank):
    if family == 'A':
        n = rank + 1
        roots = []
        for j in range(n):
            for k in range(j + 1, n):
                alpha = np.zeros(n)
                alpha[j], alpha[k] = 1.0, -1.0
                roots.append(alpha)
        rho = np.array([n + 1 - 2 * j for j in range(1, n + 1)], dtype=float)
        return np.array(roots), rho

    l = rank
    roots = []
    for j in range(l):
        for k in range(j + 1, l):
            alpha = np.zeros(l)
            alpha[k], alpha[j] = 1.0, -1.0
            roots.append(alpha)
    for p in range(l):
        for q in range(p + 1, l):
            alpha = np.zeros(l)
            alpha[p], alpha[q] = 1.0, 1.0
            roots.append(alpha)
    if family == 'C':
        for p in range(l):
            alpha = np.zeros(l)
            alpha[p] = 2.0
            roots.append(alpha)
    if family == 'B':
        for p in range(l):
            alpha = np.zeros(l)
            alpha[p] = 1.0
            roots.append(alpha)
    offset = {'D': -2, 'C': 0, 'B': -1}[family]
    rho = np.array([2 * j + offset for j in range(1, l + 1)], dtype=float)
    return np.array(roots).reshape(-1, l), rho


def harish_c_rational(positive_roots, rho, mu):
    """
    pi(rho)/pi(mu), pi(x) = prod_{alpha > 0} <x, alpha> (евклидово спаривание).
    PoleHit, если какое-то <mu, alpha> равно нулю.
    """
    roots = np.asarray(positive_roots, dtype=float)
    if roots.size == 0:
        return 1.0 + 0.0j
    num = roots @ np.asarray(rho, dtype=complex)
    den = roots @ np.asarray(mu, dtype=complex)
    hit = np.abs(den) <= POLE_TOL
    if np.any(hit):
        raise PoleHit(int(np.argmax(hit)))
    return complex(np.exp(np.sum(np.log(num) - np.log(den))))


def root_system(spec):
    """(положительные корни, rho) для RootSystemSpec."""
    return _root_data(spec.family, spec.rank)


def root_system_A(n):
    """Корни e_j - e_k (j < k) и rho_j = n + 1 - 2j для SU(n)."""
    return _root_data('A', n - 1)


def c_generic(roots, rho, lam):
    """c(lambda) = pi(rho)/pi(rho - i lambda) по произвольным корням и rho."""
    rho = np.asarray(rho, dtype=float)
    return harish_c_rational(roots, rho, rho - 1j * np.asarray(lam))


def _c_from_roots(spec, lam_vec):
    return c_generic(*root_system(spec), lam_vec)


def c_finite_A(n, lam):
    """
    prod_{1 <= j < k <= n} (1 + (i/2)(lambda_j - lambda_k)/(j - k))^{-1}.

    Сомножители без носителя lambda равны 1, поэтому считаются только пары,
    задевающие носитель: стоимость O(|supp| n), что позволяет n ~ 10^4.
    """
    lam = as_spectral(lam)
    if lam.max_index > n:
        raise KmlabError(f'support of lambda exceeds n={n}')
    if n <= 12:
        return _c_from_roots(RootSystemSpec('A', n - 1), lam.dense(n))
    return complex(np.exp(-_pair_log_sum_A(lam.dense(n), n)))


def _pair_log_sum_A(vec, n, cutoff=None):
    """
    sum over pairs j < k <= K of log(1 + (i/2)(lambda_j - lambda_k)/(j - k)),
    где K = cutoff или n; vec задаёт lambda на 1..len(vec), дальше нули.
    """
    k_max = n if cutoff is None else cutoff
    support = [j + 1 for j in np.flatnonzero(vec)]
    full = np.zeros(k_max, dtype=complex)
    full[:len(vec)] = vec
    total = 0.0 + 0.0j
    for j in support:
        ks = np.arange(j + 1, k_max + 1)
        factor = (0.5j) * (full[j - 1] - full[ks - 1]) / (j - ks)
        total += _safe_log1p(factor).sum()
    in_support = set(support)
    for k in support:
        js = np.array([j for j in range(1, k) if j not in in_support])
        if js.size:
            factor = (0.5j) * (-full[k - 1]) / (js - k)
            total += _safe_log1p(factor).sum()
    return total


def _safe_log1p(x):
    x = np.asarray(x, dtype=complex)
    hit = np.abs(1.0 + x) <= POLE_TOL
    if np.any(hit):
        raise PoleHit(int(np.argmax(hit)))
    return np.log1p(x)


def _gamma_tail_log(a, y):
    """log prod_{d >= a} (1 + y/d) e^{-y/d} = log Gamma(a) - log Gamma(a + y) + y psi(a)."""
    return special.loggamma(a) - special.loggamma(a + y) + y * special.digamma(a)


def c_scaled_A(n, lam):
    """Конечная форма для масштабированного SU(n): exp(-(i/2) log n sum lambda) c_finite_A(n, lam)."""
    lam = as_spectral(lam)
    return complex(np.exp(-0.5j * np.log(n) * lam.total) * c_finite_A(n, lam))


def c_limit_A(lam, cutoff=None, tail_correction=True):
    """
    Регуляризованное произведение
        exp((i/2) gamma sum lambda) prod_{1 <= j < k} [(1 + (i/2)(lambda_j - lambda_k)/(j - k))
                                                      e^{-(i/2) lambda_j/(j - k)}]^{-1}.

    Пары с k <= K (K = cutoff или наибольший индекс носителя) суммируются явно,
    хвост k > K для каждого j из носителя равен точно
    log Gamma(a) - log Gamma(a - x) - x psi(a), x = (i/2) lambda_j, a = K - j + 1.
    При tail_correction=False хвост отбрасывается (погрешность O(1/K)).
    """
    lam = as_spectral(lam)
    support = lam.support
    if not support:
        return 1.0 + 0.0j
    j_max = lam.max_index
    k_max = j_max if cutoff is None else max(int(cutoff), j_max)
    vec = lam.dense(j_max)

    log_c = 0.5j * np.euler_gamma * lam.total
    log_c -= _pair_log_sum_A(vec, k_max)
    for j in support:
        x = 0.5j * vec[j - 1]
        ks = np.arange(j + 1, k_max + 1)
        # регуляризующие экспоненты e^{-(i/2) lambda_j/(j - k)} по k <= K
        log_c += np.sum(x / (j - ks))
        if tail_correction:
            log_c -= _gamma_tail_log(k_max - j + 1, -x)
    return complex(np.exp(log_c))


def richardson_limit(func, n, levels=3):
    """
    Экстраполяция Ричардсона по 1/n на лестнице n, 2n, 4n, ...:
    исключает члены 1/n, ..., 1/n^{levels-1}.
    """
    table = [complex(func(n * 2 ** i)) for i in range(levels)]
    for order in range(1, levels):
        factor = 2.0 ** order
        table = [(factor * table[i + 1] - table[i]) / (factor - 1.0) for i in range(len(table) - 1)]
    return table[0]


def c_finite_doubly(lam, N, M):
    """
    Конечная форма двустороннего произведения по индексам -N < j <= M:
    exp(-(i/2) log(N/M) sum lambda) prod_{j < k} (1 - (i/2)(lambda_k - lambda_j)/(k - j))^{-1}.
    """
    lam = as_spectral(lam)
    support = lam.support
    if not support:
        return 1.0 + 0.0j
    if min(support) <= -N or max(support) > M:
        raise KmlabError(f'support of lambda outside (-{N}, {M}]')
    values = dict(lam.values)
    index = np.arange(-N + 1, M + 1)
    full = np.array([values.get(int(j), 0.0) for j in index], dtype=complex)
    pos = {int(j): i for i, j in enumerate(index)}
    in_support = set(support)

    log_prod = 0.0 + 0.0j
    for j in support:
        right = index[pos[j] + 1:]
        term = -(0.5j) * (full[pos[j] + 1:] - full[pos[j]]) / (right - j)
        log_prod += _safe_log1p(term).sum()
        left = np.array([k for k in index[:pos[j]] if int(k) not in in_support])
        if left.size:
            term = -(0.5j) * full[pos[j]] / (j - left)
            log_prod += _safe_log1p(term).sum()
    prefactor = -0.5j * np.log(N / M) * lam.total
    return complex(np.exp(prefactor - log_prod))


def c_limit_doubly_infinite(lam):
    """
    Симметричный предел (N = M -> infinity) двустороннего произведения.

    С x_j = (i/2) lambda_j:
        c = prod_j Gamma(1 + x_j) Gamma(1 - x_j)
            * prod_{j < k in supp} (1 - (x_k - x_j)/(k - j))^{-1}
            * prod_{j, d > 0, j + d in supp} (1 + x_j/d)
            * prod_{j, d > 0, j - d in supp} (1 - x_j/d).
    Для одной точки носителя это (pi lambda/2)/sinh(pi lambda/2).
    """
    lam = as_spectral(lam)
    support = lam.support
    if not support:
        return 1.0 + 0.0j
    values = dict(lam.values)
    x = {j: 0.5j * values[j] for j in support}
    log_c = 0.0 + 0.0j
    for j in support:
        log_c += special.loggamma(1 + x[j]) + special.loggamma(1 - x[j])
    for a, j in enumerate(support):
        for k in support[a + 1:]:
            log_c -= _safe_log1p(-(x[k] - x[j]) / (k - j))
            log_c += _safe_log1p(x[j] / (k - j))
            log_c += _safe_log1p(-x[k] / (k - j))
    return complex(np.exp(log_c))


def c_finite_BCD(spec, lam, printed_typo=False):
    """
    Произведение типов B/C/D по положительным корням:
        разностные корни e_k - e_j:  (1 - (i/2)(lambda_k - lambda_j)/(k - j))^{-1};
        суммы e_p + e_q:             (1 - (i/2)(lambda_p + lambda_q)/den)^{-1},
                                     den = p+q-2 (D), p+q (C, включая p = q), p+q-1 (B);
        короткие корни e_r (B):      (1 - i lambda_r/(2r - 1))^{-1}.

    printed_typo=True заменяет знаменатель типа D на p+q-1 (только для отчётов).
    """
    lam = as_spectral(lam)
    if spec.family == 'A':
        return c_finite_A(spec.dim, lam)
    vec = lam.dense(spec.rank)
    if printed_typo and spec.family == 'D':
        return _c_finite_D_printed(vec)
    return _c_from_roots(spec, vec)


def _c_finite_D_printed(vec):
    l = len(vec)
    log_c = 0.0 + 0.0j
    for j in range(1, l + 1):
        for k in range(j + 1, l + 1):
            log_c -= _safe_log1p(-0.5j * (vec[k - 1] - vec[j - 1]) / (k - j))
    for p in range(1, l + 1):
        for q in range(p + 1, l + 1):
            log_c -= _safe_log1p(-0.5j * (vec[p - 1] + vec[q - 1]) / (p + q - 1))
    return complex(np.exp(log_c))


def weight_vector(spec, r=None):
    """
    Индикатор координат a_j, входящих в вес |sigma_r|:
    A - первые r координат (по умолчанию r = 1, фундаментальный вес);
    B/C/D - последние r координат (по умолчанию r = l, вес det|A|).
    """
    dim = spec.dim
    w = np.zeros(dim)
    if spec.family == 'A':
        r = 1 if r is None else r
        w[:r] = 1.0
    else:
        r = spec.rank if r is None else r
        w[dim - r:] = 1.0
    return w


def c_weighted(spec, lam, s, r=None):
    """
    Взвешенная c-функция c(lambda + 2is w)/c(2is w), w = weight_vector(spec, r).

    Для B/C/D с весом det|A| это произведение с знаменателями сумм корней,
    сдвинутыми на 2s, и 2r - 1 -> 2r - 1 + 2s для коротких корней B.
    """
    lam = as_spectral(lam)
    vec = lam.dense(spec.dim).astype(complex)
    shift = 2j * s * weight_vector(spec, r)
    return _c_from_roots(spec, vec + shift) / _c_from_roots(spec, shift)


def selberg_gamma_ratio(n, s):
    """prod_{j=1}^{n} Gamma(j - is)/Gamma(j) через комплексную log-гамму."""
    j = np.arange(1, n + 1)
    return complex(np.exp(np.sum(special.loggamma(j - 1j * s) - special.gammaln(j))))


def partition_Z(beta, k):
    """
    Статсумма Z = prod_{n > 0} (1 + k/(beta n))^{-1} e^{k/(beta n)}
                = Gamma(1 + k/beta) e^{gamma k/beta}.
    """
    if beta <= 0 or k < 0:
        raise KmlabError('need beta > 0 and k >= 0')
    y = k / beta
    return float(np.exp(special.gammaln(1.0 + y) + np.euler_gamma * y))


def partition_Z_printed(beta, k):
    """Альтернативная запись Gamma(1 + k/beta) e^{-gamma k/beta} (для отчётов)."""
    y = k / beta
    return float(np.exp(special.gammaln(1.0 + y) - np.euler_gamma * y))


def partition_Z_product(beta, k, cutoff, tail_correction=True):
    """
    Произведение до n <= cutoff; с tail_correction хвост n > cutoff добавляется
    точно: Gamma(K + 1 + y)/Gamma(K + 1) e^{-y psi(K + 1)}.
    """
    y = k / beta
    n = np.arange(1, int(cutoff) + 1, dtype=float)
    log_z = np.sum(y / n - np.log1p(y / n))
    if tail_correction:
        log_z -= float(np.real(_gamma_tail_log(cutoff + 1.0, y)))
    return float(np.exp(log_z))
