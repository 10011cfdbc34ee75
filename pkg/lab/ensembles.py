"""
Генераторы случайных матриц для всех мер лаборатории на конечном ранге.

- гауссова мера Жинибра nu_beta и произведения nu_d;
- мера Хаара на U(n), SU(n), SO(n), Sp(l), в стандартном базисе и в базисе
  квадратичной формы (eps_i, eps_j) = delta(i + j);
- масштабированный ансамбль SU(n);
- абелевы гауссовы петли и дискретизированные петли в SU(2).

Каждый генератор детерминирован парой (StreamKey, index): одинаковые
seed, поток и индекс дают побитово одинаковые выборки. Параметр size
возвращает стопку из size независимых матриц формы (size, n, n).
"""
import logging
import zlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from lab.exceptions import KmlabError
from lab.linalg_core import qr_unitary

logger = logging.getLogger(__name__)

FAMILIES = ('A', 'B', 'C', 'D')
BASES = ('standard', 'quadratic-form')


@dataclass(frozen=True)
class StreamKey:
    """
    Ключ потока случайных чисел.

    generator(index) строит PCG64 из SeedSequence(seed, spawn_key=(stream, index)),
    поэтому разные (seed, stream) независимы, а index нумерует порции (чанки)
    внутри одного потока.
    """
    seed: int
    stream: int = 0

    def generator(self, index=0):
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream, index))
        return np.random.Generator(np.random.PCG64(seq))

    @classmethod
    def named(cls, seed, name):
        """Поток с номером, однозначно выведенным из имени проверки."""
        return cls(seed=seed, stream=zlib.crc32(name.encode('utf-8')))

    def child(self, name):
        return StreamKey(seed=self.seed, stream=zlib.crc32(f'{self.stream}/{name}'.encode('utf-8')))


@dataclass(frozen=True)
class GroupSpec:
    """
    Компактная группа: A = SU(rank+1), D = SO(2l), B = SO(2l+1), C = Sp(l),
    в стандартном базисе или в базисе квадратичной формы.
    """
    family: str
    rank: int
    basis: str = 'standard'

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise KmlabError(f'unknown group family: {self.family}')
        if self.basis not in BASES:
            raise KmlabError(f'unknown basis: {self.basis}')
        if self.rank < 1:
            raise KmlabError('rank must be positive')

    @classmethod
    def su(cls, n):
        return cls('A', n - 1)

    @property
    def size(self):
        return {
            'A': self.rank + 1,
            'B': 2 * self.rank + 1,
            'C': 2 * self.rank,
            'D': 2 * self.rank,
        }[self.family]

    @property
    def label(self):
        n = self.size
        return {'A': f'SU({n})', 'B': f'SO({n})', 'C': f'Sp({self.rank})', 'D': f'SO({n})'}[self.family]


def _batch_shape(size, n, m=None):
    m = n if m is None else m
    return (n, m) if size is None else (size, n, m)


def complex_normal(rng, shape, variance):
    """Комплексная гауссова величина с E|z|^2 = variance."""
    std = np.sqrt(variance / 2.0)
    return std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def ginibre(n, beta, key, index=0, size=None):
    """
    Мера nu_beta: независимые центрированные комплексные гауссовы элементы
    с E|g_ij|^2 = 2/beta. Характеристическая функция при спаривании
    Re tr(x* g) равна exp(-tr(x* x)/(2 beta)).
    """
    if beta <= 0:
        raise KmlabError('beta must be positive')
    rng = key.generator(index)
    return complex_normal(rng, _batch_shape(size, n), 2.0 / beta)


def haar_unitary(n, key, index=0, size=None):
    """Мера Хаара на U(n): QR гауссовой матрицы с положительной диагональю R."""
    z = ginibre(n, 2.0, key, index=index, size=size)
    q, _ = qr_unitary(z)
    return q


def haar_special_unitary(n, key, index=0, size=None):
    """Мера Хаара на SU(n): делим на корень n-й степени из определителя."""
    q = haar_unitary(n, key, index=index, size=size)
    phase = np.exp(1j * np.angle(np.linalg.det(q)) / n)
    return q / phase[..., None, None]


def haar_unitary_columns(n, k, key, index=0, size=None):
    """
    Первые k столбцов матрицы Хаара из U(n) через тонкий QR гауссовой
    матрицы n x k. Модули ведущих миноров порядка <= k совпадают
    по закону с теми же минорами для SU(n).
    """
    rng = key.generator(index)
    z = complex_normal(rng, _batch_shape(size, n, k), 1.0)
    q, r = np.linalg.qr(z, mode='reduced')
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[..., None, :]


def haar_orthogonal(n, key, index=0, size=None):
    """Мера Хаара на SO(n): вещественный QR, знаки диагонали R, det = +1."""
    rng = key.generator(index)
    z = rng.standard_normal(_batch_shape(size, n))
    q, r = np.linalg.qr(z)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    q = q * signs[..., None, :]
    flip = np.asarray(np.linalg.det(q) < 0)
    q[..., :, 0] = np.where(flip[..., None], -q[..., :, 0], q[..., :, 0])
    return q


def symplectic_form(l):
    """J = [[0, I], [-I, 0]]: комплексная структура, сохраняемая Sp(l) внутри U(2l)."""
    eye = np.eye(l)
    zero = np.zeros((l, l))
    return np.block([[zero, eye], [-eye, zero]]).astype(complex)


def haar_symplectic(l, key, index=0, size=None):
    """
    Мера Хаара на компактной Sp(l) = {g in U(2l): g^T J g = J}.

    Кватернионный Грам-Шмидт: столбец u_k ортогонализуется к предыдущим
    столбцам и их партнёрам, партнёр столбца равен -J conj(u_k).
    """
    rng = key.generator(index)
    batch = 1 if size is None else size
    j_form = symplectic_form(l)
    g = np.zeros((batch, 2 * l, 2 * l), dtype=complex)
    for k in range(l):
        v = complex_normal(rng, (batch, 2 * l), 1.0)
        for prev in list(range(k)) + list(range(l, l + k)):
            col = g[:, :, prev]
            v -= np.einsum('bi,bi->b', col.conj(), v)[:, None] * col
        v /= np.linalg.norm(v, axis=1)[:, None]
        g[:, :, k] = v
        g[:, :, l + k] = -np.einsum('ij,bj->bi', j_form, v.conj())
    return g[0] if size is None else g


@lru_cache(maxsize=None)
def _form_basis(family, rank):
    """
    Матрица P (столбцы = векторы базиса eps в стандартных координатах).

    D, B: eps_{-a} = (e_a - i f_a)/sqrt2, eps_a = (e_a + i f_a)/sqrt2 в порядке
    eps_{-l}, ..., eps_{-1}, [eps_0], eps_1, ..., eps_l. Грам-матрица P^T P -
    единицы на побочной диагонали.
    C: перестановка (e_{2l}, ..., e_{l+1}, e_1, ..., e_l) стандартного базиса C^{2l}.
    """
    l = rank
    if family == 'C':
        order = list(range(2 * l - 1, l - 1, -1)) + list(range(l))
        return np.eye(2 * l, dtype=complex)[:, order]
    n = 2 * l + (1 if family == 'B' else 0)
    p = np.zeros((n, n), dtype=complex)
    s2 = np.sqrt(2.0)
    for a in range(1, l + 1):
        e, f = a - 1, l + a - 1
        neg = l - a
        pos = n - 1 - neg
        p[e, neg], p[f, neg] = 1 / s2, -1j / s2
        p[e, pos], p[f, pos] = 1 / s2, 1j / s2
    if family == 'B':
        p[n - 1, l] = 1.0
    return p


def form_basis(spec):
    if spec.family == 'A':
        return np.eye(spec.size, dtype=complex)
    return _form_basis(spec.family, spec.rank)


def form_gram(spec):
    """Грам-матрица билинейной формы в базисе eps."""
    p = form_basis(spec)
    if spec.family == 'C':
        return p.T @ symplectic_form(spec.rank) @ p
    return p.T @ p


def form_transpose(x, spec):
    """Транспонирование относительно формы: x^t = S^{-1} x^T S."""
    s = form_gram(spec)
    return np.linalg.solve(s, np.swapaxes(x, -1, -2)) @ s


def to_form_basis(g, spec):
    p = form_basis(spec)
    return p.conj().T @ g @ p


def haar_compact(spec, key, index=0, size=None):
    """
    Мера Хаара на группе spec. В базисе квадратичной формы выборка
    сопрягается фиксированной матрицей P: g -> P* g P.
    """
    if spec.family == 'A':
        g = haar_special_unitary(spec.size, key, index=index, size=size)
    elif spec.family == 'C':
        g = haar_symplectic(spec.rank, key, index=index, size=size)
    else:
        g = haar_orthogonal(spec.size, key, index=index, size=size).astype(complex)
    if spec.basis == 'quadratic-form' and spec.family != 'A':
        g = to_form_basis(g, spec)
    return g


def scaled_su(n, beta, key, index=0, size=None):
    """(n/beta)^{1/2} * SU(n): элементы с дисперсией 1/beta."""
    if beta <= 0:
        raise KmlabError('beta must be positive')
    return np.sqrt(n / beta) * haar_special_unitary(n, key, index=index, size=size)


def product_measure_sample(d, n, key, index=0, size=None):
    """
    Мера nu_d: угловой блок n x n произведения X diag(d) Y, где X, Y независимы
    и распределены по nu_1 (E|x_ij|^2 = 2). Тогда при n = 1 характеристическая
    функция равна prod (1 + d_j^2 u^2)^{-1}.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or np.any(np.diff(d) > 0):
        raise KmlabError('weights must be nonnegative and nonincreasing')
    width = max(len(d), n)
    d = np.concatenate([d, np.zeros(width - len(d))])
    rng = key.generator(index)
    shape = _batch_shape(size, width)
    x = complex_normal(rng, shape, 2.0)
    y = complex_normal(rng, shape, 2.0)
    return ((x * d[..., None, :]) @ y)[..., :n, :n]


def abelian_loop_sample(beta, K, key, index=0, size=None):
    """Коэффициенты x_n, 1 <= n <= K: независимые комплексные гауссовы с E|x_n|^2 = 1/(beta n^2)."""
    if beta <= 0 or K < 1:
        raise KmlabError('need beta > 0 and K >= 1')
    rng = key.generator(index)
    modes = np.arange(1, K + 1)
    shape = (K,) if size is None else (size, K)
    return complex_normal(rng, shape, 1.0) / (np.sqrt(beta) * modes)


def abelian_loop_values(x, theta):
    """x(theta) = sum_n (x_n e^{in theta} + conj(x_n) e^{-in theta})."""
    modes = np.arange(1, np.shape(x)[-1] + 1)
    phases = np.exp(1j * np.outer(theta, modes))
    return 2.0 * np.real(np.asarray(x) @ phases.T)


PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def su2_exp(v):
    """exp(i v . sigma) для стопки трёхмерных векторов v."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v, axis=-1)
    safe = np.where(norm > 0, norm, 1.0)
    unit = v / safe[..., None]
    sigma = np.einsum('...k,kij->...ij', unit, PAULI)
    eye = np.eye(2, dtype=complex)
    return np.cos(norm)[..., None, None] * eye + 1j * np.sin(norm)[..., None, None] * sigma


def su2_log(g):
    """Главная ветвь логарифма в SU(2): вектор v с g = exp(i v . sigma)."""
    g = np.asarray(g)
    cos_phi = np.clip(np.real(np.trace(g, axis1=-2, axis2=-1)) / 2.0, -1.0, 1.0)
    phi = np.arccos(cos_phi)
    # i sin(phi) v_k/|v| = tr(g sigma_k)/2
    comps = np.einsum('...ij,kji->...k', g, PAULI) / 2.0
    sin_phi = np.sin(phi)
    scale = np.where(sin_phi > 1e-15, phi / np.where(sin_phi > 1e-15, sin_phi, 1.0), 1.0)
    return np.real(comps / 1j) * scale[..., None]


def su2_loop_sample(beta, steps, key, index=0, abelian=False):
    """
    Дискретизированная петля в SU(2) (приближение к винеровой мере петель).

    Броуновский мост в su(2) на [0, 2pi] со скоростью дисперсии 2pi/beta
    (при этом абелева проекция имеет E|x_n|^2 = 1/(beta n^2)) развёртывается
    в группу произведением экспонент приращений. Незамкнутость конца
    исправляется геодезической поправкой g_j exp(-(j/steps) log g_end).
    При abelian=True приращения лежат в диагональном торе и петля замкнута точно.

    Возвращает массив (steps, 2, 2) значений g(2 pi j/steps).
    """
    if beta <= 0:
        raise KmlabError('beta must be positive')
    rng = key.generator(index)
    h = 2.0 * np.pi / steps
    rate = 2.0 * np.pi / beta
    increments = rng.standard_normal((steps, 3)) * np.sqrt(rate * h)
    if abelian:
        increments[:, :2] = 0.0
    # мост: вычитаем равномерную долю полного приращения
    increments -= increments.sum(axis=0) / steps
    factors = su2_exp(increments)
    values = np.empty((steps, 2, 2), dtype=complex)
    current = np.eye(2, dtype=complex)
    for j in range(steps):
        values[j] = current
        current = current @ factors[j]
    if not abelian:
        log_end = su2_log(current)
        fractions = np.arange(steps) / steps
        values = values @ su2_exp(-fractions[:, None] * log_end[None, :])
    return values


def bounded_statistics(g):
    """
    Батарея из 8 ограниченных статистик для проверки инвариантности
    закона матриц (|g_ij| <= 1 для унитарных).
    """
    g = np.asarray(g)
    n = g.shape[-1]
    last = n - 1
    return np.stack([
        np.real(g[..., 0, 0]),
        np.imag(g[..., 0, 0]),
        np.abs(g[..., 0, 0]) ** 2,
        np.abs(g[..., 0, last]) ** 2,
        np.real(g[..., last, last]),
        np.real(np.trace(g, axis1=-2, axis2=-1)) / n,
        np.abs(np.trace(g, axis1=-2, axis2=-1)) ** 2 / n ** 2,
        np.real(g[..., 0, 0] * np.conj(g[..., last, 0])),
    ], axis=-1)
