"""
Плотная комплексная линейная алгебра: разложение Брюа (LDU без выбора
ведущего элемента) с ведущими минорами, дополнения Шура, матричная
экспонента и унитарный QR с положительной диагональю R.

Все функции чистые: входные массивы не изменяются.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from lab.exceptions import KmlabError, RankDeficient, SingularBlock, SingularMinor

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-12
BLOCK_COND_LIMIT = 1e12

ComplexMatrix = np.ndarray


def as_complex_matrix(m, square=True):
    """
    Приводит вход к комплексному двумерному массиву и проверяет инварианты
    ComplexMatrix: конечные элементы и (по умолчанию) квадратная форма.
    """
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2:
        raise KmlabError(f'expected a matrix, got shape {arr.shape}')
    if square and arr.shape[0] != arr.shape[1]:
        raise KmlabError(f'expected a square matrix, got shape {arr.shape}')
    if not np.all(np.isfinite(arr)):
        raise KmlabError('matrix has non-finite entries')
    return arr


def row_scale(m):
    """Масштаб матрицы для допусков: максимальная евклидова норма строки."""
    return float(np.max(np.linalg.norm(m, axis=-1))) if m.size else 0.0


@dataclass(frozen=True)
class LDUFactorization:
    """
    Разложение m = l · diag(d) · u, где l унитреугольная снизу, u унитреугольная
    сверху, а pivots[j] = d[0]·…·d[j] совпадает с ведущим минором порядка j+1.
    """
    l: np.ndarray
    d: np.ndarray
    u: np.ndarray
    pivots: np.ndarray

    def reconstruct(self):
        return (self.l * self.d) @ self.u

    @property
    def det(self):
        return self.pivots[-1]


def ldu(m, tol=PIVOT_TOL):
    """
    Разложение Брюа без перестановок (схема Дулиттла).

    Ведущий минор det A^(j) (накопленное произведение d) сравнивается с
    tol · s^j, где s - максимальная норма строки; при меньшем значении
    поднимается SingularMinor(j) с нумерацией от 1: элемент лежит вне
    верхней страты и перестановка строк запрещена.
    """
    a = as_complex_matrix(m)
    n = a.shape[0]
    scale = row_scale(a)
    work = a.copy()
    l = np.eye(n, dtype=complex)
    minor = 1.0 + 0.0j

    for k in range(n):
        piv = work[k, k]
        minor *= piv
        if scale == 0.0 or abs(minor) <= tol * scale ** (k + 1):
            raise SingularMinor(k + 1, minor)
        l[k + 1:, k] = work[k + 1:, k] / piv
        work[k + 1:, k:] -= np.outer(l[k + 1:, k], work[k, k:])
        work[k + 1:, k] = 0.0

    d = np.diagonal(work).copy()
    u = work / d[:, None]
    np.fill_diagonal(u, 1.0)
    return LDUFactorization(l=l, d=d, u=u, pivots=np.cumprod(d))


def leading_minors(m):
    """
    Вектор ведущих главных миноров det A^(j), j = 1..n.

    Для матриц в верхней страте миноры берутся из ldu как накопленные
    произведения; иначе считаются явными определителями (нули допустимы).
    """
    a = as_complex_matrix(m)
    try:
        return ldu(a).pivots
    except SingularMinor:
        logger.debug('leading_minors: falling back to explicit determinants')
        n = a.shape[0]
        return np.array([np.linalg.det(a[:j, :j]) for j in range(1, n + 1)])


def leading_minors_batch(ms, depth=None):
    """
    Ведущие миноры для стопки матриц формы (..., n, n): результат (..., depth).
    Используется в Монте-Карло, где важна векторизация.
    """
    ms = np.asarray(ms)
    n = ms.shape[-1]
    depth = n if depth is None else depth
    out = np.empty(ms.shape[:-2] + (depth,), dtype=complex)
    for j in range(1, depth + 1):
        out[..., j - 1] = np.linalg.det(ms[..., :j, :j])
    return out


def _check_block(block):
    if block.size and np.linalg.cond(block) > BLOCK_COND_LIMIT:
        raise SingularBlock(f'block of size {block.shape[0]} is numerically singular')


def schur_complement(g, split):
    """
    Дополнение Шура a22 - a21 a11^{-1} a12 для разбиения g на блоки
    размеров split = (m, k), m + k = размер g.
    """
    a = as_complex_matrix(g)
    m, k = split
    if m + k != a.shape[0]:
        raise KmlabError(f'split {split} does not match size {a.shape[0]}')
    a11, a12 = a[:m, :m], a[:m, m:]
    a21, a22 = a[m:, :m], a[m:, m:]
    if m == 0:
        return a22.copy()
    _check_block(a11)
    return a22 - a21 @ np.linalg.solve(a11, a12)


@dataclass(frozen=True)
class BlockLDU:
    """Блочное разложение: l (блочно унитреугольная снизу), блоки d, u (сверху)."""
    l: np.ndarray
    d: np.ndarray
    u: np.ndarray
    block: int

    def d_matrix(self):
        return scipy.linalg.block_diag(*self.d)

    def reconstruct(self):
        return self.l @ self.d_matrix() @ self.u


def block_ldu(m, block):
    """
    Блочное LDU без перестановок с блоками размера block.
    Вырожденный диагональный блок даёт SingularBlock.
    """
    a = as_complex_matrix(m)
    size = a.shape[0]
    if size % block:
        raise KmlabError(f'size {size} is not a multiple of block {block}')
    count = size // block
    work = a.copy()
    l = np.eye(size, dtype=complex)
    u = np.eye(size, dtype=complex)
    d = np.empty((count, block, block), dtype=complex)

    for k in range(count):
        sl = slice(k * block, (k + 1) * block)
        rest = slice((k + 1) * block, size)
        dk = work[sl, sl]
        _check_block(dk)
        d[k] = dk
        l[rest, sl] = np.linalg.solve(dk.T, work[rest, sl].T).T
        u[sl, rest] = np.linalg.solve(dk, work[sl, rest])
        work[rest, rest] -= work[rest, sl] @ u[sl, rest]
    return BlockLDU(l=l, d=d, u=u, block=block)


def expm(m):
    """
    Матричная экспонента: scipy.linalg.expm (масштабирование и возведение
    в квадрат с диагональной аппроксимацией Паде порядка до 13).
    """
    return scipy.linalg.expm(as_complex_matrix(m))


def qr_unitary(m, tol=PIVOT_TOL):
    """
    QR с фазовой поправкой: диагональ R вещественна и положительна, фазы
    перенесены в столбцы Q. Принимает как одну матрицу, так и стопку (..., n, n).
    """
    a = np.asarray(m, dtype=complex)
    q, r = np.linalg.qr(a)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    scale = np.max(np.abs(a)) if a.size else 0.0
    small = np.abs(diag) <= tol * max(scale, np.finfo(float).tiny)
    if np.any(small):
        raise RankDeficient(int(np.argmax(small.reshape(-1, diag.shape[-1]).any(axis=0))) + 1)
    phase = diag / np.abs(diag)
    q = q * phase[..., None, :]
    r = np.conj(phase)[..., :, None] * r
    return q, r
