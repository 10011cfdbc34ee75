"""
Сферический анализ ранга 1 (SL(2, C)): характеристическая функция sech,
её плотность на A, обращение преобразования Хариша рядом вычетов и
квадратурой, замкнутая форма phi и численный зонд аффинного произведения.

Координата на A: a > 0, u = log a, v = 2 log a. Мера dm(a) = 2 da/a = dv.
"""
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from lab import cfunc
from lab.exceptions import DivergenceAlarm, KmlabError, PoleHit, TailDivergence

logger = logging.getLogger(__name__)

QUAD_EPS = 1e-12
SERIES_TOL = 1e-14
TAIL_GRID = (16.0, 32.0, 64.0, 128.0)
V_MAX = 1400.0
MASS_U_MAX = 40.0


def _exp_clipped(u):
    """e^u с |u| <= V_MAX/2: плотности не видят нулевого или бесконечного a."""
    return np.exp(np.clip(u, -V_MAX / 2, V_MAX / 2))


@dataclass(frozen=True)
class RadialDensity:
    """Радиальная плотность на A, нормированная по мере da/a."""
    grid: np.ndarray
    values: np.ndarray
    normalization: float
    func: Callable

    def mass(self):
        value, _ = integrate.quad(lambda u: self.func(_exp_clipped(u)), -np.inf, np.inf,
                                  epsabs=QUAD_EPS, epsrel=QUAD_EPS)
        return value / self.normalization


def radial_density(func, grid):
    """Нормирует func по мере da/a (квадратура по u = log a) и табулирует на grid."""
    normalization, _ = integrate.quad(lambda u: func(_exp_clipped(u)), -np.inf, np.inf,
                                      epsabs=QUAD_EPS, epsrel=QUAD_EPS)
    if not normalization > 0:
        raise KmlabError('radial density must have positive mass')
    grid = np.asarray(grid, dtype=float)
    values = np.array([func(a) for a in grid]) / normalization
    return RadialDensity(grid=grid, values=values, normalization=float(normalization), func=func)


def sech_cf(lam):
    """sech(pi lambda/2)."""
    return float(1.0 / np.cosh(np.pi * lam / 2))


def sech_partial_product(lam, N):
    """prod_{n <= N} (1 + (lambda/(2n - 1))^2)^{-1}."""
    odd = 2.0 * np.arange(1, int(N) + 1) - 1.0
    return float(np.exp(-np.sum(np.log1p((lam / odd) ** 2))))


def sech_density(a):
    """(2/pi) / (a^2 + a^{-2}) относительно dm(a) = 2 da/a."""
    if np.any(np.asarray(a) <= 0):
        raise KmlabError('a must be positive')
    return 2.0 / np.pi / (a ** 2 + a ** -2.0)


def multiplicative_transform(density, lam):
    """int density(a) a^{2i lambda} dm(a) = int density(e^{v/2}) e^{i lambda v} dv."""
    def even(v):
        v = min(v, V_MAX)
        return (density(np.exp(v / 2)) + density(np.exp(-v / 2))) / 2

    def odd(v):
        v = min(v, V_MAX)
        return (density(np.exp(v / 2)) - density(np.exp(-v / 2))) / 2

    if lam == 0:
        value, _ = integrate.quad(even, 0, np.inf, epsabs=QUAD_EPS, epsrel=QUAD_EPS)
        return complex(2 * value)
    re, _ = integrate.quad(even, 0, np.inf, weight='cos', wvar=abs(lam), epsabs=QUAD_EPS)
    im, _ = integrate.quad(odd, 0, np.inf, weight='sin', wvar=abs(lam), epsabs=QUAD_EPS)
    return complex(2 * re, 2 * np.sign(lam) * im)


def sech_transform(lam):
    """Численное преобразование sech_density; должно совпасть с sech_cf."""
    return float(multiplicative_transform(sech_density, lam).real)


def sech_inverse_transform(a):
    """(1/(2 pi)) int sech(pi lambda/2) a^{-2i lambda} d lambda; должно совпасть с sech_density(a)."""
    v = 2 * np.log(a)

    def cf(lam):
        return 1.0 / np.cosh(np.pi * lam / 2)

    if v == 0:
        value, _ = integrate.quad(cf, 0, np.inf, epsabs=QUAD_EPS, epsrel=QUAD_EPS)
    else:
        value, _ = integrate.quad(cf, 0, np.inf, weight='cos', wvar=abs(v), epsabs=QUAD_EPS)
    return float(value / np.pi)


def sech_harish_transform(lam):
    """Целевое преобразование Хариша ранга 1: -i (lambda - i) / cos(i (pi/2)(lambda - i))."""
    lam = np.asarray(lam, dtype=complex)
    return -1j * (lam - 1j) / np.cos(0.5j * np.pi * (lam - 1j))


def _series(terms, x, family):
    n = np.arange(1, int(terms) + 1, dtype=float)
    if family == 'plus':
        t = 2 * n * (2 * n - 1) * x ** (2 * n - 2) * (-1.0) ** (n - 1)
    else:
        t = 2 * n * (2 * n + 1) * x ** (2 * n - 1) * (-1.0) ** n
    return t


def residue_series(a, terms=200):
    """
    Частичные суммы двух семейств вычетов (x = a^{-2}, a > 1):
        plus  = -4i a^{-4} sum 2n(2n-1) x^{2n-2} (-1)^{n-1} = -4i a^{-4} (2 - 6x^2)/(1 + x^2)^3,
        minus = -4i a^{-2} sum 2n(2n+1) x^{2n-1} (-1)^n   = -8i a^{-2} (x^3 - 3x)/(1 + x^2)^3.
    DivergenceAlarm, если оценка хвоста знакочередующегося ряда не мала.
    """
    if a <= 1:
        raise KmlabError('residue series needs a > 1')
    x = a ** -2.0
    out = {}
    for family, prefactor in (('plus', -4j * a ** -4.0), ('minus', -4j * a ** -2.0)):
        t = _series(terms + 1, x, family)
        partial = np.sum(t[:-1])
        tail = abs(t[-1])
        decreasing = abs(t[-1]) <= abs(t[-2])
        if tail > SERIES_TOL * max(1.0, abs(partial)) or not decreasing:
            raise DivergenceAlarm(f'{family} residue series tail {tail:.3e} after {terms} terms at a={a}')
        out[family] = complex(prefactor * partial)
    return out


def residue_closed_forms(a):
    x = a ** -2.0
    return {
        'plus': complex(-4j * a ** -4.0 * (2 - 6 * x ** 2) / (1 + x ** 2) ** 3),
        'minus': complex(-8j * a ** -2.0 * (x ** 3 - 3 * x) / (1 + x ** 2) ** 3),
    }


def residue_phi(a, terms=200):
    """
    (plus - minus) / (2i sinh(2 log a)) = -32/(a^2 + a^{-2})^3;
    возвращается положительное значение 32/(a^2 + a^{-2})^3.
    """
    series = residue_series(a, terms)
    value = (series['plus'] - series['minus']) / (2j * np.sinh(2 * np.log(a)))
    return float(-value.real)


def phi_closed(a, normalized=False):
    """
    (a^2 + a^{-2})^{-3}; normalized=True умножает на 64/pi, что даёт
    единичную массу по весу sinh^2(2u) du, u = log a >= 0.
    """
    value = (a ** 2 + a ** -2.0) ** -3.0
    return value * 64.0 / np.pi if normalized else value


def _check_tail(target_cf):
    values = [abs(complex(target_cf(lam))) * lam ** 3 for lam in TAIL_GRID]
    if not np.all(np.isfinite(values)) or values[-1] >= 1.0 or any(b > a for a, b in zip(values[1:], values[2:])):
        raise TailDivergence(f'target does not decay integrably: lambda^3 |H| = {values}')


def _raw_inverse(target_cf, a):
    u = np.log(a)

    def even(lam):
        return float(np.real(complex(target_cf(lam)) + complex(target_cf(-lam)))) / 2

    if abs(u) < 1e-12:
        value, _ = integrate.quad(lambda lam: even(lam) * lam ** 2, 0, np.inf,
                                  epsabs=QUAD_EPS, epsrel=QUAD_EPS, limit=200)
        return 2 * value
    omega = 2 * abs(u)
    if omega < 1:
        value, _ = integrate.quad(lambda lam: even(lam) * lam * np.sin(omega * lam), 0, np.inf,
                                  epsabs=QUAD_EPS, epsrel=QUAD_EPS, limit=200)
    else:
        value, _ = integrate.quad(lambda lam: even(lam) * lam, 0, np.inf, weight='sin',
                                  wvar=omega, epsabs=QUAD_EPS)
    return 2 * value / np.sinh(2 * abs(u))


def harish_inverse_quadrature(target_cf, a, tol=1e-8, normalize=True):
    """
    Обращение преобразования Хариша ранга 1:
        phi(a) ~ int H(lambda) (a^{2i lambda} - a^{-2i lambda}) / (2i lambda sinh(2 log a)) lambda^2 d lambda.
    Нечётная часть H сокращается, чётная интегрируется осцилляторной квадратурой
    на [0, inf). При a = 1 ядро заменяется пределом lambda^2.
    normalize=True делит на массу по весу sinh^2(2u) du на отрезке [0, MASS_U_MAX].
    """
    if a <= 0:
        raise KmlabError('a must be positive')
    _check_tail(target_cf)
    raw = _raw_inverse(target_cf, a)
    if not normalize:
        return float(raw)
    mass, err = integrate.quad(lambda u: _raw_inverse(target_cf, np.exp(u)) * np.sinh(2 * u) ** 2,
                               0, MASS_U_MAX, epsabs=tol, epsrel=tol, limit=200)
    logger.debug('harish_inverse_quadrature: mass %.12g (err %.1e)', mass, err)
    return float(raw / mass)


def affine_c_product(spec, lam, dual_coxeter, cutoff, s=0.0, k=0, weight=None):
    """
    Двойное произведение аффинной c-функции до уровня cutoff:
        c(rho + 2s Lambda - i lambda)
        * prod_{n <= cutoff} prod_{alpha} (1 - i(<lambda + 2is Lambda, alpha> + 2iskn)/D)^{-1}
                                         / (1 - i(2iskn)/D)^{-1},
    alpha пробегает все корни, D = <rho, alpha> + 2 g n (rho - сумма положительных
    корней, как в cfunc). Для sl2 с lambda = (l, -l) это sech(pi l/2).
    """
    roots = spec.positive_roots
    rho = spec.rho
    vec = cfunc.as_spectral(lam).dense(spec.dim).astype(complex)
    Lambda = np.zeros(spec.dim) if weight is None else np.asarray(weight, dtype=float)
    mu = vec + 2j * s * Lambda

    log_c = np.log(cfunc.harish_c_rational(roots, rho, rho - 1j * mu))
    all_roots = np.concatenate([roots, -roots])
    n = np.arange(1, int(cutoff) + 1, dtype=float)
    denom = (all_roots @ rho)[:, None] + 2.0 * dual_coxeter * n[None, :]
    hit = np.abs(denom) <= cfunc.POLE_TOL
    if np.any(hit):
        raise PoleHit(int(np.argmax(hit.any(axis=1))))
    level = 2j * s * k * n[None, :]
    num = 1 - 1j * ((all_roots @ mu)[:, None] + level) / denom
    den = 1 - 1j * level / denom
    if np.any(np.abs(num) <= cfunc.POLE_TOL):
        raise PoleHit(int(np.argmax(np.any(np.abs(num) <= cfunc.POLE_TOL, axis=1))))
    log_c += np.sum(np.log(den) - np.log(num))
    return complex(np.exp(log_c))


def affine_c_product_probe(spec, lam, dual_coxeter, s=0.0, k=0, cutoff=10 ** 4, weight=None):
    """
    Численный зонд гипотетического аффинного произведения: сырое значение,
    экстраполяция Ричардсона по 1/cutoff и разрыв при удвоении cutoff.
    Результат всегда помечен как гипотетический.
    """
    def at(c):
        return affine_c_product(spec, lam, dual_coxeter, c, s=s, k=k, weight=weight)

    value = cfunc.richardson_limit(at, cutoff)
    doubled = cfunc.richardson_limit(at, 2 * cutoff)
    return {
        'value': value,
        'raw': at(cutoff),
        'doubling_gap': abs(doubled - value),
        'cutoff': cutoff,
        'conjectural': True,
    }
