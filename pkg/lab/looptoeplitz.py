"""
Петли как данные Фурье: блочные тёплицевы и ганкелевы усечения,
след Гильберта - Шмидта, регуляризованный определитель det2 и веса nu_{beta,k},
абелева формула Сегё и статсумма, ядро I_n(delta), гауссов сдвиг и тепловое
ядро SU(2), усечённое разложение Биркгофа и зонд закона g0.

Коэффициенты петли g(theta) = sum_k ghat(k) e^{ik theta} хранятся массивом
формы (2K + 1, N, N), индекс k + K.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from lab import cfunc
from lab.diagdist import compare, weighted_mean
from lab.ensembles import abelian_loop_sample, abelian_loop_values, su2_loop_sample
from lab.exceptions import ClampViolation, KmlabError, OffStratum, SingularBlock
from lab.linalg_core import block_ldu
from lab.parallel import map_chunks

logger = logging.getLogger(__name__)

CLAMP_TOL = 1e-10
CLAMP_ALARM = 1e-6
UNITARY_GRID = 512
UNITARY_TOL = 1e-6
HEAT_TERM_TOL = 1e-14


@dataclass(frozen=True)
class LoopFourier:
    """Петля со значениями в N x N матрицах, заданная коэффициентами -K..K."""
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == 1:
            c = c[:, None, None]
        if c.ndim != 3 or c.shape[0] % 2 == 0 or c.shape[1] != c.shape[2]:
            raise KmlabError(f'loop coefficients must have shape (2K+1, N, N), got {c.shape}')
        object.__setattr__(self, 'coeffs', c)

    @property
    def K(self):
        return self.coeffs.shape[0] // 2

    @property
    def N(self):
        return self.coeffs.shape[1]

    def coeff(self, k):
        if abs(k) > self.K:
            return np.zeros((self.N, self.N), dtype=complex)
        return self.coeffs[k + self.K]

    def blocks(self, index):
        """Коэффициенты для массива индексов index (нули вне -K..K): форма index.shape + (N, N)."""
        index = np.asarray(index)
        inside = np.abs(index) <= self.K
        out = self.coeffs[np.clip(index + self.K, 0, 2 * self.K)]
        return np.where(inside[..., None, None], out, 0.0)

    def evaluate(self, theta):
        """g(theta) на сетке: форма (len(theta), N, N)."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        k = np.arange(-self.K, self.K + 1)
        phases = np.exp(1j * np.outer(theta, k))
        return np.einsum('tk,kij->tij', phases, self.coeffs)

    def is_unitary(self, grid=UNITARY_GRID, tol=UNITARY_TOL):
        values = self.evaluate(2 * np.pi * np.arange(grid) / grid)
        gram = np.swapaxes(values.conj(), -1, -2) @ values
        return bool(np.max(np.abs(gram - np.eye(self.N))) < tol)

    def energy_terms(self, M, positive=True):
        """|ghat(n)|^2_HS для n = 1..M (или для -n при positive=False)."""
        sign = 1 if positive else -1
        blocks = self.blocks(sign * np.arange(1, M + 1))
        return np.sum(np.abs(blocks) ** 2, axis=(-2, -1))

    @classmethod
    def from_samples(cls, values, K=None):
        """
        Коэффициенты по значениям на равномерной сетке theta_j = 2 pi j/L (БПФ).
        K по умолчанию L/2 - 1.
        """
        values = np.asarray(values, dtype=complex)
        if values.ndim == 1:
            values = values[:, None, None]
        L = values.shape[0]
        K = (L - 1) // 2 if K is None else K
        if 2 * K + 1 > L:
            raise KmlabError(f'cutoff K={K} needs at least {2 * K + 1} samples')
        spectrum = np.fft.fft(values, axis=0) / L
        index = np.arange(-K, K + 1) % L
        return cls(coeffs=spectrum[index])

    @classmethod
    def trig_polynomial(cls, coeffs):
        """Из словаря {k: блок}."""
        K = max(abs(k) for k in coeffs)
        first = np.atleast_2d(np.asarray(next(iter(coeffs.values())), dtype=complex))
        out = np.zeros((2 * K + 1,) + first.shape, dtype=complex)
        for k, block in coeffs.items():
            out[k + K] = np.atleast_2d(block)
        return cls(coeffs=out)


def abelian_loop(x, grid=1024):
    """g = exp(i x) для вещественной петли x с коэффициентами x_1..x_K (через БПФ)."""
    theta = 2 * np.pi * np.arange(grid) / grid
    return LoopFourier.from_samples(np.exp(1j * abelian_loop_values(x, theta)))


def multiply(g, h):
    """Поточечное произведение петель: свёртка коэффициентов."""
    K = g.K + h.K
    out = np.zeros((2 * K + 1, g.N, g.N), dtype=complex)
    for i in range(-g.K, g.K + 1):
        for j in range(-h.K, h.K + 1):
            out[i + j + K] += g.coeff(i) @ h.coeff(j)
    return LoopFourier(coeffs=out)


def _assemble(blocks):
    """(M, M, N, N) -> (MN, MN)."""
    M, _, N, _ = blocks.shape
    return blocks.transpose(0, 2, 1, 3).reshape(M * N, M * N)


@dataclass(frozen=True)
class ToeplitzTruncation:
    M: int
    matrix: np.ndarray


def toeplitz_truncate(loop, M):
    """A_M: блок (i, j) равен ghat(i - j), 0 <= i, j < M."""
    if M < 1:
        raise KmlabError('truncation order must be positive')
    i = np.arange(M)
    return ToeplitzTruncation(M=M, matrix=_assemble(loop.blocks(i[:, None] - i[None, :])))


def hankel_block(loop, M):
    """C_M: блок (p, q) равен ghat(-1 - p - q) (отрицательные частоты)."""
    if M < 1:
        raise KmlabError('truncation order must be positive')
    i = np.arange(M)
    return _assemble(loop.blocks(-1 - i[:, None] - i[None, :]))


def hankel_trace_identity_check(loop, M):
    """
    tr C_M* C_M против sum_{n>0} n |ghat(-n)|^2 (точно для тригонометрических
    многочленов при M >= K); зеркальная сумма sum n |ghat(n)|^2 для справки.
    """
    c = hankel_block(loop, M)
    trace = float(np.real(np.sum(np.abs(c) ** 2)))
    n = np.arange(1, loop.K + 1)
    negative = float(np.sum(n * loop.energy_terms(loop.K, positive=False)))
    mirrored = float(np.sum(n * loop.energy_terms(loop.K, positive=True)))
    return {
        'trace': trace,
        'negative_sum': negative,
        'mirrored_sum': mirrored,
        'gap': abs(trace - negative),
        'exact': M >= loop.K,
    }


def _cc_eigenvalues(loop, M):
    c = hankel_block(loop, M)
    mu = np.linalg.eigvalsh(c.conj().T @ c)
    if np.any(mu > 1.0 + CLAMP_ALARM):
        raise ClampViolation(float(mu.max()))
    return np.clip(mu, 0.0, 1.0)


def compressed_abs_det(loop, M):
    """det(1 - C_M* C_M) = det(A* A) на сжатии (для унитарных петель)."""
    mu = _cc_eigenvalues(loop, M)
    return float(np.prod(1.0 - mu))


def log_det2(loop, M):
    """log det((1 - C*C) e^{C*C}) по собственным числам, зажатым в [0, 1]."""
    mu = _cc_eigenvalues(loop, M)
    with np.errstate(divide='ignore'):
        return float(np.sum(np.log1p(-mu) + mu))


def det2_weight(loop, M, s):
    """det((1 - |C_M|^2) e^{|C_M|^2})^s, значение в [0, 1]."""
    if s < 0:
        raise KmlabError('det2 weight needs s >= 0')
    if s == 0:
        return 1.0
    return float(np.exp(s * log_det2(loop, M)))


def abelian_centering(beta, M):
    """E|x_n|^2 = 1/(beta n^2), n = 1..M."""
    n = np.arange(1, M + 1)
    return 1.0 / (beta * n ** 2)


def regularized_energy(loop, centering, M):
    """sum_{n=1}^{M} n (|ghat(n)|^2_HS - centering_n)."""
    centering = np.asarray(centering, dtype=float)
    if len(centering) < M:
        raise KmlabError(f'centering has {len(centering)} terms, need {M}')
    n = np.arange(1, M + 1)
    return float(np.sum(n * (loop.energy_terms(M) - centering[:M])))


def nu_beta_k_logweight(loop, beta, k, m=1, centering=None, M=None):
    """
    log плотности nu_{beta,k} относительно винеровой меры (без константы 1/E):
    -s * regularized_energy + s * log det2, s = k/m. Без centering используется
    абелево центрирование 1/(beta n^2).
    """
    s = k / m
    if s < 0:
        raise KmlabError('need s = k/m >= 0')
    if s == 0:
        return 0.0
    M = M or 4 * loop.K
    if centering is None:
        centering = abelian_centering(beta, M)
    return -s * regularized_energy(loop, centering, M) + s * log_det2(loop, M)


def szego_check(x, k, M, grid=1024):
    """
    det(1 - C_M* C_M)^k против exp(-k sum n |x_n|^2) для g = exp(ix);
    конечное сечение |det A_M|^k выдаётся как диагностика.
    """
    x = np.asarray(x, dtype=complex)
    loop = abelian_loop(x, grid=grid)
    n = np.arange(1, len(x) + 1)
    reference = float(np.exp(-k * np.sum(n * np.abs(x) ** 2)))
    estimate = compressed_abs_det(loop, M) ** k
    _, logabs = np.linalg.slogdet(toeplitz_truncate(loop, M).matrix)
    finite_section = float(np.exp(k * logabs))
    return {
        'M': M,
        'estimate': estimate,
        'reference': reference,
        'gap': abs(estimate - reference),
        'finite_section': finite_section,
        'finite_section_gap': abs(finite_section - reference),
    }


def szego_ladder(x, k, ladder=(32, 64, 128, 256, 512), grid=1024):
    """Разрывы формулы Сегё на лестнице M; monotone допускает шум 1e-12."""
    rows = [szego_check(x, k, M, grid=grid) for M in ladder]
    gaps = [row['gap'] for row in rows]
    monotone = all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))
    return rows, monotone


def partition_constant_mc(beta, k, K, draws, key, chunk_size=None, threads=None):
    """
    E[exp(-k sum_{n<=K} n (|x_n|^2 - E|x_n|^2))] по nu_beta против усечённого
    произведения prod_{n<=K} (1 + k/(beta n))^{-1} e^{k/(beta n)}.
    """
    n = np.arange(1, K + 1)
    mean = 1.0 / (beta * n ** 2)

    def chunk(index, size):
        x = abelian_loop_sample(beta, K, key, index=index, size=size)
        return np.exp(-k * np.sum(n * (np.abs(x) ** 2 - mean), axis=-1))

    values = np.concatenate(map_chunks(chunk, draws, chunk_size=chunk_size, threads=threads))
    reference = cfunc.partition_Z_product(beta, k, K, tail_correction=False)
    return compare(weighted_mean(values), reference, params={'beta': beta, 'k': k, 'K': K})


def In_kernel(n, delta):
    """(2 pi n)^{-1} int_delta^{2pi - delta} |e^{in theta} - 1|^2/|e^{i theta} - 1|^2 d theta."""
    if not 0 < delta < np.pi:
        raise KmlabError('delta must lie in (0, pi)')

    def fejer(theta):
        return (np.sin(n * theta / 2) / np.sin(theta / 2)) ** 2

    value, _ = integrate.quad(fejer, delta, np.pi, limit=max(100, 8 * n), epsabs=1e-13, epsrel=1e-12)
    return 2.0 * value / (2 * np.pi * n)


def In_closed_form(n, delta):
    """1 - delta/pi - (2/(pi n)) sum_{k<n} (n - k) sin(k delta)/k."""
    k = np.arange(1, n)
    return float(1 - delta / np.pi - 2.0 / (np.pi * n) * np.sum((n - k) * np.sin(k * delta) / k))


def In_difference(n, delta, printed=False):
    """
    I_n - I_{n+1} = (1/(pi n (n+1))) (cos(delta/2) - cos(delta/2 + n delta))/sin(delta/2).
    printed=True даёт коэффициент 2/(n(n+1)) (для отчётов).
    """
    factor = 2.0 / (n * (n + 1)) if printed else 1.0 / (np.pi * n * (n + 1))
    return float(factor * (np.cos(delta / 2) - np.cos(delta / 2 + n * delta)) / np.sin(delta / 2))


def In_telescoping_sum(delta, n_max=200):
    """sum_{n <= n_max} |I_n - I_{n+1}|."""
    return float(sum(abs(In_difference(n, delta)) for n in range(1, n_max + 1)))


def normal_abs_moment(p):
    """E|t|^p для стандартной нормальной t."""
    return float(2 ** (p / 2) * special.gamma((p + 1) / 2) / np.sqrt(np.pi))


def printed_shift_constant(p):
    return float(2 * special.gamma((p + 1) / 2))


def gaussian_shift_lp(s, p):
    """
    int |1 - exp(-s^2/2 + st)|^p phi(t) dt по стандартной нормальной плотности;
    отрезок делится в нуле подынтегрального выражения t = s/2.
    """
    if p < 1:
        raise KmlabError('p must be at least 1')
    if s == 0:
        return 0.0

    def f(t):
        return np.abs(-np.expm1(-s * s / 2 + s * t)) ** p * np.exp(-t * t / 2) / np.sqrt(2 * np.pi)

    left, _ = integrate.quad(f, -np.inf, s / 2, epsabs=0.0, epsrel=1e-12, limit=200)
    right, _ = integrate.quad(f, s / 2, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    return left + right


def gaussian_shift_closed(s, p):
    """Чётное p: sum_k C(p, k) (-1)^k exp(k(k-1) s^2/2); p = 2 даёт e^{s^2} - 1."""
    if p % 2:
        raise KmlabError('closed form needs an even integer p')
    k = np.arange(p + 1)
    return float(np.sum(special.comb(p, k) * (-1.0) ** k * np.exp(k * (k - 1) * s * s / 2)))


def gaussian_shift_sup(p, grid=None):
    """Наибольшее отношение value/s^p на логарифмической сетке [1e-3, 10]."""
    grid = np.logspace(-3, 1, 41) if grid is None else grid
    ratios = [gaussian_shift_lp(s, p) / s ** p for s in grid]
    return float(np.max(ratios)), float(grid[int(np.argmax(ratios))])


def heat_kernel_su2(t, theta):
    """
    Тепловое ядро SU(2) относительно меры Хаара:
    sum_{n>=1} n exp(-(n^2 - 1) t/4) U_{n-1}(cos theta),
    U_{n-1}(cos theta) = sin(n theta)/sin(theta) (конечно при theta -> 0, pi).
    """
    if t <= 0:
        raise KmlabError('heat kernel needs t > 0')
    x = np.cos(np.asarray(theta, dtype=float))
    total = np.zeros_like(x)
    n = 1
    while True:
        weight = n * np.exp(-(n * n - 1) * t / 4)
        if n * weight < HEAT_TERM_TOL:
            break
        total = total + weight * special.eval_chebyu(n - 1, x)
        n += 1
    return total if total.ndim else float(total)


def haar_class_integral(func):
    """int f dm для центральной функции: (2/pi) int_0^pi f(theta) sin^2 theta d theta."""
    value, _ = integrate.quad(lambda th: func(th) * np.sin(th) ** 2, 0, np.pi, epsabs=1e-12, epsrel=1e-12)
    return 2.0 * value / np.pi


def heat_convolution(s, t, theta_g):
    """
    (p_s * p_t)(g) = (1/pi) int_0^pi int_{-1}^{1} p_s(theta') p_t(theta_h) sin^2 theta_h du d theta_h,
    cos theta' = cos theta_g cos theta_h + sin theta_g sin theta_h u.
    """
    cg, sg = np.cos(theta_g), np.sin(theta_g)

    def integrand(u, th):
        cos_prime = np.clip(cg * np.cos(th) + sg * np.sin(th) * u, -1.0, 1.0)
        return heat_kernel_su2(s, np.arccos(cos_prime)) * heat_kernel_su2(t, th) * np.sin(th) ** 2

    value, _ = integrate.dblquad(integrand, 0, np.pi, -1, 1, epsabs=1e-9, epsrel=1e-9)
    return value / np.pi


def heat_kernel_bound(p, beta, energy, theta):
    """
    Правая часть оценки для условленной винеровой меры:
    2 Gamma((p+1)/2) p_{T/2}(k) p_{T/2}(1)/p_T(k) (2 beta E)^{p/2}, T = 1/beta.
    """
    T = 1.0 / beta
    ratio = heat_kernel_su2(T / 2, theta) * heat_kernel_su2(T / 2, 0.0) / heat_kernel_su2(T, theta)
    return float(printed_shift_constant(p) * ratio * (2 * beta * energy) ** (p / 2))


@dataclass(frozen=True)
class BirkhoffFactors:
    """g = g_- g_0 g_+: minus[j] = ghat_-(-j), plus[j] = ghat_+(j), minus[0] = plus[0] = I."""
    minus: np.ndarray
    g0: np.ndarray
    plus: np.ndarray

    def evaluate(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        j = np.arange(self.minus.shape[0])
        g_minus = np.einsum('tj,jab->tab', np.exp(-1j * np.outer(theta, j)), self.minus)
        g_plus = np.einsum('tj,jab->tab', np.exp(1j * np.outer(theta, j)), self.plus)
        return g_minus @ self.g0 @ g_plus


def _reverse_blocks(m, M, N):
    order = (np.arange(M)[::-1][:, None] * N + np.arange(N)[None, :]).ravel()
    return m[np.ix_(order, order)]


def birkhoff_factor(loop, M):
    """
    Усечённое разложение Биркгофа через блочное UL-разложение A_M
    (блочное LDU матрицы с обращённым порядком блоков). Строка 0 верхнего
    множителя даёт ghat_-, столбец 0 нижнего даёт ghat(g_0 g_+).
    """
    N = loop.N
    a = toeplitz_truncate(loop, M).matrix
    try:
        factors = block_ldu(_reverse_blocks(a, M, N), N)
    except SingularBlock as exc:
        raise OffStratum() from exc
    upper = _reverse_blocks(factors.l, M, N)
    lower = _reverse_blocks(factors.d_matrix() @ factors.u, M, N)
    minus = upper[:N, :].reshape(N, M, N).transpose(1, 0, 2)
    h = lower[:, :N].reshape(M, N, N)
    g0 = h[0].copy()
    plus = np.linalg.solve(g0[None], h)
    return BirkhoffFactors(minus=minus, g0=g0, plus=plus)


def birkhoff_residual(loop, M, grid=256):
    """max_theta ||g(theta) - g_-(theta) g_0 g_+(theta)||."""
    theta = 2 * np.pi * np.arange(grid) / grid
    factors = birkhoff_factor(loop, M)
    return float(np.max(np.linalg.norm(loop.evaluate(theta) - factors.evaluate(theta), axis=(-2, -1))))


def toeplitz_product_defect_rank(g, h, M, tol=1e-9):
    """Ранг A_M(gh) - A_M(g) A_M(h): не больше 2 N K для тригонометрических многочленов."""
    product = toeplitz_truncate(g, M).matrix @ toeplitz_truncate(h, M).matrix
    defect = toeplitz_truncate(multiply(g, h), M).matrix - product
    sv = np.linalg.svd(defect, compute_uv=False)
    if not sv.size or sv[0] == 0:
        return 0
    return int(np.sum(sv > tol * max(1.0, sv[0])))


def su2_loop(beta, key, index=0, steps=1024):
    """Дискретизированная петля SU(2) как LoopFourier."""
    return LoopFourier.from_samples(su2_loop_sample(beta, steps, key, index=index))


def centering_prepass(sampler, draws, M):
    """Оценка E|ghat(n)|^2_HS, n = 1..M, предварительным прогоном sampler(index)."""
    total = np.zeros(M)
    for index in range(draws):
        total += sampler(index).energy_terms(M)
    return total / draws


def g0_target_density(T):
    """Плотность tr(g0* g0) = T для меры (tr g0* g0)^{-3} dm(g0): ~ T^{-3} sqrt(T^2 - 4), T >= 2."""
    T = np.asarray(T, dtype=float)
    return np.where(T > 2, T ** -3.0 * np.sqrt(np.clip(T * T - 4, 0, None)), 0.0) / _g0_normalization()


def _g0_normalization():
    value, _ = integrate.quad(lambda T: T ** -3.0 * np.sqrt(T * T - 4), 2, np.inf)
    return value


def g0_law_probe(beta, k, draws, M, key, loop_sampler=None, m=1, bins=None, centering_draws=64,
                 steps=1024):
    """
    Взвешенная гистограмма tr(g0* g0) под весами nu_{beta,k} и массы бинов
    для плотности, индуцированной (tr g0* g0)^{-3} dm(g0). Только данные.
    """
    if loop_sampler is None:
        def loop_sampler(k_, index):
            return su2_loop(beta, k_, index=index, steps=steps)

    bins = np.linspace(2.0, 6.0, 21) if bins is None else np.asarray(bins)
    prepass_key = key.child('centering')
    centering = centering_prepass(lambda index: loop_sampler(prepass_key, index), centering_draws, M)

    traces, log_w = [], []
    rejected = 0
    for index in range(draws):
        loop = loop_sampler(key, index)
        try:
            g0 = birkhoff_factor(loop, M).g0
            log_w.append(nu_beta_k_logweight(loop, beta, k, m=m, centering=centering, M=M))
        except (OffStratum, ClampViolation):
            rejected += 1
            continue
        traces.append(float(np.real(np.trace(g0.conj().T @ g0))))
    traces = np.asarray(traces)
    log_w = np.asarray(log_w)
    w = np.exp(log_w - log_w.max()) if len(log_w) else np.zeros(0)
    mass, _ = np.histogram(np.clip(traces, bins[0], bins[-1]), bins=bins, weights=w)
    mass = mass / mass.sum() if mass.sum() > 0 else mass
    target = np.array([integrate.quad(g0_target_density, lo, hi)[0] for lo, hi in zip(bins[:-1], bins[1:])])
    target[-1] += integrate.quad(g0_target_density, bins[-1], np.inf)[0]
    return {
        'beta': beta,
        'k': k,
        'edges': bins.tolist(),
        'mass': mass.tolist(),
        'target': target.tolist(),
        'median': float(np.median(traces)) if len(traces) else None,
        'rejected': rejected,
    }


def total_variation(p, q):
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))
