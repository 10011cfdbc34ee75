"""
Наборы для петель: формула Сегё и det2, статсумма абелевой винеровой меры,
ядро I_n и тепловое ядро SU(2), лемма о гауссовом сдвиге, разложение
Биркгофа и зонд закона g0.
"""
import numpy as np

from lab import cfunc
from lab.diagdist import compare, weighted_mean
from lab.ensembles import abelian_loop_sample, haar_special_unitary
from lab.looptoeplitz import (LoopFourier, abelian_loop, birkhoff_factor, birkhoff_residual, compressed_abs_det,
                              det2_weight, g0_law_probe, gaussian_shift_closed, gaussian_shift_lp,
                              gaussian_shift_sup, hankel_block, hankel_trace_identity_check, haar_class_integral,
                              heat_convolution, heat_kernel_bound, heat_kernel_su2, In_closed_form,
                              In_difference, In_kernel, In_telescoping_sum, log_det2, multiply,
                              normal_abs_moment, partition_constant_mc, printed_shift_constant, su2_loop,
                              szego_ladder, toeplitz_product_defect_rank, total_variation)
from lab.parallel import map_chunks
from lab.suites import register

TELESCOPING_BOUND = 3.0


def random_trig_polynomial(rng, K, N, scale=0.5):
    """Случайный матричный тригонометрический многочлен с коэффициентами -K..K."""
    shape = (2 * K + 1, N, N)
    return LoopFourier(coeffs=scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)))


def su2_trig_loop(key, windings=2):
    """Унитарный многочлен U_0 diag(z, 1/z) U_1 ... diag(z, 1/z) U_windings со значениями в SU(2)."""
    blocks = haar_special_unitary(2, key, size=windings + 1)
    loop = LoopFourier(coeffs=blocks[0][None])
    twist = LoopFourier.trig_polynomial({-1: np.diag([0.0, 1.0]), 0: np.zeros((2, 2)), 1: np.diag([1.0, 0.0])})
    for u in blocks[1:]:
        loop = multiply(multiply(loop, twist), LoopFourier(coeffs=u[None]))
    return loop


@register('szego', defaults={'modes': [[0.3], [0.3, 0.2, 0.1]], 'k': 1.0, 'M': 256,
                             'ladder': [32, 64, 128, 256, 512], 'tol': 1e-4, 'det2_tol': 1e-6,
                             'hankel_cases': [[1, 1], [2, 1], [4, 2], [3, 2]], 'hankel_tol': 1e-10})
def szego(ctx):
    """Сегё для e^{ix}, расщепление через det2, тождество следа для ганкелева блока."""
    p = ctx.params
    k = p['k']
    for i, x in enumerate(p['modes']):
        rows, monotone = szego_ladder(x, k, ladder=p['ladder'])
        at_m = next(row for row in rows if row['M'] == p['M'])
        ctx.gap(f'modes-{i}', at_m['estimate'], at_m['reference'], p['tol'],
                params={'x': x, 'k': k, 'M': p['M']},
                note=f'finite section gap {at_m["finite_section_gap"]:.3e}')
        ctx.flag(f'modes-{i}-monotone', monotone, params={'x': x, 'ladder': p['ladder']},
                 score=max(row['gap'] for row in rows))

        loop = abelian_loop(np.asarray(x, dtype=complex))
        c = hankel_block(loop, p['M'])
        split = np.exp(-np.sum(np.abs(c) ** 2) + log_det2(loop, p['M']))
        n = np.arange(1, len(x) + 1)
        ctx.gap(f'modes-{i}-det2-split', split, np.exp(-np.sum(n * np.abs(x) ** 2)), p['det2_tol'],
                params={'x': x, 'M': p['M']})
        ctx.gap(f'modes-{i}-compressed', compressed_abs_det(loop, p['M']), split, 1e-12,
                params={'x': x, 'M': p['M']})

    rng = ctx.key('hankel').generator(0)
    for K, N in p['hankel_cases']:
        loop = random_trig_polynomial(rng, K, N)
        for M in (K, 2 * K):
            result = hankel_trace_identity_check(loop, M)
            ctx.gap(f'hankel-K{K}-N{N}-M{M}', result['trace'], result['negative_sum'], p['hankel_tol'],
                    params={'K': K, 'N': N, 'M': M},
                    note=f'mirrored sum {result["mirrored_sum"]:.12g}')


@register('partition', defaults={'pairs': [[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]], 'cutoff': 10 ** 6,
                                 'tol': 1e-8, 'short_cutoff': 10 ** 4, 'short_tol': 1e-3,
                                 'K': 64, 'draws': 10 ** 5, 'variance_modes': [1, 2]})
def partition(ctx):
    """Статсумма Gamma(1 + k/beta) e^{gamma k/beta}: произведения, Монте-Карло, сдвиг дисперсий."""
    p = ctx.params
    for beta, k in p['pairs']:
        label = f'b{beta:g}-k{k:g}'
        params = {'beta': beta, 'k': k}
        exact = cfunc.partition_Z(beta, k)
        printed = f'printed Gamma(1+y)e^(-gamma y) = {cfunc.partition_Z_printed(beta, k):.12g}'
        corrected = cfunc.partition_Z_product(beta, k, p['cutoff'])
        raw = cfunc.partition_Z_product(beta, k, p['cutoff'], tail_correction=False)
        ctx.gap(f'product-{label}', corrected, exact, p['tol'], params=dict(params, cutoff=p['cutoff']),
                note=f'raw truncation gap {abs(raw - exact):.3e}; {printed}')
        ctx.gap(f'raw-{label}', cfunc.partition_Z_product(beta, k, p['short_cutoff'], tail_correction=False),
                exact, p['short_tol'], params=dict(params, cutoff=p['short_cutoff']))
        ctx.verdict(f'mc-{label}', partition_constant_mc(beta, k, p['K'], p['draws'], ctx.key(f'mc-{label}'),
                                                         **ctx.parallel))

    beta, k = p['pairs'][0]
    key = ctx.key('variance')
    K = max(p['variance_modes'])
    n = np.arange(1, K + 1)

    def chunk(index, size):
        return abelian_loop_sample(beta, K, key, index=index, size=size)

    x = np.concatenate(map_chunks(chunk, p['draws'], **ctx.parallel))
    log_w = -k * np.sum(n * np.abs(x) ** 2, axis=-1)
    for mode in p['variance_modes']:
        estimate = weighted_mean(np.abs(x[:, mode - 1]) ** 2, log_w=log_w)
        reference = 1.0 / (beta * mode ** 2 + k * mode)
        ctx.verdict(f'variance-shift-n{mode}',
                    compare(estimate, reference, params={'beta': beta, 'k': k, 'n': mode}))


@register('kernels', defaults={'deltas': [1e-3, 0.1, 1.0, 2.0], 'near_delta': 1e-3, 'near_max': 15,
                               'near_report': 50, 'near_tol': 5e-3, 'difference_n': [1, 3, 7],
                               'difference_deltas': [0.2, 1.0], 'heat_t': [0.1, 0.5, 2.0],
                               'semigroup': [[0.5, 0.5]], 'semigroup_theta': [0.3, 1.2, 2.5]})
def kernels(ctx):
    """Ядро I_n(delta) и тепловое ядро SU(2): нормировка и полугрупповое свойство."""
    p = ctx.params
    for delta in p['deltas']:
        ctx.gap(f'I1-d{delta:g}', In_kernel(1, delta), 1 - delta / np.pi, 1e-10, params={'delta': delta})
    for n in (2, 5, 10):
        for delta in (0.1, 1.0):
            ctx.gap(f'closed-n{n}-d{delta:g}', In_kernel(n, delta), In_closed_form(n, delta), 1e-10,
                    params={'n': n, 'delta': delta})

    delta = p['near_delta']
    for n in range(1, p['near_report'] + 1):
        value = In_kernel(n, delta)
        params = {'n': n, 'delta': delta, 'bound': n * delta / np.pi}
        if n <= p['near_max']:
            ctx.gap(f'near-one-n{n}', value, 1.0, p['near_tol'], params=params)
        else:
            ctx.explore(f'near-one-n{n}', estimate=value, reference=1.0, params=params)

    for n in p['difference_n']:
        for delta in p['difference_deltas']:
            ctx.gap(f'difference-n{n}-d{delta:g}', In_kernel(n, delta) - In_kernel(n + 1, delta),
                    In_difference(n, delta), 1e-9, params={'n': n, 'delta': delta},
                    note=f'printed coefficient gives {In_difference(n, delta, printed=True):.12g}')

    sums = [In_telescoping_sum(d) for d in np.linspace(0.01, np.pi / 2, 12)]
    ctx.flag('telescoping-uniform', max(sums) <= TELESCOPING_BOUND, params={'n_max': 200, 'bound': TELESCOPING_BOUND},
             estimate=max(sums), score=max(sums) - min(sums))

    for t in p['heat_t']:
        ctx.gap(f'heat-mass-t{t:g}', haar_class_integral(lambda th, t=t: heat_kernel_su2(t, th)), 1.0, 1e-8,
                params={'t': t})
    for s, t in p['semigroup']:
        for theta in p['semigroup_theta']:
            ctx.gap(f'heat-semigroup-s{s:g}-t{t:g}-th{theta:g}', heat_convolution(s, t, theta),
                    heat_kernel_su2(s + t, theta), 1e-6, params={'s': s, 't': t, 'theta': theta})


@register('gaussian-shift', defaults={'p': [1.0, 2.0, 4.0], 's_small': 1e-3, 'tol': 1e-4,
                                      'closed_s': [0.25, 0.5, 1.0], 'bound_beta': [1.0, 4.0]})
def gaussian_shift(ctx):
    """E|1 - exp(st - s^2/2)|^p: предел при s -> 0, чётные замкнутые формы, супремум отношения."""
    p = ctx.params
    s = p['s_small']
    for power in p['p']:
        ratio = gaussian_shift_lp(s, power) / s ** power
        ctx.gap(f'small-s-p{power:g}', ratio, normal_abs_moment(power), p['tol'], params={'s': s, 'p': power})
        sup, argmax = gaussian_shift_sup(power)
        ctx.explore(f'sup-p{power:g}', estimate=sup, reference=printed_shift_constant(power),
                    params={'p': power, 'argmax': argmax, 'grid': [1e-3, 10.0]},
                    note='reference is the printed constant 2 Gamma((p+1)/2)')
        if power == int(power) and int(power) % 2 == 0:
            for value in p['closed_s']:
                closed = gaussian_shift_closed(value, int(power))
                ctx.gap(f'closed-p{power:g}-s{value:g}', gaussian_shift_lp(value, power) / closed, 1.0, 1e-8,
                        params={'p': power, 's': value})

    for beta in p['bound_beta']:
        ctx.explore(f'heat-bound-b{beta:g}', estimate=heat_kernel_bound(2.0, beta, 0.5, 1.0),
                    params={'p': 2.0, 'beta': beta, 'energy': 0.5, 'theta': 1.0})


@register('birkhoff-probe', defaults={'M': 64, 'ladder': [4, 8, 16, 32], 'split': [0.5, 0.3], 'defect_M': 16,
                                      'betas': [1.0, 2.0, 4.0, 8.0], 'k': 1.0, 'probe_draws': 200,
                                      'probe_M': 16, 'steps': 1024})
def birkhoff_probe(ctx):
    """Разложение Биркгофа усечённого тёплицева оператора, det2 и зонд закона g0."""
    p = ctx.params
    rng = ctx.key('analytic').generator(0)

    coeffs = {0: np.eye(2) + 0.2 * rng.standard_normal((2, 2)), 1: 0.3 * rng.standard_normal((2, 2)),
              2: 0.1 * rng.standard_normal((2, 2))}
    analytic = LoopFourier.trig_polynomial(coeffs)
    factors = birkhoff_factor(analytic, 4 * analytic.K)
    ctx.gap('analytic-minus', np.max(np.abs(factors.minus[1:])), 0.0, 1e-8, params={'K': analytic.K})

    c, d = p['split']
    theta = 2 * np.pi * np.arange(256) / 256
    scalar = LoopFourier.from_samples(np.exp(c * np.exp(-1j * theta) + d * np.exp(1j * theta)), K=40)
    factors = birkhoff_factor(scalar, p['M'])
    j = np.arange(p['M'])
    factorial = np.cumprod(np.concatenate([[1.0], j[1:]]))
    ctx.gap('abelian-minus', np.max(np.abs(factors.minus[:, 0, 0] - c ** j / factorial)), 0.0, 1e-6,
            params={'c': c, 'M': p['M']})
    ctx.gap('abelian-plus', np.max(np.abs(factors.plus[:, 0, 0] - d ** j / factorial)), 0.0, 1e-6,
            params={'d': d, 'M': p['M']})
    ctx.gap('abelian-g0', factors.g0[0, 0], 1.0, 1e-6, params={'c': c, 'd': d})

    loop = su2_trig_loop(ctx.key('su2-trig'))
    residuals = [birkhoff_residual(loop, M) for M in p['ladder']]
    ctx.flag('su2-residual-decay', all(b <= a + 1e-10 for a, b in zip(residuals, residuals[1:])),
             params={'ladder': p['ladder'], 'residuals': residuals}, estimate=residuals[-1])
    ctx.flag('su2-unitary', loop.is_unitary(), params={'K': loop.K})
    weight = det2_weight(loop, p['defect_M'], 1.0)
    ctx.flag('det2-range', 0.0 <= weight <= 1.0, params={'M': p['defect_M']}, estimate=weight)
    twist = LoopFourier.trig_polynomial({0: np.zeros((2, 2)), 1: np.diag([1.0, 0.0]), 2: np.diag([0.0, 1.0])})
    ctx.gap('det2-analytic', det2_weight(twist, p['defect_M'], 1.0), 1.0, 1e-12, params={'M': p['defect_M']})

    g = random_trig_polynomial(rng, 2, 2)
    h = random_trig_polynomial(rng, 2, 2)
    rank = toeplitz_product_defect_rank(g, h, p['defect_M'])
    ctx.flag('product-defect-rank', rank <= 2 * g.N * g.K, params={'N': g.N, 'K': g.K, 'M': p['defect_M']},
             estimate=rank, reference=2 * g.N * g.K)

    histograms = []
    for beta in p['betas']:
        probe = g0_law_probe(beta, p['k'], p['probe_draws'], p['probe_M'], ctx.key(f'g0-b{beta:g}'),
                             steps=p['steps'])
        histograms.append(probe['mass'])
        ctx.explore(f'g0-law-b{beta:g}', estimate=probe['median'],
                    reference=total_variation(probe['mass'], probe['target']),
                    params=probe, note='reference column holds the total variation to the conjectured law')
    for (b1, m1), (b2, m2) in zip(zip(p['betas'], histograms), zip(p['betas'][1:], histograms[1:])):
        ctx.explore(f'g0-stability-b{b1:g}-b{b2:g}', estimate=total_variation(m1, m2),
                    params={'betas': [b1, b2]})
