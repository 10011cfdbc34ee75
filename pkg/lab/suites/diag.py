"""
Наборы для диагональных законов: типы A и B/C/D, взвешенный закон,
тождество Сельберга, размерность Вейля, предел масштабированного SU(n)
и произведение мер nu_d.
"""
import numpy as np

from lab import cfunc
from lab.diagdist import (cf_from_log_a, check_ess, check_reliable, compare, haar_invariance_check,
                          sample_log_a, selberg_mc_check, weight_log, weighted_mean, weyl_dimension_check)
from lab.ensembles import GroupSpec, haar_unitary, haar_unitary_columns, product_measure_sample
from lab.parallel import map_chunks
from lab.suites import register

SELBERG_NOTE = (
    'Selberg convention: entries have unit variance E|g_ij|^2 = 1 (ginibre with beta = 2); '
    'with the nu_beta variance 2/beta the reference picks up a factor 2^{-ins} from the '
    'rescaling of tr(g* g) by 2.'
)


def lambda_points(dim, count, top=2.0):
    """count точек t * (1, -0.6, 0.3, ...) с t на равномерной сетке (0, top]."""
    pattern = np.array([(-0.5) ** j * (1.0 + 0.2 * j) for j in range(dim)])
    return [t * pattern for t in np.linspace(top / count, top, count)]


def _cf_checks(ctx, spec, root_spec, reference, dim, count, draws, label):
    log_a, rejected = sample_log_a(spec, draws, ctx.key(label), **ctx.parallel)
    for i, lam in enumerate(lambda_points(dim, count)):
        params = {'group': spec.label, 'lambda': lam}

        def check(lam=lam):
            estimate = check_reliable(cf_from_log_a(log_a, lam, n_rejected=rejected))
            return compare(estimate, reference(root_spec, lam), params=params)

        verdict = ctx.guarded(f'{label}-{i}', check, params)
        if verdict is not None:
            ctx.verdict(f'{label}-{i}', verdict)


@register('diag-A', defaults={'sizes': [2, 3, 4], 'draws': 10 ** 6, 'points': 10, 'invariance_draws': 10 ** 5})
def diag_a(ctx):
    """Диагональный закон на SU(n) против c_finite_A; инвариантность меры Хаара."""
    p = ctx.params
    for n in p['sizes']:
        spec = GroupSpec.su(n)
        _cf_checks(ctx, spec, cfunc.RootSystemSpec('A', n - 1),
                   lambda root_spec, lam: cfunc.c_finite_A(root_spec.dim, lam),
                   n, p['points'], p['draws'], f'su{n}')
    spec = GroupSpec.su(3)
    u = haar_unitary(3, ctx.key('invariance-u'))
    for i, verdict in enumerate(haar_invariance_check(spec, ctx.key('invariance'), u,
                                                      draws=p['invariance_draws'], **ctx.parallel)):
        ctx.verdict(f'haar-invariance-{i}', verdict)


@register('diag-BCD', defaults={'groups': [['D', 2], ['B', 2], ['C', 2]], 'draws': 10 ** 6, 'points': 6})
def diag_bcd(ctx):
    """Типы B/C/D в базисе квадратичной формы против c_finite_BCD."""
    p = ctx.params
    for family, rank in p['groups']:
        spec = GroupSpec(family, rank, basis='quadratic-form')
        root_spec = cfunc.RootSystemSpec(family, rank)
        _cf_checks(ctx, spec, root_spec, cfunc.c_finite_BCD, rank, p['points'], p['draws'],
                   f'{family}{rank}')
    ctx.note('Type D sum-root denominators are p+q-2; the printed p+q-1 is not used for verdicts.')


def _weighted(ctx, spec, lam, s, r, log_a, rejected, name, reference, closed=None):
    params = {'group': spec.label, 'lambda': lam, 's': s, 'r': r}

    def check():
        estimate = cf_from_log_a(log_a, lam, log_w=weight_log(log_a, spec, s, r), n_rejected=rejected)
        check_ess(estimate)
        return compare(check_reliable(estimate), reference, params=params)

    verdict = ctx.guarded(name, check, params)
    if verdict is not None:
        note = '' if closed is None else f'closed form {closed:.12g}'
        ctx.verdict(name, verdict, note=note)


@register('diag-weighted', defaults={'draws': 10 ** 6, 's': 1.0, 't': [0.5, 1.0]})
def diag_weighted(ctx):
    """Взвешенные законы: SU(2) против (1+s)/(1+s-it), SO(4) против c_weighted."""
    p = ctx.params
    s = p['s']
    spec = GroupSpec.su(2)
    root_spec = cfunc.RootSystemSpec('A', 1)
    log_a, rejected = sample_log_a(spec, p['draws'], ctx.key('su2'), **ctx.parallel)
    for t in p['t']:
        lam = [t, -t]
        closed = (1 + s) / (1 + s - 1j * t)
        _weighted(ctx, spec, lam, s, 1, log_a, rejected, f'su2-t{t}',
                  cfunc.c_weighted(root_spec, lam, s, r=1), closed=closed)

    spec = GroupSpec('D', 2, basis='quadratic-form')
    root_spec = cfunc.RootSystemSpec('D', 2)
    log_a, rejected = sample_log_a(spec, p['draws'], ctx.key('so4'), **ctx.parallel)
    for i, lam in enumerate(lambda_points(2, 3, top=1.5)):
        _weighted(ctx, spec, lam, s, None, log_a, rejected, f'so4-{i}', cfunc.c_weighted(root_spec, lam, s))


@register('selberg', defaults={'sizes': [1, 2, 3, 4], 's': [0.5, 1.0], 'draws': 10 ** 6})
def selberg(ctx):
    """E[det(g* g)^{-is}] по гауссовой мере против prod Gamma(j - is)/Gamma(j)."""
    p = ctx.params
    for n in p['sizes']:
        for s in p['s']:
            ctx.verdict(f'n{n}-s{s}', selberg_mc_check(n, s, ctx.key(f'n{n}-s{s}'), draws=p['draws'],
                                                       **ctx.parallel))
    ctx.note(SELBERG_NOTE)


@register('weyl-dim', defaults={'sizes': [2, 3, 4, 5], 'draws': 10 ** 6})
def weyl_dim(ctx):
    """E|g_11|^2 = 1/n на SU(n)."""
    for n in ctx.params['sizes']:
        ctx.verdict(f'su{n}', weyl_dimension_check(GroupSpec.su(n), ctx.key(f'su{n}'),
                                                   draws=ctx.params['draws'], **ctx.parallel))


@register('scaled-limit', defaults={'cutoffs': [1000, 10000], 'tol': 1e-6, 'n': 128, 'draws': 10 ** 5,
                                    'beta': 1.0})
def scaled_limit(ctx):
    """
    Регуляризованное произведение: сходимость конечных форм (Ричардсон) и
    Монте-Карло по масштабированному SU(n) против предела и конечной формы.
    """
    p = ctx.params
    small, large = p['cutoffs']
    grid = [{1: 0.5}, {1: 1.0}, {1: 1.0, 2: -0.5}, {1: 0.3, 3: 0.7}, {2: 1.5}]
    for i, lam in enumerate(grid):
        lam = cfunc.as_spectral(lam)

        def finite(n, lam=lam):
            return cfunc.c_scaled_A(n, lam)

        a = cfunc.richardson_limit(finite, small)
        b = cfunc.richardson_limit(finite, large)
        ctx.gap(f'richardson-{i}', a, b, p['tol'], params={'lambda': lam.as_dict()})
        raw_gap = abs(finite(small) - finite(large))
        exact = cfunc.c_limit_A(lam)
        ctx.flag(f'raw-decay-{i}', abs(finite(large) - exact) < abs(finite(small) - exact),
                 params={'lambda': lam.as_dict()}, estimate=finite(large), reference=exact, score=raw_gap)

    n, beta = p['n'], p['beta']
    for i, lam in enumerate([{1: 1.0}, {1: 0.5, 2: -0.5}]):
        lam = cfunc.as_spectral(lam)
        depth = lam.max_index
        key = ctx.key(f'scaled-su-{i}')

        def sampler(k, index, size, depth=depth):
            g = haar_unitary_columns(n, depth, k, index=index, size=size)
            return np.sqrt(n / beta) * g[..., :depth, :depth]

        log_a, rejected = sample_log_a(GroupSpec.su(n), p['draws'], key, sampler=sampler, depth=depth,
                                       **ctx.parallel)
        estimate = cf_from_log_a(log_a, lam, n_rejected=rejected)
        params = {'n': n, 'lambda': lam.as_dict()}
        ctx.verdict(f'scaled-su-limit-{i}', compare(estimate, cfunc.c_limit_A(lam), params=params))
        scale = np.exp(-0.5j * np.log(n / beta) * lam.total) * cfunc.c_finite_A(n, lam)
        ctx.verdict(f'scaled-su-{i}', compare(estimate, scale, params=params))


@register('product-measure', defaults={'weights': [[1.0], [1.0, 1.0], [1.0, 0.5]], 'u': [0.5, 1.0, 2.0],
                                       'draws': 10 ** 5})
def product_measure(ctx):
    """E exp(iu Re g) для nu_d при n = 1 против prod (1 + d_j^2 u^2)^{-1}."""
    p = ctx.params
    for i, d in enumerate(p['weights']):
        key = ctx.key(f'weights-{i}')

        def chunk(index, size, d=d):
            return product_measure_sample(d, 1, key, index=index, size=size)[..., 0, 0]

        g = np.concatenate(map_chunks(chunk, p['draws'], **ctx.parallel))
        for u in p['u']:
            reference = float(np.prod(1.0 / (1.0 + (np.asarray(d) * u) ** 2)))
            estimate = weighted_mean(np.exp(1j * u * g.real))
            ctx.verdict(f'weights-{i}-u{u}', compare(estimate, reference, params={'d': d, 'u': u}))
