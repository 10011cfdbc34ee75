"""
Наборы для мер на грассманианах: инвариантная мера в графовой карте,
согласованность проекций, формула замены переменных и цепочка Шура.
"""
import numpy as np

from lab.ensembles import haar_unitary
from lab.grassmann import (MuSDensitySpec, change_of_variables_check, gaussian_schur_limit_check,
                           gaussian_unscaled_drift, grassmann_normalization, inversion_invariance_check,
                           ks_uniform_check, mean_trace_check, mu_s_normalization_probe, project_corner,
                           sample_grassmann_invariant, schur_pushforward_check, uniform_reduction,
                           unitary_invariance_check)
from lab.parallel import map_chunks
from lab.suites import register


def _ks_record(ctx, name, result, params):
    ctx.flag(name, result['passed'], params=params, estimate=result['statistic'],
             reference=result['critical'], score=result['statistic'] / result['critical'])


def _samples(ctx, M, key, draws):
    def chunk(index, size):
        return sample_grassmann_invariant(M, key, index=index, size=size)
    return np.concatenate(map_chunks(chunk, draws, **ctx.parallel))


@register('grassmann', defaults={'draws': 10 ** 5, 's': 0.5, 'sizes': [1, 2], 'statistics': 5})
def grassmann(ctx):
    """Инвариантная мера на Gr(M, C^{2M}): KS-критерии, моменты, инвариантность, коцикл."""
    p = ctx.params
    draws = p['draws']

    z1 = _samples(ctx, 1, ctx.key('m1'), draws)
    _ks_record(ctx, 'm1-uniform', ks_uniform_check(uniform_reduction(z1)), {'M': 1, 'draws': draws})

    z2 = _samples(ctx, 2, ctx.key('m2'), draws)
    corner = project_corner(z2, 1)
    _ks_record(ctx, 'm2-corner-uniform', ks_uniform_check(uniform_reduction(corner)), {'M': 2, 'm': 1})

    s = p['s']
    ctx.gap('m1-normalization', grassmann_normalization(1, s), np.pi / (1 + s), 1e-10, params={'s': s})

    for M in p['sizes']:
        ctx.verdict(f'mean-trace-m{M}', mean_trace_check(M, ctx.key(f'mean-trace-m{M}'), draws=draws,
                                                          **ctx.parallel))
        _ks_record(ctx, f'inversion-m{M}',
                   inversion_invariance_check(M, ctx.key(f'inversion-m{M}'), draws=draws, **ctx.parallel),
                   {'M': M})
        u = haar_unitary(2 * M, ctx.key(f'unitary-u-m{M}'))
        for i, verdict in enumerate(unitary_invariance_check(M, ctx.key(f'unitary-m{M}'), u, draws=draws,
                                                             **ctx.parallel)):
            ctx.verdict(f'unitary-m{M}-{i}', verdict)

    g = haar_unitary(2, ctx.key('cocycle-g'))
    for i, verdict in enumerate(change_of_variables_check(g, s, ctx.key('cocycle'), draws=draws,
                                                          statistics=p['statistics'], **ctx.parallel)):
        ctx.verdict(f'cocycle-{i}', verdict)

    for r in (0,):
        spec = MuSDensitySpec(n=2, r=r, s=s)
        probe = mu_s_normalization_probe(spec, ctx.key(f'mu-s-r{r}'), draws=draws)
        ctx.explore(f'mu-s-normalization-r{r}', estimate=probe['mean_weight'],
                    params={'n': spec.n, 'r': r, 's': s, 'stderr': probe['stderr'],
                            'tail_index': probe['tail_index']})


@register('mu0-projection', defaults={'draws': 10 ** 5, 'N': 2, 'n': 1, 'statistics': 6,
                                      'gaussian_N': 64, 'gaussian_draws': 4000,
                                      'unscaled_N': [16, 32, 64]})
def mu0_projection(ctx):
    """Проекция Шура mu_0^{(N)} -> mu_0^{(n)} и гауссов предел Шура."""
    p = ctx.params
    for i, verdict in enumerate(schur_pushforward_check(p['N'], p['n'], ctx.key('pushforward'),
                                                        draws=p['draws'], statistics=p['statistics'],
                                                        **ctx.parallel)):
        ctx.verdict(f'pushforward-{i}', verdict)
    ctx.verdict('gaussian-limit', gaussian_schur_limit_check(p['n'], p['gaussian_N'], ctx.key('gaussian'),
                                                             draws=p['gaussian_draws'], **ctx.parallel))
    means, monotone = gaussian_unscaled_drift(p['n'], p['unscaled_N'], ctx.key('gaussian-unscaled'),
                                              draws=p['gaussian_draws'], **ctx.parallel)
    ctx.flag('gaussian-unscaled', monotone, params={'n': p['n'], 'N': sorted(p['unscaled_N']), 'means': means},
             estimate=means[-1], reference=means[0])
