"""
Набор для сферического анализа ранга 1: пара Фурье sech, ряды вычетов,
квадратурное обращение преобразования Хариша и зонд аффинного произведения.
"""
import numpy as np

from lab import cfunc
from lab.spherical import (affine_c_product_probe, harish_inverse_quadrature, phi_closed, residue_closed_forms,
                           residue_phi, residue_series, sech_cf, sech_density, sech_harish_transform,
                           sech_inverse_transform, sech_partial_product, sech_transform)
from lab.suites import register


@register('spherical', defaults={'lambdas': [0.0, 0.5, 1.0, 2.0], 'radii': [0.5, 1.0, 2.0],
                                 'points': [1.5, 2.0, 3.0], 'residue_a': 2.0, 'pair_tol': 1e-6,
                                 'residue_tol': 1e-10, 'inverse_tol': 1e-6, 'product_cutoff': 10 ** 5,
                                 'affine_levels': [0.5, 1.0], 'affine_cutoff': 10 ** 4})
def spherical(ctx):
    """Пара sech, вычеты при a = 2, обращение против (a^2 + a^{-2})^{-3}, аффинное произведение sl2."""
    p = ctx.params
    for lam in p['lambdas']:
        ctx.gap(f'transform-l{lam:g}', sech_transform(lam), sech_cf(lam), p['pair_tol'], params={'lambda': lam})
        cutoff = p['product_cutoff']
        ctx.gap(f'product-l{lam:g}', sech_partial_product(lam, cutoff), sech_cf(lam),
                max(lam * lam / cutoff, 1e-12), params={'lambda': lam, 'cutoff': cutoff})
    for a in p['radii']:
        ctx.gap(f'inverse-a{a:g}', sech_inverse_transform(a), sech_density(a), p['pair_tol'], params={'a': a})

    a = p['residue_a']
    series = residue_series(a)
    closed = residue_closed_forms(a)
    for family in ('plus', 'minus'):
        ctx.gap(f'residue-{family}', series[family], closed[family], p['residue_tol'], params={'a': a})

    for a in p['points']:
        ctx.gap(f'residue-ratio-a{a:g}', residue_phi(a) / phi_closed(a), 32.0, 1e-8, params={'a': a})
        ctx.gap(f'harish-a{a:g}', harish_inverse_quadrature(sech_harish_transform, a),
                phi_closed(a, normalized=True), p['inverse_tol'], params={'a': a})
    a = p['points'][0]
    ctx.gap('weyl-symmetry', harish_inverse_quadrature(lambda lam: sech_harish_transform(-lam), a),
            harish_inverse_quadrature(sech_harish_transform, a), 1e-8, params={'a': a})

    spec = cfunc.RootSystemSpec('A', 1)
    for level in p['affine_levels']:
        probe = affine_c_product_probe(spec, [level, -level], dual_coxeter=2, cutoff=p['affine_cutoff'])
        ctx.gap(f'affine-sl2-l{level:g}', probe['value'], sech_cf(level), p['pair_tol'],
                params={'lambda': level, 'cutoff': probe['cutoff']},
                note=f'doubling gap {probe["doubling_gap"]:.3e}')


@register('affine-probe', defaults={'cases': [[1, 0.5, 0.0, 0], [1, 0.5, 0.5, 1], [2, 0.5, 0.5, 1]],
                                    'cutoff': 10 ** 4},
          exploratory=True)
def affine_probe(ctx):
    """Гипотетическое аффинное произведение c-функции для sl(n+1) с весом уровня k."""
    for rank, lam, s, k in ctx.params['cases']:
        spec = cfunc.RootSystemSpec('A', rank)
        vector = np.zeros(spec.dim)
        vector[0], vector[-1] = lam, -lam
        weight = np.zeros(spec.dim)
        weight[0] = 1.0
        params = {'rank': rank, 'lambda': vector, 's': s, 'k': k, 'dual_coxeter': rank + 1}

        def probe(spec=spec, vector=vector, s=s, k=k, weight=weight, rank=rank):
            return affine_c_product_probe(spec, vector, dual_coxeter=rank + 1, s=s, k=k, weight=weight,
                                          cutoff=ctx.params['cutoff'])

        result = ctx.guarded(f'sl{rank + 1}-l{lam:g}-s{s:g}-k{k}', probe, params)
        if result is not None:
            ctx.explore(f'sl{rank + 1}-l{lam:g}-s{s:g}-k{k}', estimate=result['value'],
                        params=dict(params, raw=result['raw'], doubling_gap=result['doubling_gap']),
                        note='conjectural product')
