"""
Наборы для уравнений Тоды: замкнутая форма sl(2), сравнение с решением
через разложение, сохранение гамильтониана, однозначность на конечных типах
и исследовательские сканы особенностей для гиперболических и аффинных матриц.
"""
import numpy as np

from lab.exceptions import BlowUp, KmlabError, StratumExit
from lab.suites import register
from lab.toda import (TodaState, cartan_matrix, factorization_gap, integrate, monodromy_probe,
                      random_tridiagonal_state, rank2_cartan, singularity_scan, toda_rhs_printed)

FINITE_TYPES = {
    'A2': lambda: cartan_matrix('A', 2),
    'B2': lambda: cartan_matrix('B', 2),
    'C2': lambda: cartan_matrix('C', 2),
    'G2': lambda: rank2_cartan(1, 3),
    'A3': lambda: cartan_matrix('A', 3),
}


def _rng(ctx, name):
    return ctx.key(name).generator(0)


@register('toda', defaults={'tol': 1e-10, 'closed_tol': 1e-9, 'gap_tol': 1e-6, 'drift_tol': 1e-8,
                            'monodromy_tol': 1e-7, 'radius': 0.3, 'grid': 11, 'factor_ranks': [2, 3]})
def toda(ctx):
    """Тода: tanh/sech^2 для sl(2), разложение для sl(3), sl(4), гамильтониан, монодромия."""
    p = ctx.params
    tol = p['tol']

    final = integrate(TodaState(a=[0.0], b=[1.0]), cartan_matrix('A', 1), 1.0, tol=min(tol, 1e-12)).final
    ctx.gap('sl2-a', final.a[0], np.tanh(1.0), p['closed_tol'], params={'t': 1.0})
    ctx.gap('sl2-b', final.b[0], 1.0 / np.cosh(1.0) ** 2, p['closed_tol'], params={'t': 1.0})

    t_grid = np.linspace(0.0, 1.0, p['grid'])
    for rank in p['factor_ranks']:
        state = random_tridiagonal_state(rank, _rng(ctx, f'factor-sl{rank + 1}'))
        try:
            gap, depth, _ = factorization_gap(state, t_grid, tol=tol)
        except StratumExit as exc:
            ctx.flag(f'factor-sl{rank + 1}', False, params={'rank': rank}, note=str(exc))
            continue
        ctx.gap(f'factor-sl{rank + 1}', gap, 0.0, p['gap_tol'], params={'rank': rank, 't_max': 1.0})
        ctx.flag(f'factor-sl{rank + 1}-tridiagonal', depth <= 1, params={'rank': rank}, score=depth)

    for label, build in FINITE_TYPES.items():
        A = build()
        state = random_tridiagonal_state(A.n, _rng(ctx, f'drift-{label}'))
        trajectory = integrate(state, A, 1.0, tol=tol)
        ctx.gap(f'drift-{label}', trajectory.hamiltonian_drift, 0.0, p['drift_tol'],
                params={'type': label, 'weights': list(A.weights)})
        mismatch = monodromy_probe(state, A, center=0.5, radius=p['radius'], tol=tol)
        ctx.gap(f'monodromy-{label}', mismatch, 0.0, p['monodromy_tol'],
                params={'type': label, 'center': 0.5, 'radius': p['radius']})


@register('toda-scan', defaults={'tol': 1e-10, 't_max': 4.0, 'detour': 0.05,
                                 'matrices': [[1, 5], [2, 3], [3, 3], [2, 2], [1, 4]],
                                 'directions': [[1.0, 0.0], [0.0, 1.0]]},
          exploratory=True)
def toda_scan(ctx):
    """
    Особенности в комплексном времени для матриц [[2, -p], [-q, 2]] при pq >= 4
    и дрейф гамильтониана при напечатанном знаке правой части.
    """
    p = ctx.params
    for pq in p['matrices']:
        A = rank2_cartan(*pq)
        label = f'{A.kind}-{pq[0]}{pq[1]}'
        state = random_tridiagonal_state(2, _rng(ctx, label))
        for re, im in p['directions']:
            direction = complex(re, im)
            name = f'{label}-scan-{re:g}{im:+g}i'
            params = {'pq': pq, 'direction': [re, im], 't_max': p['t_max']}
            try:
                hits = singularity_scan(state, A, direction, p['t_max'], tol=p['tol'], detour=p['detour'])
            except KmlabError as exc:
                ctx.explore(name, params=params, note=str(exc))
                continue
            params['poles'] = [[t.t.real, t.t.imag, t.uncertainty] for t in hits]
            ctx.explore(name, estimate=len(hits), params=params)

    for label, build in FINITE_TYPES.items():
        A = build()
        state = random_tridiagonal_state(A.n, _rng(ctx, f'printed-{label}'))
        try:
            drift = integrate(state, A, 1.0, tol=p['tol'], rhs=toda_rhs_printed).hamiltonian_drift
            note = ''
        except BlowUp as exc:
            drift, note = None, f'blow-up at t={exc.t}'
        ctx.explore(f'printed-sign-drift-{label}', estimate=drift, params={'type': label}, note=note)
