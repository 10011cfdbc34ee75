"""
Комплексные уравнения Костанта - Тоды в приведённых координатах (a, b)
для симметризуемой обобщённой матрицы Картана A:

    da_j/dt = b_j,    db_j/dt = -b_j sum_i a_i a_ij.

Знак во втором уравнении согласован с решением через разложение
exp(t x0) = l d u, x(t) = l^{-1} x0 l; напечатанный знак доступен как
toda_rhs_printed. Интегрирование ведётся по отрезкам и окружностям
в комплексной плоскости времени (scipy.integrate.solve_ivp, DOP853).
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from lab.exceptions import BlowUp, KmlabError, SingularMinor, StratumExit
from lab.linalg_core import expm, ldu

logger = logging.getLogger(__name__)

BLOWUP_NORM = 1e8
SCAN_THRESHOLDS = (1e4, 1e6)
TOL_RANGE = (1e-12, 1e-6)


@dataclass(frozen=True)
class GeneralizedCartanMatrix:
    """
    Обобщённая матрица Картана: a_ii = 2, a_ij <= 0 при i != j,
    a_ij = 0 тогда и только тогда, когда a_ji = 0; симметризаторы d_i
    удовлетворяют d_i a_ij = d_j a_ji.
    """
    entries: np.ndarray
    symmetrizers: tuple = field(default=None)

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=int)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise KmlabError('cartan matrix must be square')
        if np.any(np.diagonal(a) != 2):
            raise KmlabError('cartan matrix needs a_ii = 2')
        off = a - np.diag(np.diagonal(a))
        if np.any(off > 0):
            raise KmlabError('cartan matrix needs a_ij <= 0 off the diagonal')
        if np.any((off == 0) != (off.T == 0)):
            raise KmlabError('cartan matrix needs a_ij = 0 iff a_ji = 0')
        object.__setattr__(self, 'entries', a)
        if self.symmetrizers is None:
            object.__setattr__(self, 'symmetrizers', symmetrizers(a))
        d = self.symmetrizers
        for i in range(self.n):
            for j in range(self.n):
                if d[i] * int(a[i, j]) != d[j] * int(a[j, i]):
                    raise KmlabError(f'symmetrizers violate d_i a_ij = d_j a_ji at ({i}, {j})')

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def weights(self):
        """Веса гамильтониана c_j = 1/d_j: a_ij c_j симметрична."""
        return np.array([float(1 / d) for d in self.symmetrizers])

    @property
    def kind(self):
        """finite, affine или indefinite по спектру симметризованной матрицы."""
        sym = np.diag([float(d) for d in self.symmetrizers]) @ self.entries
        smallest = np.linalg.eigvalsh((sym + sym.T) / 2.0).min()
        if smallest > 1e-12:
            return 'finite'
        if smallest > -1e-12:
            return 'affine'
        return 'indefinite'


def symmetrizers(a):
    """
    Точные симметризаторы (fractions.Fraction) обходом графа Дынкина:
    d_j = d_i a_ij / a_ji, по одному корню на компоненту связности.
    """
    a = np.asarray(a, dtype=int)
    n = a.shape[0]
    d = [None] * n
    for root in range(n):
        if d[root] is not None:
            continue
        d[root] = Fraction(1)
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j in range(n):
                if i == j or a[i, j] == 0:
                    continue
                value = d[i] * int(a[i, j]) / int(a[j, i])
                if d[j] is None:
                    d[j] = value
                    queue.append(j)
                elif d[j] != value:
                    raise KmlabError('cartan matrix is not symmetrizable')
    return tuple(d)


def cartan_matrix(family, rank):
    """Матрицы Картана конечного типа A_l, B_l, C_l, D_l."""
    a = 2 * np.eye(rank, dtype=int)
    for i in range(rank - 1):
        a[i, i + 1] = a[i + 1, i] = -1
    if family == 'A':
        pass
    elif family == 'B' and rank >= 2:
        a[rank - 1, rank - 2] = -2
    elif family == 'C' and rank >= 2:
        a[rank - 2, rank - 1] = -2
    elif family == 'D' and rank >= 3:
        a[rank - 2, rank - 1] = a[rank - 1, rank - 2] = 0
        a[rank - 3, rank - 1] = a[rank - 1, rank - 3] = -1
    else:
        raise KmlabError(f'unsupported cartan type {family}{rank}')
    return GeneralizedCartanMatrix(a)


def rank2_cartan(p, q):
    """[[2, -p], [-q, 2]]: конечный тип при pq < 4, аффинный при pq = 4, иначе гиперболический."""
    return GeneralizedCartanMatrix(np.array([[2, -p], [-q, 2]]))


@dataclass(frozen=True)
class TodaState:
    a: np.ndarray
    b: np.ndarray
    t: complex = 0.0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        b = np.asarray(self.b, dtype=complex)
        if a.shape != b.shape:
            raise KmlabError('a and b must have the same length')
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise KmlabError('toda state has non-finite entries')
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 't', complex(self.t))

    @property
    def vector(self):
        return np.concatenate([self.a, self.b])

    @property
    def norm(self):
        return float(np.linalg.norm(self.vector))

    @classmethod
    def from_vector(cls, y, t=0.0):
        n = len(y) // 2
        return cls(a=y[:n], b=y[n:], t=t)


def _as_cartan(A):
    return A if isinstance(A, GeneralizedCartanMatrix) else GeneralizedCartanMatrix(np.asarray(A))


def toda_rhs(state, A):
    """(da, db) = (b, -b * (A^T a))."""
    A = _as_cartan(A)
    return state.b.copy(), -state.b * (state.a @ A.entries)


def toda_rhs_printed(state, A):
    """Правая часть с напечатанным знаком +sum_i a_i a_ij b_j (для отчётов о дрейфе)."""
    A = _as_cartan(A)
    return state.b.copy(), state.b * (state.a @ A.entries)


def hamiltonian_reduced(state, A):
    """H = sum_ij a_ij c_j a_i a_j + 2 sum_j c_j b_j, c_j = 1/d_j."""
    A = _as_cartan(A)
    c = A.weights
    return complex(state.a @ (A.entries * c[None, :]) @ state.a + 2.0 * np.sum(c * state.b))


@dataclass(frozen=True)
class Trajectory:
    """Решение на сетке параметра пути tau: t[k], a[k], b[k]."""
    tau: np.ndarray
    t: np.ndarray
    a: np.ndarray
    b: np.ndarray
    hamiltonian_drift: float
    nfev: int

    @property
    def final(self):
        return TodaState(a=self.a[-1], b=self.b[-1], t=self.t[-1])

    def state(self, k):
        return TodaState(a=self.a[k], b=self.b[k], t=self.t[k])


def _check_tol(tol):
    low, high = TOL_RANGE
    if not low <= tol <= high:
        raise KmlabError(f'tolerance {tol} outside [{low}, {high}]')


def _blowup_event(threshold, terminal):
    def event(_, y):
        return float(np.linalg.norm(y)) - threshold
    event.terminal = terminal
    event.direction = 1
    return event


def integrate_path(state0, A, path, velocity, tol=1e-10, tau_eval=None, rhs=toda_rhs, scan=False):
    """
    Интегрирует систему вдоль пути t = path(tau), tau in [0, 1]:
    dy/dtau = f(y) * velocity(tau). При ||(a, b)|| > 1e8 поднимается BlowUp
    с последним надёжным временем.
    """
    _check_tol(tol)
    A = _as_cartan(A)
    n = A.n
    if len(state0.a) != n:
        raise KmlabError(f'state of length {len(state0.a)} does not match rank {n}')

    def fun(tau, y):
        da, db = rhs(TodaState.from_vector(y), A)
        return np.concatenate([da, db]) * velocity(tau)

    events = [_blowup_event(BLOWUP_NORM, True)]
    if scan:
        events += [_blowup_event(threshold, False) for threshold in SCAN_THRESHOLDS]
    sol = solve_ivp(fun, (0.0, 1.0), state0.vector, method='DOP853', rtol=tol, atol=tol,
                    t_eval=tau_eval, events=events)
    if sol.status == 1:
        tau_star = float(sol.t_events[0][-1])
        crossings = [float(te[-1]) for te in sol.t_events[1:] if len(te)]
        reliable = sol.t[-2] if len(sol.t) > 1 else 0.0
        raise BlowUp(complex(path(tau_star)), last_reliable=complex(path(reliable)),
                     tau=tau_star, crossings=crossings)
    if not sol.success:
        raise KmlabError(f'integration failed: {sol.message}')
    tau = sol.t
    ys = sol.y.T
    h0 = hamiltonian_reduced(state0, A)
    drift = max(abs(hamiltonian_reduced(TodaState.from_vector(y), A) - h0) for y in ys)
    return Trajectory(tau=tau, t=np.array([complex(path(x)) for x in tau]), a=ys[:, :n], b=ys[:, n:],
                      hamiltonian_drift=float(drift), nfev=int(sol.nfev))


def integrate(state0, A, t_end, tol=1e-10, t_eval=None, rhs=toda_rhs):
    """
    Интегрирование по прямому отрезку state0.t -> t_end в комплексном времени.
    t_eval задаёт точки выдачи (лежащие на отрезке).
    """
    t0 = complex(state0.t)
    span = complex(t_end) - t0
    if span == 0:
        return Trajectory(tau=np.zeros(1), t=np.array([t0]), a=state0.a[None], b=state0.b[None],
                          hamiltonian_drift=0.0, nfev=0)
    tau_eval = None
    if t_eval is not None:
        tau_eval = np.real((np.asarray(t_eval, dtype=complex) - t0) / span)
    return integrate_path(state0, A, lambda tau: t0 + tau * span, lambda tau: span, tol=tol,
                          tau_eval=tau_eval, rhs=rhs)


def matrix_from_state(state):
    """
    Реализация в sl(n+1): x = eps + diag(a_k - a_{k-1}) + sum_j b_j E_{j+1, j},
    eps - наддиагональ из единиц, a_0 = a_{n+1} = 0.
    """
    a = np.concatenate([[0.0], state.a, [0.0]])
    size = len(state.a) + 1
    x = np.diag(np.ones(size - 1, dtype=complex), 1)
    x += np.diag(a[1:] - a[:-1])
    x += np.diag(state.b, -1)
    return x


def state_from_matrix(x, t=0.0):
    """Обратное к matrix_from_state: a_j = sum_{k <= j} x_kk, b_j = x_{j+1, j}."""
    x = np.asarray(x, dtype=complex)
    return TodaState(a=np.cumsum(np.diagonal(x))[:-1], b=np.diagonal(x, -1).copy(), t=t)


def solve_by_factorization(x0, t):
    """
    x(t) = l^{-1} x0 l, где exp(t x0) = l diag(d) u. Выход из верхней страты
    даёт StratumExit(t).
    """
    x0 = np.asarray(x0, dtype=complex)
    try:
        l = ldu(expm(t * x0)).l
    except SingularMinor as exc:
        raise StratumExit(t) from exc
    return np.linalg.solve(l, x0 @ l)


def lower_bandwidth(x, tol=1e-10):
    """Глубина поддиагональной части: наибольшее k с |x_{i+k, i}| > tol."""
    x = np.asarray(x)
    depth = 0
    for k in range(1, x.shape[0]):
        if np.any(np.abs(np.diagonal(x, -k)) > tol):
            depth = k
    return depth


@dataclass(frozen=True)
class SingularTime:
    t: complex
    uncertainty: float


def _extrapolate_pole(crossings, tau_star):
    """
    Положение особенности по трём пересечениям порогов 1e4, 1e6, 1e8:
    при степенном росте расстояния до полюса образуют геометрическую
    прогрессию, и предел находится экстраполяцией Эйткена.
    """
    if len(crossings) == 2:
        t1, t2 = crossings
        t3 = tau_star
        denom = t1 + t3 - 2.0 * t2
        if abs(denom) > 1e-15:
            estimate = (t1 * t3 - t2 * t2) / denom
            if 0.0 <= estimate - t3 <= t3 - t1:
                return estimate, estimate - t3
        return tau_star, t3 - t1
    return tau_star, 0.0


def singularity_scan(state0, A, direction, t_max, tol=1e-10, detour=0.05, max_hits=8):
    """
    Интегрирует вдоль луча state0.t + r * direction/|direction|, 0 <= r <= t_max.
    После каждой особенности обходит её по полуокружности радиуса detour
    и продолжает луч. Возвращает список SingularTime (пустой, если взрывов нет).
    """
    unit = complex(direction) / abs(direction)
    origin = complex(state0.t)
    found = []
    state, r0 = state0, 0.0
    while r0 < t_max and len(found) < max_hits:
        length = t_max - r0
        start = origin + r0 * unit

        def path(tau, start=start, length=length):
            return start + tau * length * unit

        try:
            integrate_path(state, A, path, lambda tau, length=length: length * unit,
                                        tol=tol, scan=True)
            return found
        except BlowUp as exc:
            tau_pole, spread = _extrapolate_pole(exc.crossings, exc.tau)
            t_pole = path(min(tau_pole, 1.0))
            found.append(SingularTime(t=complex(t_pole), uncertainty=float(spread * length)))
            logger.info('singularity_scan: blow-up near t=%s', t_pole)
            r_pole = r0 + min(tau_pole, 1.0) * length
            if r_pole + detour >= t_max:
                break
            state = _detour(state, A, r_pole, origin, unit, detour, tol)
            r0 = r_pole + detour
    return found


def _detour(state, A, r_pole, origin, unit, radius, tol):
    """Доходит до точки r_pole - radius и обходит особенность по полуокружности."""
    near = origin + (r_pole - radius) * unit
    state = integrate(state, A, near, tol=tol).final
    center = origin + r_pole * unit

    def arc(tau):
        return center - radius * unit * np.exp(-1j * np.pi * tau)

    def arc_velocity(tau):
        return 1j * np.pi * radius * unit * np.exp(-1j * np.pi * tau)

    trajectory = integrate_path(state, A, arc, arc_velocity, tol=tol)
    final = trajectory.final
    return TodaState(a=final.a, b=final.b, t=center + radius * unit)


def monodromy_probe(state0, A, center, radius, tol=1e-10):
    """
    Интегрирует до точки center + radius, затем один раз по окружности
    |t - center| = radius. Возвращает ||state_end - state_start||;
    для конечного типа решение однозначно и рассогласование мало.
    """
    start = complex(center) + radius
    state = integrate(state0, A, start, tol=tol).final

    def circle(tau):
        return complex(center) + radius * np.exp(2j * np.pi * tau)

    def circle_velocity(tau):
        return 2j * np.pi * radius * np.exp(2j * np.pi * tau)

    end = integrate_path(state, A, circle, circle_velocity, tol=tol).final
    return float(np.linalg.norm(end.vector - state.vector))


def random_tridiagonal_state(rank, rng, scale=0.5):
    """Вещественные данные с b > 0: решение существует при всех вещественных t."""
    a = scale * rng.standard_normal(rank)
    b = np.exp(scale * rng.standard_normal(rank))
    return TodaState(a=a, b=b)


def factorization_gap(state0, t_grid, tol=1e-10):
    """
    Sup по t_grid расхождения между решением через разложение и ODE для sl(n+1),
    а также наибольшая поддиагональная глубина x(t).
    """
    A = cartan_matrix('A', len(state0.a))
    x0 = matrix_from_state(state0)
    trajectory = integrate(state0, A, t_grid[-1], tol=tol, t_eval=t_grid)
    gap, depth = 0.0, 0
    for k, t in enumerate(t_grid):
        x = solve_by_factorization(x0, t)
        exact = state_from_matrix(x, t)
        gap = max(gap, float(np.linalg.norm(exact.vector - trajectory.state(k).vector)))
        depth = max(depth, lower_bandwidth(x))
    return gap, depth, trajectory.hamiltonian_drift
