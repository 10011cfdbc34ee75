import numpy as np
from django.test import SimpleTestCase

from lab.exceptions import BlowUp, KmlabError
from lab.toda import (GeneralizedCartanMatrix, TodaState, _extrapolate_pole, cartan_matrix, factorization_gap,
                      hamiltonian_reduced, integrate, lower_bandwidth, matrix_from_state, monodromy_probe,
                      random_tridiagonal_state, rank2_cartan, singularity_scan, solve_by_factorization,
                      state_from_matrix, toda_rhs, toda_rhs_printed)


class CartanMatrixTestCase(SimpleTestCase):
    """
    Обобщённые матрицы Картана:
    - проверка аксиом и симметризаторов,
    - классификация конечный / аффинный / неопределённый тип,
    - веса гамильтониана c = 1/d.
    """

    def test_rank2_kinds(self):
        self.assertEqual(rank2_cartan(1, 3).kind, 'finite')
        self.assertEqual(rank2_cartan(2, 2).kind, 'affine')
        self.assertEqual(rank2_cartan(1, 4).kind, 'affine')
        self.assertEqual(rank2_cartan(1, 5).kind, 'indefinite')
        self.assertEqual(rank2_cartan(2, 3).kind, 'indefinite')

    def test_symmetrizers_g2(self):
        """d_i a_ij = d_j a_ji, веса G2 равны (1, 3)."""
        g2 = rank2_cartan(1, 3)
        d = g2.symmetrizers
        self.assertEqual(d[0] * -1, d[1] * -3)
        self.assertTrue(np.allclose(g2.weights, [1.0, 3.0]))

    def test_finite_types(self):
        for family, rank in (('A', 3), ('B', 2), ('C', 3), ('D', 4)):
            self.assertEqual(cartan_matrix(family, rank).kind, 'finite')
        with self.assertRaises(KmlabError):
            cartan_matrix('D', 2)

    def test_axioms(self):
        with self.assertRaises(KmlabError):
            GeneralizedCartanMatrix(np.array([[2, 1], [1, 2]]))
        with self.assertRaises(KmlabError):
            GeneralizedCartanMatrix(np.array([[2, -1], [0, 2]]))
        with self.assertRaises(KmlabError):
            GeneralizedCartanMatrix(np.array([[1, -1], [-1, 2]]))


class TodaFlowTestCase(SimpleTestCase):
    """
    Интегрирование уравнений Тоды:
    - решение tanh/sech^2 для sl(2),
    - сохранение гамильтониана и однозначность по петле,
    - взрыв на вещественной оси и скан особенностей.
    """

    def setUp(self):
        """Данные sl(2) с известным решением a = tanh t, b = sech^2 t."""
        self.A = cartan_matrix('A', 1)
        self.state = TodaState(a=[0.0], b=[1.0])

    def test_sl2_closed_form(self):
        final = integrate(self.state, self.A, 1.0, tol=1e-12).final
        self.assertAlmostEqual(abs(final.a[0] - np.tanh(1.0)), 0.0, places=9)
        self.assertAlmostEqual(abs(final.b[0] - 1 / np.cosh(1.0) ** 2), 0.0, places=9)

    def test_hamiltonian(self):
        """H(0, 1) = 2 и сохраняется вдоль решения."""
        self.assertAlmostEqual(hamiltonian_reduced(self.state, self.A), 2.0)
        trajectory = integrate(self.state, self.A, 1.0, tol=1e-12)
        self.assertLess(trajectory.hamiltonian_drift, 1e-9)

    def test_printed_sign_flips_db(self):
        state = TodaState(a=[0.3], b=[1.0])
        _, db = toda_rhs(state, self.A)
        _, db_printed = toda_rhs_printed(state, self.A)
        self.assertTrue(np.allclose(db, -db_printed))

    def test_tolerance_range(self):
        with self.assertRaises(KmlabError):
            integrate(self.state, self.A, 1.0, tol=1e-3)

    def test_blow_up_on_real_axis(self):
        """a = -tan t, b = -sec^2 t: взрыв около t = pi/2."""
        with self.assertRaises(BlowUp) as ctx:
            integrate(TodaState(a=[0.0], b=[-1.0]), self.A, 2.0, tol=1e-10)
        self.assertLess(abs(ctx.exception.t - np.pi / 2), 1e-3)

    def test_singularity_scan(self):
        """Скан вдоль вещественной оси до t = 3 находит ровно один полюс pi/2."""
        hits = singularity_scan(TodaState(a=[0.0], b=[-1.0]), self.A, 1.0, 3.0, tol=1e-10)
        self.assertEqual(len(hits), 1)
        self.assertLess(abs(hits[0].t - np.pi / 2), 1e-4)
        self.assertLess(hits[0].uncertainty, 1e-3)

    def test_pole_extrapolation(self):
        """Пересечения порогов на расстояниях 1e-2, 1e-3, 1e-4 от полюса дают сам полюс."""
        tau, spread = _extrapolate_pole([0.49, 0.499], 0.4999)
        self.assertAlmostEqual(tau, 0.5, places=10)
        self.assertAlmostEqual(spread, 1e-4, places=10)
        self.assertEqual(_extrapolate_pole([0.4], 0.45), (0.45, 0.0))

    def test_scan_without_poles(self):
        self.assertEqual(singularity_scan(self.state, self.A, 1.0, 2.0, tol=1e-10), [])

    def test_monodromy_finite_type(self):
        mismatch = monodromy_probe(self.state, self.A, center=0.5, radius=0.3, tol=1e-10)
        self.assertLess(mismatch, 1e-7)
        g2 = rank2_cartan(1, 3)
        state = random_tridiagonal_state(2, np.random.default_rng(3))
        self.assertLess(monodromy_probe(state, g2, center=0.5, radius=0.3, tol=1e-10), 1e-7)


class FactorizationTestCase(SimpleTestCase):
    """Решение через разложение exp(t x0) = l d u для sl(n+1)."""

    def test_matrix_state_round_trip(self):
        state = TodaState(a=[0.2, -0.4], b=[1.5, 0.7])
        x = matrix_from_state(state)
        self.assertEqual(x.shape, (3, 3))
        self.assertTrue(np.allclose(state_from_matrix(x).vector, state.vector))
        self.assertEqual(lower_bandwidth(x), 1)

    def test_time_zero(self):
        x0 = matrix_from_state(TodaState(a=[0.2, -0.4], b=[1.5, 0.7]))
        self.assertTrue(np.allclose(solve_by_factorization(x0, 0.0), x0))

    def test_factorization_matches_ode(self):
        """Расхождение с ODE мало, x(t) остаётся трёхдиагональной."""
        for rank in (2, 3):
            state = random_tridiagonal_state(rank, np.random.default_rng(rank))
            gap, depth, drift = factorization_gap(state, np.linspace(0.0, 1.0, 6), tol=1e-10)
            self.assertLess(gap, 1e-6)
            self.assertLessEqual(depth, 1)
            self.assertLess(drift, 1e-7)
