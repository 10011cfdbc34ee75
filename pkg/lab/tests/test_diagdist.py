import numpy as np
from django.test import SimpleTestCase

from lab import cfunc
from lab.diagdist import (EmpiricalCF, a_coordinates, cf_from_log_a, check_ess, check_reliable, compare,
                          empirical_cf, empirical_cf_weighted, haar_invariance_check, log_a_batch, sample_log_a,
                          selberg_mc_check, weighted_mean, weyl_dimension_check)
from lab.ensembles import GroupSpec, StreamKey, haar_compact, haar_unitary
from lab.exceptions import OffStratum, Unreliable

DRAWS = 20000


class ACoordinatesTestCase(SimpleTestCase):
    """a-координаты и отбраковка образцов вне верхней страты."""

    def test_diagonal_matrix(self):
        """Для диагональной матрицы a - модули диагонали без последней координаты."""
        a = a_coordinates(np.diag([2.0, 0.5j, 1.0]), GroupSpec.su(3)).a
        self.assertTrue(np.allclose(a, [2.0, 0.5]))
        self.assertTrue(np.allclose(a_coordinates(np.diag([2.0, 3.0]), GroupSpec.su(2), depth=2).a, [2.0, 3.0]))

    def test_last_coordinate_is_redundant(self):
        """На SU(3) сумма всех log a_j равна log|det g| = 0."""
        spec = GroupSpec.su(3)
        gs = haar_compact(spec, StreamKey.named(4, 'redundant'), size=3)
        log_a, _ = log_a_batch(gs, spec)
        self.assertTrue(np.allclose(log_a.sum(axis=-1), 0.0, atol=1e-10))
        self.assertEqual(a_coordinates(gs[0], spec).a.shape, (2,))

    def test_off_stratum(self):
        with self.assertRaises(OffStratum):
            a_coordinates([[0, 1], [1, 0]], GroupSpec.su(2))

    def test_batch_matches_single(self):
        """Векторизованные log a совпадают с поштучными для SU(3) и SO(4)."""
        key = StreamKey.named(3, 'batch')
        for spec in (GroupSpec.su(3), GroupSpec('D', 2, basis='quadratic-form')):
            gs = haar_compact(spec, key, size=4)
            log_a, accepted = log_a_batch(gs, spec)
            self.assertTrue(np.all(accepted))
            for g, row in zip(gs, log_a):
                exposed = a_coordinates(g, spec).log_a
                self.assertTrue(np.allclose(exposed, row[:len(exposed)], atol=1e-10))

    def test_batch_rejects_singular(self):
        gs = np.stack([np.eye(2), np.array([[0, 1], [1, 0]])]).astype(complex)
        log_a, accepted = log_a_batch(gs, GroupSpec.su(2))
        self.assertEqual(list(accepted), [True, False])
        self.assertEqual(log_a.shape, (1, 2))


class EstimatorTestCase(SimpleTestCase):
    """
    Оценки и сравнение:
    - среднее и стандартная ошибка,
    - самонормированная взвешенная оценка и ESS,
    - z-критерий и отказ при большой доле отбраковки.
    """

    def test_unweighted_mean(self):
        e = weighted_mean(np.array([1.0, 2.0, 3.0]))
        self.assertAlmostEqual(e.value, 2.0)
        self.assertAlmostEqual(e.stderr, 1.0 / np.sqrt(3.0))
        self.assertEqual(e.ess, 3.0)

    def test_uniform_weights_match_plain_mean(self):
        values = np.array([1.0, 5.0, 2.0, 4.0])
        e = weighted_mean(values, log_w=np.zeros(4))
        self.assertAlmostEqual(e.value, 3.0)
        self.assertAlmostEqual(e.ess, 4.0)

    def test_compare_threshold(self):
        """z = 3 проходит, z = 5 нет."""
        e = EmpiricalCF(value=1.0, stderr=0.1, n_samples=100)
        self.assertTrue(compare(e, 1.3).passed)
        self.assertFalse(compare(e, 1.5).passed)

    def test_compare_zero_stderr(self):
        e = EmpiricalCF(value=1.0, stderr=0.0, n_samples=1)
        self.assertTrue(compare(e, 1.0).passed)
        self.assertFalse(compare(e, 1.0 + 1e-9).passed)

    def test_unreliable_when_many_rejected(self):
        with self.assertRaises(Unreliable):
            check_reliable(EmpiricalCF(value=1.0, stderr=0.0, n_samples=90, n_rejected=10))

    def test_small_ess(self):
        """Один доминирующий вес даёт ESS около 1 и отказ."""
        log_w = np.zeros(1000)
        log_w[0] = 50.0
        with self.assertRaises(Unreliable):
            check_ess(weighted_mean(np.ones(1000), log_w=log_w))


class DiagonalLawTestCase(SimpleTestCase):
    """
    Монте-Карло против замкнутых формул (уменьшенные выборки, порог 4 сигмы):
    - SU(2), SU(3) и SO(4) против конечных c-функций,
    - взвешенный закон SU(2), размерность Вейля и тождество Сельберга.
    """

    def setUp(self):
        """Ключ потока для всех выборок класса."""
        self.seed = 20240101

    def key(self, name):
        return StreamKey.named(self.seed, f'tests/{name}')

    def test_su2_and_su3(self):
        for n, lam in ((2, [0.5, -0.5]), (3, [1.0, -0.6, 0.3])):
            spec = GroupSpec.su(n)
            log_a, rejected = sample_log_a(spec, DRAWS, self.key(f'su{n}'))
            estimate = check_reliable(cf_from_log_a(log_a, lam, n_rejected=rejected))
            verdict = compare(estimate, cfunc.c_finite_A(n, lam))
            self.assertTrue(verdict.passed, verdict)

    def test_so4_quadratic_form(self):
        spec = GroupSpec('D', 2, basis='quadratic-form')
        lam = [0.8, -0.4]
        log_a, rejected = sample_log_a(spec, DRAWS, self.key('so4'))
        verdict = compare(cf_from_log_a(log_a, lam, n_rejected=rejected),
                          cfunc.c_finite_BCD(cfunc.RootSystemSpec('D', 2), lam))
        self.assertTrue(verdict.passed, verdict)

    def test_empirical_cf_symmetry(self):
        """cf(-lambda) сопряжена cf(lambda) на тех же образцах, s = 0 сводит взвешенный закон к обычному."""
        spec = GroupSpec.su(2)
        samples = haar_compact(spec, self.key('symmetry'), size=5000)
        plus = empirical_cf(samples, spec, [0.5, -0.5])
        minus = empirical_cf(samples, spec, [-0.5, 0.5])
        self.assertLess(abs(plus.value - np.conj(minus.value)), 1e-12)
        self.assertLessEqual(abs(plus.value), 1.0 + 4.0 * plus.stderr)
        unweighted = empirical_cf_weighted(samples, spec, [0.5, -0.5], 0.0)
        self.assertLess(abs(unweighted.value - plus.value), 1e-12)
        self.assertTrue(compare(plus, cfunc.c_finite_A(2, [0.5, -0.5])).passed)

    def test_weighted_su2(self):
        """Вес |g_11|^2 при s = 1: (1+s)/(1+s-it)."""
        spec = GroupSpec.su(2)
        samples = haar_compact(spec, self.key('weighted'), size=DRAWS)
        t, s = 0.5, 1.0
        estimate = empirical_cf_weighted(samples, spec, [t, -t], s, r=1)
        verdict = compare(estimate, (1 + s) / (1 + s - 1j * t))
        self.assertTrue(verdict.passed, verdict)

    def test_weyl_dimension(self):
        verdict = weyl_dimension_check(GroupSpec.su(3), self.key('weyl'), draws=DRAWS)
        self.assertTrue(verdict.passed, verdict)
        self.assertAlmostEqual(verdict.reference.real, 1.0 / 3.0)

    def test_selberg(self):
        verdict = selberg_mc_check(2, 0.5, self.key('selberg'), draws=DRAWS)
        self.assertTrue(verdict.passed, verdict)

    def test_haar_invariance(self):
        u = haar_unitary(3, self.key('u'))
        verdicts = haar_invariance_check(GroupSpec.su(3), self.key('invariance'), u, draws=5000)
        self.assertEqual(len(verdicts), 8)
        # порог 4 сигмы: при 8 статистиках ложный отказ практически исключён
        self.assertTrue(all(v.passed for v in verdicts), verdicts)
