import numpy as np
from django.test import SimpleTestCase
from scipy import integrate

from lab import cfunc
from lab.ensembles import StreamKey
from lab.exceptions import ClampViolation, KmlabError, OffStratum
from lab.looptoeplitz import (LoopFourier, birkhoff_factor, birkhoff_residual, det2_weight, g0_law_probe,
                              g0_target_density, gaussian_shift_closed, gaussian_shift_lp, haar_class_integral,
                              hankel_trace_identity_check, heat_convolution, heat_kernel_su2, In_closed_form,
                              In_difference, In_kernel, In_telescoping_sum, multiply, normal_abs_moment,
                              nu_beta_k_logweight, partition_constant_mc, regularized_energy, szego_check,
                              szego_ladder, toeplitz_product_defect_rank, toeplitz_truncate, total_variation)


def scalar_loop(coeffs):
    return LoopFourier.trig_polynomial({k: np.array([[v]]) for k, v in coeffs.items()})


class ToeplitzTruncationTestCase(SimpleTestCase):
    """
    Тёплицевы и ганкелевы усечения петель:
    - сдвиги e^{i theta}, e^{-i theta} и единичная петля,
    - след C*C против суммы n |ghat(-n)|^2,
    - дефект произведения и восстановление коэффициентов по значениям.
    """

    def test_identity_loop(self):
        loop = LoopFourier(coeffs=np.eye(2)[None])
        self.assertTrue(np.allclose(toeplitz_truncate(loop, 3).matrix, np.eye(6)))
        self.assertEqual(det2_weight(loop, 4, 2.0), 1.0)

    def test_forward_shift(self):
        """A*A для e^{i theta} - единица на первых M-1 местах и ноль в последнем."""
        a = toeplitz_truncate(scalar_loop({1: 1.0}), 5).matrix
        gram = a.conj().T @ a
        self.assertTrue(np.allclose(gram[:4, :4], np.eye(4)))
        self.assertEqual(gram[4, 4], 0.0)

    def test_backward_shift(self):
        """A*A для e^{-i theta} равна 1 - e_0 e_0*."""
        a = toeplitz_truncate(scalar_loop({-1: 1.0}), 5).matrix
        expected = np.eye(5)
        expected[0, 0] = 0.0
        self.assertTrue(np.allclose(a.conj().T @ a, expected))

    def test_hankel_trace_matrix_coefficient(self):
        loop = LoopFourier.trig_polynomial({-1: np.eye(2) / np.sqrt(2), 0: np.zeros((2, 2))})
        result = hankel_trace_identity_check(loop, 1)
        self.assertAlmostEqual(result['trace'], 1.0)
        self.assertAlmostEqual(result['negative_sum'], 1.0)
        self.assertTrue(result['exact'])

    def test_hankel_trace_random_polynomial(self):
        """Для M >= K тождество точное, зеркальная сумма отличается."""
        rng = np.random.default_rng(1)
        coeffs = 0.5 * (rng.standard_normal((9, 2, 2)) + 1j * rng.standard_normal((9, 2, 2)))
        loop = LoopFourier(coeffs=coeffs)
        for M in (4, 8):
            result = hankel_trace_identity_check(loop, M)
            self.assertLess(result['gap'], 1e-10)
        self.assertGreater(abs(result['mirrored_sum'] - result['negative_sum']), 1e-6)

    def test_from_samples(self):
        rng = np.random.default_rng(2)
        coeffs = rng.standard_normal(7) + 1j * rng.standard_normal(7)
        loop = LoopFourier(coeffs=coeffs)
        values = loop.evaluate(2 * np.pi * np.arange(16) / 16)
        self.assertTrue(np.allclose(LoopFourier.from_samples(values, K=3).coeffs, loop.coeffs))

    def test_multiply(self):
        product = multiply(scalar_loop({1: 1.0}), scalar_loop({-1: 1.0}))
        self.assertAlmostEqual(complex(product.coeff(0)[0, 0]), 1.0)
        self.assertTrue(np.allclose(product.coeff(1), 0.0))

    def test_product_defect(self):
        """Для аналитических g, h дефект нулевой, в общем случае ранг <= 2NK."""
        rng = np.random.default_rng(4)
        g = LoopFourier.trig_polynomial({0: np.eye(2), 1: rng.standard_normal((2, 2))})
        h = LoopFourier.trig_polynomial({0: np.eye(2), 2: rng.standard_normal((2, 2))})
        self.assertEqual(toeplitz_product_defect_rank(g, h, 8), 0)
        general = LoopFourier(coeffs=rng.standard_normal((5, 2, 2)))
        self.assertLessEqual(toeplitz_product_defect_rank(general, general, 8), 2 * 2 * 2)


class Det2AndSzegoTestCase(SimpleTestCase):
    """Регуляризованный определитель, формула Сегё и статсумма."""

    def test_det2_validation(self):
        loop = scalar_loop({-1: 0.5, 0: 0.5})
        self.assertEqual(det2_weight(loop, 4, 0.0), 1.0)
        with self.assertRaises(KmlabError):
            det2_weight(loop, 4, -1.0)

    def test_clamp_violation(self):
        """|C|^2 > 1 для неунитарной петли: ClampViolation."""
        with self.assertRaises(ClampViolation):
            det2_weight(scalar_loop({-1: 2.0, 0: 0.0}), 1, 1.0)

    def test_szego_trivial_loop(self):
        result = szego_check([0.0], 1, 8)
        self.assertAlmostEqual(result['estimate'], 1.0)
        self.assertAlmostEqual(result['reference'], 1.0)

    def test_szego_single_mode(self):
        """det(1 - C*C) = exp(-sum n |x_n|^2)."""
        result = szego_check([0.3, 0.2], 1, 64)
        self.assertAlmostEqual(result['reference'], np.exp(-(0.09 + 2 * 0.04)))
        self.assertLess(result['gap'], 1e-8)

    def test_szego_ladder(self):
        rows, monotone = szego_ladder([0.3], 2, ladder=(8, 16, 32))
        self.assertEqual([row['M'] for row in rows], [8, 16, 32])
        self.assertTrue(monotone)

    def test_logweight(self):
        """k = 0 даёт нулевой вес; log det2 <= 0 ограничивает вес сверху."""
        loop = scalar_loop({-1: 0.3, 0: 0.5, 1: 0.2})
        self.assertEqual(nu_beta_k_logweight(loop, 1.0, 0), 0.0)
        centering = np.zeros(4)
        bound = -2.0 * regularized_energy(loop, centering, 4)
        self.assertLessEqual(nu_beta_k_logweight(loop, 1.0, 2, centering=centering, M=4), bound + 1e-12)

    def test_partition_constant(self):
        verdict = partition_constant_mc(1.0, 1.0, 8, 20000, StreamKey.named(5, 'tests/partition'))
        self.assertTrue(verdict.passed, verdict)
        self.assertAlmostEqual(verdict.reference.real, cfunc.partition_Z_product(1.0, 1.0, 8, tail_correction=False))


class KernelTestCase(SimpleTestCase):
    """
    Ядро I_n(delta), гауссов сдвиг в L^p и тепловое ядро SU(2).
    """

    def test_In_first_term(self):
        self.assertAlmostEqual(In_kernel(1, 0.4), 1 - 0.4 / np.pi, places=10)

    def test_In_closed_form(self):
        for n, delta in ((5, 0.3), (12, 1.0)):
            self.assertAlmostEqual(In_kernel(n, delta), In_closed_form(n, delta), places=10)

    def test_In_difference(self):
        delta = 0.5
        gap = In_kernel(3, delta) - In_kernel(4, delta)
        self.assertAlmostEqual(gap, In_difference(3, delta), places=9)
        self.assertNotAlmostEqual(In_difference(3, delta, printed=True), In_difference(3, delta), places=3)

    def test_In_validation(self):
        with self.assertRaises(KmlabError):
            In_kernel(3, 0.0)

    def test_telescoping_bound(self):
        for delta in (1e-3, 0.1, 1.0, 2.0):
            self.assertLessEqual(In_telescoping_sum(delta), 3.0)

    def test_gaussian_shift_p2(self):
        """p = 2: e^{s^2} - 1."""
        s = 0.7
        self.assertAlmostEqual(gaussian_shift_lp(s, 2) / np.expm1(s * s), 1.0, places=9)
        self.assertAlmostEqual(gaussian_shift_closed(s, 2), np.expm1(s * s), places=12)
        self.assertEqual(gaussian_shift_lp(0.0, 2), 0.0)

    def test_gaussian_shift_small_s(self):
        """Отношение к s^p стремится к E|t|^p."""
        s = 1e-3
        self.assertAlmostEqual(gaussian_shift_lp(s, 1) / s, np.sqrt(2 / np.pi), delta=1e-4)
        self.assertAlmostEqual(normal_abs_moment(2), 1.0)
        with self.assertRaises(KmlabError):
            gaussian_shift_closed(s, 3)
        with self.assertRaises(KmlabError):
            gaussian_shift_lp(s, 0.5)

    def test_heat_kernel_mass(self):
        self.assertAlmostEqual(haar_class_integral(lambda th: heat_kernel_su2(0.5, th)), 1.0, places=8)
        self.assertTrue(np.isfinite(heat_kernel_su2(0.5, 0.0)))
        with self.assertRaises(KmlabError):
            heat_kernel_su2(0.0, 1.0)

    def test_heat_semigroup(self):
        self.assertAlmostEqual(heat_convolution(0.5, 0.5, 1.0), heat_kernel_su2(1.0, 1.0), delta=1e-6)


class BirkhoffTestCase(SimpleTestCase):
    """Усечённое разложение Биркгофа и зонд закона g0."""

    def test_analytic_loop(self):
        """Для g = 1 + a e^{i theta} множитель g_- единичный, g_0 = 1."""
        loop = LoopFourier.trig_polynomial({0: np.eye(2), 1: np.array([[0.3, 0.1], [0.0, 0.2]])})
        factors = birkhoff_factor(loop, 8)
        self.assertTrue(np.allclose(factors.minus[0], np.eye(2)))
        self.assertTrue(np.allclose(factors.minus[1:], 0.0))
        self.assertTrue(np.allclose(factors.g0, np.eye(2)))
        self.assertLess(birkhoff_residual(loop, 8), 1e-10)

    def test_abelian_split(self):
        """exp(c e^{-i theta} + d e^{i theta}): ghat_-(-j) = c^j/j!, ghat_+(j) = d^j/j!."""
        c, d = 0.5, 0.3
        theta = 2 * np.pi * np.arange(256) / 256
        loop = LoopFourier.from_samples(np.exp(c * np.exp(-1j * theta) + d * np.exp(1j * theta)), K=40)
        factors = birkhoff_factor(loop, 32)
        j = np.arange(6)
        factorial = np.cumprod(np.concatenate([[1.0], np.arange(1, 6)]))
        self.assertTrue(np.allclose(factors.minus[:6, 0, 0], c ** j / factorial, atol=1e-8))
        self.assertTrue(np.allclose(factors.plus[:6, 0, 0], d ** j / factorial, atol=1e-8))
        self.assertAlmostEqual(complex(factors.g0[0, 0]), 1.0, places=8)

    def test_off_stratum(self):
        with self.assertRaises(OffStratum):
            birkhoff_factor(scalar_loop({1: 1.0}), 4)

    def test_g0_target_density(self):
        value, _ = integrate.quad(g0_target_density, 2, np.inf)
        self.assertAlmostEqual(value, 1.0, places=6)
        self.assertEqual(float(g0_target_density(1.5)), 0.0)

    def test_g0_law_probe(self):
        result = g0_law_probe(8.0, 1, 6, 4, StreamKey.named(3, 'tests/g0'), centering_draws=4, steps=64)
        self.assertEqual(len(result['edges']), 21)
        self.assertEqual(len(result['mass']), 20)
        self.assertAlmostEqual(sum(result['target']), 1.0, places=6)
        self.assertAlmostEqual(sum(result['mass']), 1.0)
        self.assertEqual(total_variation(result['mass'], result['mass']), 0.0)
