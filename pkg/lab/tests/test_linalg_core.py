import numpy as np
from django.test import SimpleTestCase

from lab.exceptions import KmlabError, RankDeficient, SingularBlock, SingularMinor
from lab.linalg_core import (as_complex_matrix, block_ldu, expm, ldu, leading_minors, leading_minors_batch,
                             qr_unitary, schur_complement)


class LinalgCoreTestCase(SimpleTestCase):
    """
    Тесты плотной линейной алгебры:
    - LDU без перестановок и ведущие миноры,
    - дополнения Шура и блочное LDU,
    - унитарный QR с положительной диагональю R.
    """

    def setUp(self):
        """Случайная комплексная матрица 4 x 4 (общего положения)."""
        rng = np.random.default_rng(7)
        self.m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))

    def test_ldu_reconstructs_matrix(self):
        """l diag(d) u совпадает с исходной матрицей, l и u унитреугольные."""
        f = ldu(self.m)
        self.assertTrue(np.allclose(f.reconstruct(), self.m, atol=1e-12))
        self.assertTrue(np.allclose(np.diag(f.l), 1.0))
        self.assertTrue(np.allclose(np.diag(f.u), 1.0))
        self.assertTrue(np.allclose(np.triu(f.l, 1), 0.0))
        self.assertTrue(np.allclose(np.tril(f.u, -1), 0.0))

    def test_pivots_are_leading_minors(self):
        """Накопленные произведения d равны определителям угловых блоков."""
        f = ldu(self.m)
        expected = [np.linalg.det(self.m[:j, :j]) for j in range(1, 5)]
        self.assertTrue(np.allclose(f.pivots, expected, rtol=1e-10))
        self.assertAlmostEqual(abs(f.det - np.linalg.det(self.m)), 0.0, places=10)

    def test_singular_minor_is_reported(self):
        """Антидиагональная матрица лежит вне верхней страты: SingularMinor(1)."""
        with self.assertRaises(SingularMinor) as ctx:
            ldu([[0, 1], [1, 0]])
        self.assertEqual(ctx.exception.j, 1)

    def test_ldu_two_by_two(self):
        f = ldu([[1, 2], [3, 4]])
        self.assertTrue(np.allclose(f.l, [[1, 0], [3, 1]]))
        self.assertTrue(np.allclose(f.d, [1, -2]))
        self.assertTrue(np.allclose(f.u, [[1, 2], [0, 1]]))

    def test_singular_minor_scales_with_order(self):
        """Минор порядка j сравнивается с tol · s^j, а не отдельный ведущий элемент."""
        with self.assertRaises(SingularMinor) as ctx:
            ldu(np.diag([1e6, 1e-3, 1e-3]))
        self.assertEqual(ctx.exception.j, 3)
        self.assertTrue(np.allclose(ldu(np.diag([1e6, 10.0, 10.0])).d, [1e6, 10.0, 10.0]))

    def test_leading_minors_fallback(self):
        """При нулевом миноре leading_minors считает определители явно."""
        minors = leading_minors([[0, 1], [1, 0]])
        self.assertTrue(np.allclose(minors, [0.0, -1.0]))

    def test_leading_minors_batch_matches_single(self):
        """Векторизованные миноры совпадают с поштучными."""
        stack = np.stack([self.m, self.m.T])
        batch = leading_minors_batch(stack, depth=3)
        self.assertEqual(batch.shape, (2, 3))
        self.assertTrue(np.allclose(batch[0], leading_minors(self.m)[:3]))

    def test_schur_complement_determinant(self):
        """det g = det a11 * det S для разбиения (2, 2)."""
        s = schur_complement(self.m, (2, 2))
        self.assertAlmostEqual(abs(np.linalg.det(self.m[:2, :2]) * np.linalg.det(s) - np.linalg.det(self.m)),
                               0.0, places=10)

    def test_schur_complement_bad_split(self):
        with self.assertRaises(KmlabError):
            schur_complement(self.m, (2, 3))

    def test_block_ldu_reconstructs(self):
        """Блочное LDU с блоками 2 x 2 восстанавливает матрицу."""
        f = block_ldu(self.m, 2)
        self.assertEqual(f.d.shape, (2, 2, 2))
        self.assertTrue(np.allclose(f.reconstruct(), self.m, atol=1e-12))

    def test_block_ldu_singular_block(self):
        """Нулевой угловой блок даёт SingularBlock."""
        swap = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
        with self.assertRaises(SingularBlock):
            block_ldu(swap, 2)

    def test_qr_unitary_positive_diagonal(self):
        """Q унитарна, диагональ R вещественна и положительна, QR = m."""
        q, r = qr_unitary(self.m)
        self.assertTrue(np.allclose(q.conj().T @ q, np.eye(4), atol=1e-12))
        diag = np.diag(r)
        self.assertTrue(np.allclose(diag.imag, 0.0, atol=1e-12))
        self.assertTrue(np.all(diag.real > 0))
        self.assertTrue(np.allclose(q @ r, self.m, atol=1e-12))

    def test_qr_rank_deficient(self):
        with self.assertRaises(RankDeficient):
            qr_unitary(np.zeros((3, 3)))

    def test_expm_of_diagonal(self):
        d = np.diag([0.5j, -0.25])
        self.assertTrue(np.allclose(expm(d), np.diag(np.exp([0.5j, -0.25]))))

    def test_expm_hyperbolic(self):
        """exp([[0, t], [t, 0]]) = [[cosh t, sinh t], [sinh t, cosh t]]."""
        for t in (0.3, 2.0):
            expected = np.array([[np.cosh(t), np.sinh(t)], [np.sinh(t), np.cosh(t)]])
            self.assertTrue(np.allclose(expm([[0, t], [t, 0]]), expected, rtol=1e-12, atol=0))

    def test_expm_commuting_sum(self):
        """exp(a + b) = exp(a) exp(b), если ab = ba (b - многочлен от a)."""
        a = 0.3 * self.m
        b = a @ a - 0.5 * a + 0.2 * np.eye(4)
        self.assertTrue(np.allclose(expm(a + b), expm(a) @ expm(b), rtol=1e-10, atol=1e-12))

    def test_as_complex_matrix_rejects_bad_input(self):
        """Не квадратная матрица и бесконечные элементы отклоняются."""
        with self.assertRaises(KmlabError):
            as_complex_matrix(np.ones((2, 3)))
        with self.assertRaises(KmlabError):
            as_complex_matrix([[np.inf, 0], [0, 1]])
