import numpy as np
from django.test import SimpleTestCase

from lab.ensembles import (GroupSpec, StreamKey, abelian_loop_sample, bounded_statistics, form_gram,
                           form_transpose, ginibre, haar_compact, haar_orthogonal, haar_special_unitary,
                           haar_symplectic, haar_unitary, product_measure_sample, scaled_su, su2_exp, su2_log,
                           su2_loop_sample, symplectic_form)
from lab.exceptions import KmlabError
from lab.parallel import chunk_sizes, map_chunks


class StreamKeyTestCase(SimpleTestCase):
    """
    Детерминированность потоков случайных чисел:
    - одинаковые (seed, stream, index) дают одинаковые выборки,
    - разные имена и индексы дают разные потоки,
    - результат map_chunks не зависит от числа потоков.
    """

    def test_same_key_same_sample(self):
        key = StreamKey.named(11, 'weyl-dim/su2')
        self.assertTrue(np.array_equal(haar_unitary(3, key, index=2), haar_unitary(3, key, index=2)))

    def test_different_index_and_name(self):
        key = StreamKey.named(11, 'a')
        self.assertFalse(np.array_equal(ginibre(2, 1.0, key, index=0), ginibre(2, 1.0, key, index=1)))
        self.assertNotEqual(StreamKey.named(11, 'a').stream, StreamKey.named(11, 'b').stream)
        self.assertNotEqual(key.child('x').stream, key.child('y').stream)

    def test_chunk_sizes(self):
        self.assertEqual(chunk_sizes(10, 4), [4, 4, 2])
        self.assertEqual(chunk_sizes(8, 4), [4, 4])

    def test_map_chunks_thread_independent(self):
        """Одни и те же порции на 1 и 4 потоках дают побитово одинаковый результат."""
        key = StreamKey.named(5, 'chunks')

        def func(index, size):
            return ginibre(2, 2.0, key, index=index, size=size)

        single = np.concatenate(map_chunks(func, 1000, chunk_size=64, threads=1))
        pooled = np.concatenate(map_chunks(func, 1000, chunk_size=64, threads=4))
        self.assertEqual(single.shape, (1000, 2, 2))
        self.assertTrue(np.array_equal(single, pooled))


class HaarSamplersTestCase(SimpleTestCase):
    """
    Генераторы мер Хаара и гауссовых мер:
    - принадлежность выборок группе,
    - дисперсия элементов Жинибра,
    - базис квадратичной формы.
    """

    def setUp(self):
        """Общий ключ потока для всех генераторов."""
        self.key = StreamKey.named(2024, 'ensembles')

    def test_special_unitary(self):
        g = haar_special_unitary(3, self.key, size=5)
        self.assertTrue(np.allclose(g.conj().swapaxes(-1, -2) @ g, np.eye(3), atol=1e-12))
        self.assertTrue(np.allclose(np.linalg.det(g), 1.0, atol=1e-12))

    def test_orthogonal_determinant(self):
        g = haar_orthogonal(4, self.key, size=5)
        self.assertTrue(np.allclose(g.swapaxes(-1, -2) @ g, np.eye(4), atol=1e-12))
        self.assertTrue(np.allclose(np.linalg.det(g), 1.0, atol=1e-12))

    def test_symplectic_preserves_form(self):
        """g^T J g = J и g унитарна."""
        g = haar_symplectic(2, self.key, size=3)
        j = symplectic_form(2)
        self.assertTrue(np.allclose(g.swapaxes(-1, -2) @ j @ g, j, atol=1e-12))
        self.assertTrue(np.allclose(g.conj().swapaxes(-1, -2) @ g, np.eye(4), atol=1e-12))

    def test_quadratic_form_gram(self):
        """Грам-матрица формы для SO(4) - единицы на побочной диагонали."""
        spec = GroupSpec('D', 2, basis='quadratic-form')
        self.assertTrue(np.allclose(form_gram(spec), np.fliplr(np.eye(4)), atol=1e-12))

    def test_compact_in_form_basis_preserves_form(self):
        """g^T S g = S для SO(5) в базисе квадратичной формы."""
        spec = GroupSpec('B', 2, basis='quadratic-form')
        s = form_gram(spec)
        g = haar_compact(spec, self.key, size=3)
        self.assertTrue(np.allclose(g.swapaxes(-1, -2) @ s @ g, s, atol=1e-12))

    def test_form_transpose_inverts(self):
        """g^t g = 1 для транспонирования относительно формы."""
        spec = GroupSpec('B', 2, basis='quadratic-form')
        g = haar_compact(spec, self.key, size=3)
        self.assertTrue(np.allclose(form_transpose(g, spec) @ g, np.eye(5), atol=1e-10))

    def test_scaled_su_variance(self):
        """Строки унитарны, поэтому средний |g_ij|^2 равен 1/beta точно."""
        g = scaled_su(4, 2.0, self.key, size=10)
        self.assertAlmostEqual(float(np.mean(np.abs(g) ** 2)), 0.5, places=12)
        with self.assertRaises(KmlabError):
            scaled_su(4, 0.0, self.key)

    def test_ginibre_variance(self):
        """E|g_ij|^2 = 2/beta."""
        g = ginibre(2, 1.0, self.key, size=20000)
        self.assertAlmostEqual(float(np.mean(np.abs(g) ** 2)), 2.0, delta=0.05)

    def test_group_spec_validation(self):
        with self.assertRaises(KmlabError):
            GroupSpec('E', 6)
        self.assertEqual(GroupSpec.su(3).label, 'SU(3)')
        self.assertEqual(GroupSpec('C', 2).size, 4)

    def test_product_measure_rejects_increasing_weights(self):
        with self.assertRaises(KmlabError):
            product_measure_sample([0.5, 1.0], 1, self.key)

    def test_bounded_statistics_shape(self):
        g = haar_unitary(3, self.key, size=7)
        stats = bounded_statistics(g)
        self.assertEqual(stats.shape, (7, 8))
        self.assertTrue(np.all(np.abs(stats) <= 1.0 + 1e-12))


class LoopSamplersTestCase(SimpleTestCase):
    """Абелевы гауссовы петли и дискретизированные петли в SU(2)."""

    def setUp(self):
        self.key = StreamKey.named(2024, 'loops')

    def test_abelian_mode_variance(self):
        """E|x_n|^2 = 1/(beta n^2)."""
        x = abelian_loop_sample(2.0, 3, self.key, size=20000)
        self.assertEqual(x.shape, (20000, 3))
        for n in (1, 2, 3):
            self.assertAlmostEqual(float(np.mean(np.abs(x[:, n - 1]) ** 2)) * 2.0 * n * n, 1.0, delta=0.05)

    def test_su2_log_inverts_exp(self):
        v = np.array([0.3, -0.2, 0.5])
        self.assertTrue(np.allclose(su2_log(su2_exp(v)), v, atol=1e-12))

    def test_su2_loop_values(self):
        """Петля начинается в единице и лежит в SU(2)."""
        values = su2_loop_sample(4.0, 64, self.key)
        self.assertEqual(values.shape, (64, 2, 2))
        self.assertTrue(np.allclose(values[0], np.eye(2), atol=1e-12))
        self.assertTrue(np.allclose(values.conj().swapaxes(-1, -2) @ values, np.eye(2), atol=1e-10))
        self.assertTrue(np.allclose(np.linalg.det(values), 1.0, atol=1e-10))

    def test_abelian_loop_is_diagonal(self):
        values = su2_loop_sample(4.0, 32, self.key, abelian=True)
        self.assertTrue(np.allclose(values[:, 0, 1], 0.0))
        self.assertTrue(np.allclose(values[:, 1, 0], 0.0))
