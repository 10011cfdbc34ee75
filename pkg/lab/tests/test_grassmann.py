import numpy as np
from django.test import SimpleTestCase

from lab.ensembles import StreamKey
from lab.exceptions import KmlabError, Transversality
from lab.grassmann import (GraphCoordinate, MuSDensitySpec, gaussian_schur_sample, gaussian_unscaled_drift,
                           grassmann_logdensity, grassmann_normalization, hill_tail_index, ks_two_sample_check,
                           ks_uniform_check, log_cocycle, logdet_one_plus, mean_trace_check, moebius,
                           mu_s_logdensity, mu_s_sample_weights, project_corner, sample_grassmann_invariant,
                           schur_chain, schur_chain_maps, uniform_reduction)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class GraphChartTestCase(SimpleTestCase):
    """
    Графовая карта грассманиана:
    - плотность и нормировка при M = 1,
    - дробно-линейное действие и коцикл,
    - проекции и отказ при нетрансверсальности.
    """

    def setUp(self):
        """Детерминированный генератор для матриц общего положения."""
        self.rng = np.random.default_rng(17)

    def test_logdet_scalar(self):
        self.assertAlmostEqual(float(logdet_one_plus(np.array([[2.0]]))), np.log(5.0), places=12)

    def test_logdensity_scalar(self):
        """(1 + |z|^2)^{-2-s} при M = 1."""
        z = np.array([[1.0 + 1.0j]])
        self.assertAlmostEqual(float(grassmann_logdensity(z)), -2 * np.log(3.0), places=12)
        self.assertAlmostEqual(float(grassmann_logdensity(z, s=0.5)), -2.5 * np.log(3.0), places=12)

    def test_graph_coordinate(self):
        self.assertEqual(GraphCoordinate(np.zeros((2, 2))).M, 2)
        with self.assertRaises(KmlabError):
            GraphCoordinate(np.array([[np.nan]]))

    def test_normalization(self):
        """2pi int r (1 + r^2)^{-2-s} dr = pi/(1 + s)."""
        for s in (0.0, 0.5, 2.0):
            self.assertAlmostEqual(grassmann_normalization(1, s), np.pi / (1 + s), places=10)
        with self.assertRaises(KmlabError):
            grassmann_normalization(2)

    def test_uniform_reduction_scalar(self):
        self.assertAlmostEqual(float(uniform_reduction(np.array([[2.0]]))), 0.8, places=12)

    def test_cocycle_chain_rule(self):
        """kappa(gh, Z) = kappa(g, h.Z) + kappa(h, Z)."""
        g = random_complex(self.rng, (4, 4))
        h = random_complex(self.rng, (4, 4))
        z = random_complex(self.rng, (2, 2))
        moved = moebius(h, z).Z
        self.assertAlmostEqual(log_cocycle(g @ h, z), log_cocycle(g, moved) + log_cocycle(h, z), places=10)

    def test_moebius_composition(self):
        """(gh).Z = g.(h.Z)."""
        g = random_complex(self.rng, (4, 4))
        h = random_complex(self.rng, (4, 4))
        z = random_complex(self.rng, (2, 2))
        self.assertTrue(np.allclose(moebius(g @ h, z).Z, moebius(g, moebius(h, z).Z).Z, atol=1e-10))

    def test_transversality(self):
        """Перестановка блоков переводит Z = 0 в бесконечность."""
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        with self.assertRaises(Transversality):
            moebius(swap, np.zeros((1, 1)))
        result = moebius(swap, np.zeros((1, 1)), strict=False)
        self.assertTrue(np.all(np.isnan(result.Z)))

    def test_project_corner_bounds(self):
        z = np.zeros((3, 3))
        self.assertEqual(project_corner(z, 2).shape, (2, 2))
        with self.assertRaises(KmlabError):
            project_corner(z, 0)
        with self.assertRaises(KmlabError):
            project_corner(z, 3)


class SamplingTestCase(SimpleTestCase):
    """
    Выборки инвариантной меры и мер mu_s:
    - форма выборок и среднее следа,
    - пороги KS на детерминированных данных,
    - хвостовой индекс Хилла.
    """

    def setUp(self):
        self.key = StreamKey.named(99, 'tests/grassmann')

    def test_sample_shape(self):
        self.assertEqual(sample_grassmann_invariant(2, self.key, size=5).shape, (5, 2, 2))
        self.assertEqual(sample_grassmann_invariant(1, self.key).shape, (1, 1))

    def test_mean_trace(self):
        """E tr(Z*Z (1 + Z*Z)^{-1}) = M/2."""
        verdict = mean_trace_check(1, self.key, draws=20000)
        self.assertTrue(verdict.passed, verdict)

    def test_ks_thresholds(self):
        """Равномерная сетка проходит критерий, квадраты сетки - нет."""
        grid = (np.arange(1000) + 0.5) / 1000
        self.assertTrue(ks_uniform_check(grid)['passed'])
        self.assertFalse(ks_uniform_check(grid ** 2)['passed'])
        self.assertTrue(ks_two_sample_check(grid, grid)['passed'])
        self.assertAlmostEqual(ks_uniform_check(grid)['critical'], 1.63 / np.sqrt(1000))

    def test_hill_tail_index(self):
        """Парето с индексом 2 оценивается с точностью около 0.3."""
        rng = np.random.default_rng(5)
        values = rng.pareto(2.0, 100000) + 1.0
        self.assertAlmostEqual(hill_tail_index(values), 2.0, delta=0.3)

    def test_mu_s_spec_validation(self):
        with self.assertRaises(KmlabError):
            MuSDensitySpec(n=2, r=2)
        with self.assertRaises(KmlabError):
            MuSDensitySpec(n=2, s=-1.0)
        self.assertEqual(MuSDensitySpec(n=2, r=0).block, 3)

    def test_mu_zero_weights_vanish(self):
        gs = sample_grassmann_invariant(4, self.key, size=3)
        self.assertTrue(np.allclose(mu_s_sample_weights(gs, MuSDensitySpec(n=2, s=0.0)), 0.0))

    def test_mu_s_logdensity(self):
        """s = 0: плотность грассманиана с M = 2n, инвариантная при g -> u g v."""
        spec = MuSDensitySpec(n=1, s=0.0)
        self.assertEqual(float(mu_s_logdensity(np.zeros((2, 2)), spec)), 0.0)
        rng = np.random.default_rng(11)
        g = random_complex(rng, (2, 2))
        u, _ = np.linalg.qr(random_complex(rng, (2, 2)))
        v, _ = np.linalg.qr(random_complex(rng, (2, 2)))
        value = float(mu_s_logdensity(g, spec))
        self.assertAlmostEqual(value, float(grassmann_logdensity(g, M=2)), places=12)
        self.assertAlmostEqual(float(mu_s_logdensity(u @ g @ v, spec)), value, places=9)
        with self.assertRaises(KmlabError):
            mu_s_logdensity(np.zeros((3, 3)), spec)


class SchurChainTestCase(SimpleTestCase):
    """Проекция Шура GL(2N) -> GL(2n) и гауссов предел."""

    def test_chain_matches_maps(self):
        """Дополнение Шура совпадает с композицией Pr1, I1, Pr2, I2."""
        g = random_complex(np.random.default_rng(8), (6, 6))
        self.assertTrue(np.allclose(schur_chain(g, 3, 1), schur_chain_maps(g, 3, 1)[-1], atol=1e-10))
        self.assertTrue(np.allclose(schur_chain(g, 3, 2), schur_chain_maps(g, 3, 2)[-1], atol=1e-10))

    def test_chain_validation(self):
        with self.assertRaises(KmlabError):
            schur_chain(np.eye(4), 2, 2)
        with self.assertRaises(KmlabError):
            schur_chain(np.eye(4), 3, 1)

    def test_gaussian_schur_sample_shape(self):
        out = gaussian_schur_sample(1, 4, StreamKey.named(1, 'gauss'), size=10)
        self.assertEqual(out.shape, (10, 2, 2))
        with self.assertRaises(KmlabError):
            gaussian_schur_sample(2, 2, StreamKey.named(1, 'gauss'))

    def test_unscaled_statistic_drifts(self):
        """Без множителя N^{-1/2} статистика монотонно убывает с ростом N."""
        means, monotone = gaussian_unscaled_drift(1, [64, 4, 16], StreamKey.named(3, 'unscaled'), draws=2000)
        self.assertTrue(monotone, means)
        self.assertGreater(means[0], means[-1])
        _, single = gaussian_unscaled_drift(1, [8], StreamKey.named(3, 'unscaled'), draws=10)
        self.assertFalse(single)
