"""
Tests for width estimators, sketch-size recommendations and δ-optimality
"""
import math
import unittest

import numpy as np

from sketch_mlc.src.data import SyntheticSpec, gen_planted_linear
from sketch_mlc.src.sketch import build_sketch
from sketch_mlc.src.theory import (
    DeltaReport,
    calibrate_c1,
    delta_optimality_check,
    gaussian_width_mc,
    rademacher_width_mc,
    recommend_sketch_size,
    recommend_sketch_size_walsh_hadamard,
    remark_bound_holds,
    s_gaussian_width_mc,
)

CHI4_MEAN = math.sqrt(2.0) * math.gamma(2.5) / math.gamma(2.0)


def _planted(n: int, p: int, q: int, seed: int = 42):
    data = gen_planted_linear(SyntheticSpec(n=n, p=p, q=q, noise_sigma=0.5, seed=seed))
    return data.dataset.to_dense(), data.dataset.labels.astype(np.float64)


class TestWidths(unittest.TestCase):
    """Monte-Carlo widths against chi means"""

    def test_gaussian_width_rank_one(self):
        B = np.zeros((8, 1))
        B[3, 0] = 1.0
        estimate = gaussian_width_mc(B, 100_000, seed=1)
        self.assertAlmostEqual(estimate.mean, math.sqrt(2.0 / math.pi), delta=0.01)
        self.assertEqual(estimate.kind, "gaussian")
        self.assertEqual(estimate.samples, 100_000)

    def test_gaussian_width_rank_four(self):
        B = np.eye(8)[:, :4]
        estimate = gaussian_width_mc(B, 100_000, seed=2)
        self.assertAlmostEqual(estimate.mean, CHI4_MEAN, delta=0.02)
        self.assertLess(estimate.std_error, 0.01)

    def test_rademacher_width_of_coordinate_axis(self):
        B = np.eye(5)[:, :1]
        # |<w, e_1>| = 1 for every sign vector
        estimate = rademacher_width_mc(B, 1000, seed=3)
        self.assertEqual(estimate.mean, 1.0)
        self.assertEqual(estimate.std_error, 0.0)

    def test_gaussian_width_grows_with_rank(self):
        means = [gaussian_width_mc(np.eye(64)[:, :r], 2000, seed=3).mean for r in (1, 2, 4, 8, 16, 32)]
        self.assertEqual(means, sorted(means))

    def test_rademacher_width_of_whole_space(self):
        # every sign vector has norm sqrt(n)
        estimate = rademacher_width_mc(np.eye(49), 50, seed=4)
        self.assertAlmostEqual(estimate.mean, 7.0, places=12)

    def test_rejects_non_orthonormal_basis(self):
        with self.assertRaises(ValueError):
            gaussian_width_mc(np.ones((4, 2)), 10)

    def test_s_gaussian_width_full_walsh_hadamard(self):
        # an orthogonal S leaves ||(SB)'g|| distributed as chi_r
        B = np.eye(16)[:, :4]
        estimate = s_gaussian_width_mc(B, "wh", 16, 4000, seed=4)
        self.assertAlmostEqual(estimate.mean, CHI4_MEAN, delta=0.05)

    def test_s_gaussian_rejects_large_m(self):
        with self.assertRaises(ValueError):
            s_gaussian_width_mc(np.eye(4)[:, :1], "gauss", 8, 10)


class TestRecommendations(unittest.TestCase):

    def test_formula(self):
        self.assertEqual(recommend_sketch_size(10.0, 0.5, 1.0), 400)
        self.assertEqual(recommend_sketch_size(3.0, 0.3, 2.0), math.ceil((2.0 / 0.3) ** 2 * 9.0))

    def test_grows_as_delta_shrinks(self):
        sizes = [recommend_sketch_size(5.0, d, 1.0) for d in (0.9, 0.5, 0.25, 0.1)]
        self.assertEqual(sizes, sorted(sizes))
        self.assertLess(sizes[0], sizes[-1])

    def test_walsh_hadamard_formula(self):
        expected = math.ceil(4.0 * (2.0 + math.sqrt(6.0 * 10.0)) ** 2 * 9.0)
        self.assertEqual(recommend_sketch_size_walsh_hadamard(3.0, 2.0, 1024, 0.5, 1.0), expected)

    def test_invalid_delta(self):
        for delta in (0.0, 1.0, -0.2):
            with self.assertRaises(ValueError):
                recommend_sketch_size(1.0, delta)


class TestDeltaOptimality(unittest.TestCase):

    def test_orthogonal_sketch_is_exact(self):
        X, Y = _planted(256, 8, 3)
        report = delta_optimality_check(X, Y, build_sketch("wh", 256, 256, seed=1))
        self.assertLessEqual(report.delta_emp, 1e-8)
        self.assertTrue(report.sandwich(0.01))

    def test_report_fields(self):
        X, Y = _planted(512, 8, 2)
        report = delta_optimality_check(X, Y, build_sketch("gauss", 128, 512, seed=2))
        self.assertGreater(report.f_star, 0.0)
        self.assertAlmostEqual(report.delta_emp, abs(report.g_hat - report.f_star) / report.f_star)
        self.assertEqual((report.m, report.seed), (128, 2))
        self.assertFalse(report.zero_residual)

    def test_zero_residual_flagged(self):
        gen = np.random.default_rng(0)
        X = gen.standard_normal((64, 3))
        Y = X @ np.array([[1.0], [2.0], [-1.0]])
        report = delta_optimality_check(X, Y, build_sketch("gauss", 16, 64, seed=1))
        self.assertTrue(report.zero_residual)
        self.assertIsNone(report.delta_emp)

    def test_sandwich(self):
        report = DeltaReport(f_star=10.0, g_hat=14.0, delta_emp=0.4, m=1, variant="x", seed=0)
        self.assertTrue(report.sandwich(0.5))
        self.assertFalse(report.sandwich(0.3))

    def test_remark_bound(self):
        X, Y = _planted(300, 5, 2)
        for variant in ("gauss", "rademacher", "wh"):
            self.assertTrue(remark_bound_holds(X, Y, build_sketch(variant, 32, 300, seed=3)))


class TestSandwichFrequency(unittest.TestCase):
    """Planted data n=4096, p=64, q=8, noise 0.5"""

    @classmethod
    def setUpClass(cls):
        cls.X, cls.Y = _planted(4096, 64, 8)

    def test_sandwich_holds_for_most_seeds(self):
        hits = 0
        for seed in range(50):
            report = delta_optimality_check(self.X, self.Y, build_sketch("gauss", 1024, 4096, seed=seed))
            hits += report.sandwich(0.5)
        self.assertGreaterEqual(hits, 45)

    def test_median_delta_non_increasing(self):
        medians = []
        for m in (64, 128, 256, 512, 1024):
            values = [
                delta_optimality_check(self.X, self.Y, build_sketch("gauss", m, 4096, seed=s)).delta_emp
                for s in range(10)
            ]
            medians.append(float(np.median(values)))
        for larger, smaller in zip(medians, medians[1:]):
            self.assertLessEqual(smaller, larger)

    def test_median_delta_small_at_1024(self):
        values = [
            delta_optimality_check(self.X, self.Y, build_sketch("gauss", 1024, 4096, seed=s)).delta_emp
            for s in range(20)
        ]
        self.assertLessEqual(float(np.median(values)), 0.5)


class TestCalibration(unittest.TestCase):

    def test_calibrate_c1(self):
        X, Y = _planted(1024, 8, 2)
        result = calibrate_c1(X, Y, "gauss", 0.5, [16, 64, 256, 2048], seeds=range(10), width=3.0)
        self.assertNotIn(2048, result.fractions)
        self.assertEqual(result.smallest_m, min(m for m, f in result.fractions.items() if f >= 0.9))
        self.assertAlmostEqual(result.implied_c1, 0.5 * math.sqrt(result.smallest_m) / 3.0)


if __name__ == "__main__":
    unittest.main()
