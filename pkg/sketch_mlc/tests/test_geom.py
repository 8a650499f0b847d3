"""
Tests for covers, doubling estimates and the bound evaluators
"""
import math
import unittest

import numpy as np

from sketch_mlc.src.geom import (
    BoundInputs,
    CoverResult,
    bound_rhs_1nn,
    bound_rhs_knn,
    covering_curve,
    diameter,
    doubling_dim_estimate,
    greedy_epsilon_cover,
    knn_bayes_factor,
    nested_covers,
    normalize_diameter,
    verify_cover,
)


class TestGreedyCover(unittest.TestCase):

    def test_unit_segment_sizes(self):
        points = np.linspace(0.0, 1.0, 1001)
        for epsilon in (0.5, 0.25, 0.125):
            cover = greedy_epsilon_cover(points, epsilon)
            self.assertLessEqual(cover.size, 2.0 / epsilon)
            self.assertTrue(verify_cover(points, cover))

    def test_scan_order(self):
        cover = greedy_epsilon_cover(np.array([0.0, 0.3, 0.6, 0.9]), 0.5)
        self.assertEqual(cover.center_indices, [0, 2])

    def test_single_point(self):
        cover = greedy_epsilon_cover(np.array([[1.0, 2.0]]), 0.1)
        self.assertEqual(cover.size, 1)
        self.assertTrue(verify_cover(np.array([[1.0, 2.0]]), cover))

    def test_random_plane_points_valid(self):
        points = np.random.default_rng(0).random((500, 2))
        for epsilon in (0.4, 0.2, 0.1):
            cover = greedy_epsilon_cover(points, epsilon)
            self.assertTrue(verify_cover(points, cover))

    def test_embedding_metric(self):
        points = np.random.default_rng(1).standard_normal((200, 3))
        V_hat = np.array([[1.0], [0.0], [0.0]])
        cover = greedy_epsilon_cover(points, 0.5, metric="embedding", V_hat=V_hat)
        self.assertTrue(verify_cover(points, cover, V_hat=V_hat))
        on_line = greedy_epsilon_cover(points[:, :1], 0.5)
        self.assertEqual(cover.center_indices, on_line.center_indices)

    def test_embedding_needs_v_hat(self):
        with self.assertRaises(ValueError):
            greedy_epsilon_cover(np.ones((3, 2)), 0.5, metric="embedding")

    def test_invalid_epsilon(self):
        with self.assertRaises(ValueError):
            greedy_epsilon_cover(np.ones(3), 0.0)

    def test_verify_rejects_bad_cover(self):
        points = np.array([0.0, 1.0])
        cover = CoverResult(epsilon=0.5, center_indices=[0], metric="euclidean", size=1)
        self.assertFalse(verify_cover(points, cover))


class TestCurves(unittest.TestCase):

    def test_segment_doubling_close_to_one(self):
        points = np.linspace(0.0, 1.0, 4097)
        curve = covering_curve(points, [0.25, 0.125, 0.0625, 0.03125])
        estimate = doubling_dim_estimate(curve)
        self.assertAlmostEqual(estimate.slope, 1.0, delta=0.15)

    def test_square_doubling_close_to_two(self):
        side = np.linspace(0.0, 1.0, 81)
        points = np.array([[x, y] for x in side for y in side])
        curve = covering_curve(points, [0.2, 0.1, 0.05])
        self.assertAlmostEqual(doubling_dim_estimate(curve).slope, 2.0, delta=0.4)

    def test_sizes_never_decrease_as_radius_shrinks(self):
        radii = [0.5, 0.45, 0.4, 0.35, 0.3, 0.25]
        for seed in range(300):
            points = np.random.default_rng(seed).random((60, 2))
            sizes = [size for _, size in covering_curve(points, radii)]
            self.assertEqual(sizes, sorted(sizes), seed)

    def test_covers_are_nested_and_valid(self):
        points = np.random.default_rng(57).random((60, 2))
        covers = nested_covers(points, [0.5, 0.45, 0.4, 0.35, 0.3, 0.25])
        for larger, smaller in zip(covers, covers[1:]):
            self.assertEqual(smaller.center_indices[:larger.size], larger.center_indices)
        for cover in covers:
            self.assertTrue(verify_cover(points, cover))

    def test_initial_centers_must_be_separated(self):
        with self.assertRaises(ValueError):
            greedy_epsilon_cover(np.array([0.0, 0.1, 1.0]), 0.5, initial_centers=[0, 1])

    def test_degenerate_curve(self):
        estimate = doubling_dim_estimate([(0.5, 1), (0.25, 1)])
        self.assertEqual(estimate.slope, 0.0)
        self.assertIn("degenerate", estimate.note)

    def test_needs_two_points(self):
        with self.assertRaises(ValueError):
            doubling_dim_estimate([(0.5, 3)])

    def test_epsilons_descending(self):
        with self.assertRaises(ValueError):
            covering_curve(np.ones(3), [0.1, 0.2])


class TestDiameter(unittest.TestCase):

    def test_normalize(self):
        points = np.array([[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]])
        self.assertAlmostEqual(diameter(points), 5.0)
        scaled, scale = normalize_diameter(points)
        self.assertAlmostEqual(scale, 0.2)
        self.assertAlmostEqual(diameter(scaled), 1.0)

    def test_single_point(self):
        scaled, scale = normalize_diameter(np.array([[2.0, 2.0]]))
        self.assertEqual(scale, 1.0)
        np.testing.assert_array_equal(scaled, [[2.0, 2.0]])


class TestBounds(unittest.TestCase):

    def test_1nn_worked_example(self):
        b = BoundInputs(q=1, n=1024, L=1.0, V_frobenius=2.0, D=3.0, bayes_errors=[0.1])
        self.assertAlmostEqual(bound_rhs_1nn(b), 0.2 + 6.0 / 1024 ** 0.25, places=12)
        self.assertAlmostEqual(bound_rhs_1nn(b), 1.2606601717798212, places=12)

    def test_knn_factor_at_eight(self):
        self.assertEqual(knn_bayes_factor(8), 2.0)

    def test_against_direct_formula(self):
        gen = np.random.default_rng(7)
        for _ in range(20):
            q = int(gen.integers(1, 6))
            k = int(gen.integers(1, 20))
            bayes = gen.uniform(0.0, 0.5, size=q).tolist()
            b = BoundInputs(
                q=q,
                n=int(gen.integers(10, 100_000)),
                L=float(gen.uniform(0.0, 5.0)),
                V_frobenius=float(gen.uniform(0.0, 10.0)),
                D=float(gen.uniform(0.5, 8.0)),
                k=k,
                bayes_errors=bayes,
            )
            root = math.pow(b.n, 1.0 / (b.D + 1.0))
            expected_1nn = 2.0 * sum(bayes) + 3.0 * q * b.L * b.V_frobenius / root
            expected_knn = (1.0 + math.sqrt(8.0 / k)) * sum(bayes) + q * (6.0 * b.L * b.V_frobenius + k) / root
            self.assertLessEqual(abs(bound_rhs_1nn(b) - expected_1nn), 1e-12 * abs(expected_1nn))
            self.assertLessEqual(abs(bound_rhs_knn(b) - expected_knn), 1e-12 * abs(expected_knn))

    def test_knn_bound_at_least_bayes_sum(self):
        gen = np.random.default_rng(8)
        for _ in range(50):
            q = int(gen.integers(1, 6))
            bayes = gen.uniform(0.0, 0.5, size=q).tolist()
            b = BoundInputs(
                q=q,
                n=int(gen.integers(10, 100_000)),
                L=float(gen.uniform(0.0, 5.0)),
                V_frobenius=float(gen.uniform(0.0, 10.0)),
                D=float(gen.uniform(0.5, 8.0)),
                k=int(gen.integers(1, 200)),
                bayes_errors=bayes,
            )
            self.assertGreaterEqual(bound_rhs_knn(b), sum(bayes))

    def test_bayes_length_mismatch(self):
        b = BoundInputs(q=2, n=10, L=1.0, V_frobenius=1.0, D=1.0, bayes_errors=[0.1])
        with self.assertRaises(ValueError):
            bound_rhs_1nn(b)

    def test_non_positive_dimension(self):
        b = BoundInputs(q=1, n=10, L=1.0, V_frobenius=1.0, D=0.0, bayes_errors=[0.1])
        with self.assertRaises(ValueError):
            bound_rhs_knn(b)

    def test_bayes_out_of_range(self):
        with self.assertRaises(ValueError):
            BoundInputs(q=1, n=10, L=1.0, V_frobenius=1.0, D=1.0, bayes_errors=[1.5])


if __name__ == "__main__":
    unittest.main()
