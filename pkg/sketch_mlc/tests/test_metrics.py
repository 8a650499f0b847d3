"""
Tests for multi-label measures and timing
"""
import time
import unittest

import numpy as np

from sketch_mlc.src.metrics import (
    MetricsReport,
    evaluate,
    example_f1,
    hamming_loss,
    timed,
    zero_one_per_label_error,
)


class TestHammingLoss(unittest.TestCase):

    def test_identical(self):
        Y = np.array([[1, 0, 1], [0, 0, 1]])
        self.assertEqual(hamming_loss(Y, Y), 0.0)

    def test_complement(self):
        Y = np.array([[1, 0, 1], [0, 0, 1]])
        self.assertEqual(hamming_loss(Y, 1 - Y), 1.0)

    def test_fraction(self):
        truth = np.array([[1, 0], [0, 0]])
        pred = np.array([[1, 1], [0, 0]])
        self.assertEqual(hamming_loss(truth, pred), 0.25)

    def test_shape_mismatch(self):
        with self.assertRaises(ValueError):
            hamming_loss(np.zeros((2, 3)), np.zeros((3, 2)))

    def test_non_binary(self):
        with self.assertRaises(ValueError):
            hamming_loss(np.array([[2]]), np.array([[1]]))


class TestExampleF1(unittest.TestCase):

    def test_perfect(self):
        Y = np.array([[1, 0, 1], [0, 1, 0]])
        self.assertEqual(example_f1(Y, Y), 1.0)

    def test_partial_overlap(self):
        truth = np.array([[1, 1, 0, 0]])
        pred = np.array([[1, 0, 1, 0]])
        self.assertAlmostEqual(example_f1(truth, pred), 0.5)

    def test_both_empty_convention(self):
        truth = np.array([[0, 0], [1, 0]])
        pred = np.array([[0, 0], [0, 1]])
        self.assertAlmostEqual(example_f1(truth, pred), 0.5)
        self.assertAlmostEqual(example_f1(truth, pred, empty_score=0.0), 0.0)

    def test_one_side_empty(self):
        self.assertEqual(example_f1(np.array([[1, 0]]), np.array([[0, 0]])), 0.0)


class TestInvariance(unittest.TestCase):

    def setUp(self):
        gen = np.random.default_rng(2)
        self.truth = (gen.random((40, 5)) < 0.3).astype(np.uint8)
        self.pred = (gen.random((40, 5)) < 0.3).astype(np.uint8)

    def test_hamming_symmetric(self):
        self.assertEqual(hamming_loss(self.truth, self.pred), hamming_loss(self.pred, self.truth))

    def test_row_permutation(self):
        perm = np.random.default_rng(3).permutation(40)
        self.assertEqual(hamming_loss(self.truth[perm], self.pred[perm]), hamming_loss(self.truth, self.pred))
        self.assertAlmostEqual(
            example_f1(self.truth[perm], self.pred[perm]), example_f1(self.truth, self.pred), places=12
        )


class TestPerLabel(unittest.TestCase):

    def test_per_label_error(self):
        truth = np.array([[1, 0], [1, 1], [0, 0], [0, 1]])
        pred = np.array([[1, 1], [0, 1], [0, 1], [0, 1]])
        np.testing.assert_allclose(zero_one_per_label_error(truth, pred), [0.25, 0.5])


class TestTiming(unittest.TestCase):

    def test_timed_returns_result_and_seconds(self):
        result, seconds = timed(lambda: time.sleep(0.01) or 42)
        self.assertEqual(result, 42)
        self.assertGreaterEqual(seconds, 0.009)


class TestReport(unittest.TestCase):

    def test_evaluate_and_csv_row(self):
        truth = np.array([[1, 0], [0, 1]])
        pred = np.array([[1, 0], [1, 1]])
        report = evaluate(truth, pred, fit_seconds=0.5, predict_seconds=0.25)
        self.assertIsInstance(report, MetricsReport)
        self.assertEqual(report.hamming_loss, 0.25)
        row = report.to_csv_row("toy", "exact", None, 10, 42)
        self.assertEqual(row[:5], ["toy", "exact", "", "10", "42"])
        self.assertEqual(row[5], "0.25")
        self.assertEqual(row[7:], ["0.500000", "0.250000"])

    def test_evaluate_passes_empty_score(self):
        truth = np.zeros((2, 3), dtype=np.uint8)
        truth[0, 0] = 1
        pred = truth.copy()
        self.assertEqual(evaluate(truth, pred, 0.0, 0.0).example_f1, 1.0)
        self.assertEqual(evaluate(truth, pred, 0.0, 0.0, empty_score=0.0).example_f1, 0.5)

    def test_csv_row_with_sketch_size(self):
        report = MetricsReport(
            hamming_loss=0.1, example_f1=0.2, fit_seconds=0.0, predict_seconds=0.0, n_test=1, q=1
        )
        self.assertEqual(report.to_csv_row("d", "wh", 256, 10, 1)[2], "256")


if __name__ == "__main__":
    unittest.main()
