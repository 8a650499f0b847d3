"""
Tests for result files and summary tables
"""
import json
import os
import tempfile
import unittest

from sketch_mlc.src.report import (
    CSV_HEADER,
    append_csv_rows,
    compare_with_reference,
    read_csv_rows,
    summary_table,
    write_json,
)


def _row(dataset: str, method: str, m: str, seed: int, hamming: float, f1: float) -> list:
    return [dataset, method, m, "10", str(seed), f"{hamming:.10g}", f"{f1:.10g}", "0.100000", "0.010000"]


class TestCsv(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "out", "results.csv")

    def tearDown(self):
        self.tmp.cleanup()

    def test_header_written_once(self):
        append_csv_rows(self.path, [_row("d", "exact", "", 1, 0.1, 0.5)])
        append_csv_rows(self.path, [_row("d", "exact", "", 2, 0.2, 0.4)])
        with open(self.path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "dataset,method,m,k,seed,hamming,example_f1,fit_s,predict_s")
        self.assertEqual(len(lines), 3)
        self.assertEqual(lines[1], "d,exact,,10,1,0.1,0.5,0.100000,0.010000")

    def test_rejects_wrong_width(self):
        with self.assertRaises(ValueError):
            append_csv_rows(self.path, [["too", "short"]])

    def test_read_back(self):
        append_csv_rows(self.path, [_row("d", "wh", "64", 1, 0.1, 0.5)])
        rows = read_csv_rows(self.path)
        self.assertEqual(list(rows[0].keys()), CSV_HEADER)
        self.assertEqual(rows[0]["m"], "64")


class TestJson(unittest.TestCase):

    def test_sorted_and_indented(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "s.json")
            write_json(path, {"b": 1, "a": [1, 2]})
            with open(path, encoding="utf-8") as f:
                text = f.read()
        self.assertTrue(text.index('"a"') < text.index('"b"'))
        self.assertIn('\n  "a"', text)
        self.assertEqual(json.loads(text), {"a": [1, 2], "b": 1})


def _dicts(rows: list) -> list:
    return [dict(zip(CSV_HEADER, row)) for row in rows]


class TestSummary(unittest.TestCase):

    def test_median_over_seeds(self):
        rows = _dicts([
            _row("d", "gauss", "64", 1, 0.1, 0.5),
            _row("d", "gauss", "64", 2, 0.3, 0.5),
            _row("d", "gauss", "64", 3, 0.2, 0.5),
            _row("d", "exact", "", 1, 0.05, 0.5),
        ])
        table = summary_table(rows, "hamming")
        self.assertIn("gauss@64", table)
        self.assertIn("0.2000", table)
        self.assertIn("0.0500", table)
        self.assertTrue(table.index("exact") < table.index("gauss@64"))

    def test_grid_order_numeric(self):
        rows = _dicts([_row("d", "wh", "512", 1, 0.1, 0.5), _row("d", "wh", "64", 1, 0.1, 0.5)])
        table = summary_table(rows)
        self.assertTrue(table.index("wh@64") < table.index("wh@512"))

    def test_unknown_metric(self):
        with self.assertRaises(ValueError):
            summary_table([], "precision")


class TestReference(unittest.TestCase):

    def test_within_tolerance(self):
        rows = _dicts([
            _row("corel5k", "gauss", "1024", 1, 0.0100, 0.08),
            _row("corel5k", "wh", "256", 1, 0.0104, 0.05),
            _row("corel5k", "knn", "", 1, 0.0095, 0.09),
        ])
        result = compare_with_reference(rows)
        self.assertTrue(result["within_tolerance"])
        self.assertTrue(result["ordering_holds"])
        self.assertEqual(len(result["cells"]), 3)

    def test_outside_tolerance_and_ordering(self):
        rows = _dicts([
            _row("corel5k", "gauss", "1024", 1, 0.0200, 0.0659),
            _row("corel5k", "wh", "256", 1, 0.0103, 0.0539),
            _row("corel5k", "knn", "", 1, 0.0095, 0.0930),
        ])
        result = compare_with_reference(rows)
        self.assertFalse(result["within_tolerance"])
        self.assertFalse(result["ordering_holds"])

    def test_other_dataset_ignored(self):
        result = compare_with_reference(_dicts([_row("toy", "gauss", "1024", 1, 0.0094, 0.0659)]))
        self.assertEqual(result["cells"], [])
        self.assertFalse(result["within_tolerance"])
        self.assertIsNone(result["ordering_holds"])


if __name__ == "__main__":
    unittest.main()
