"""
Result files and summary tables

CSV rows follow a fixed header that downstream plotting relies on; a row is
appended only when its grid cell completed.
"""
import csv
import json
import logging
import os
import statistics
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from tabulate import tabulate

from .utils import ensure_parent_directory

logger = logging.getLogger(__name__)

CSV_HEADER = ["dataset", "method", "m", "k", "seed", "hamming", "example_f1", "fit_s", "predict_s"]
TIMING_COLUMNS = ("fit_s", "predict_s")

# Published corel5k results at k=10: (method, m) -> (hamming, example_f1, train seconds)
COREL5K_REFERENCE: Dict[Tuple[str, Optional[int]], Tuple[float, float, float]] = {
    ("knn", None): (0.0095, 0.0930, 0.678),
    ("gauss", 256): (0.0095, 0.0475, 0.196),
    ("gauss", 512): (0.0095, 0.0446, 0.218),
    ("gauss", 1024): (0.0094, 0.0659, 0.366),
    ("wh", 256): (0.0103, 0.0539, 0.119),
    ("wh", 512): (0.0102, 0.0817, 0.197),
    ("wh", 1024): (0.0099, 0.0902, 0.239),
}
HAMMING_TOLERANCE = 0.002
EXAMPLE_F1_TOLERANCE = 0.04


def append_csv_rows(path: str, rows: Iterable[Sequence[str]]) -> int:
    """
    Append rows, writing the header first when the file is new

    Returns:
        Number of rows written
    """
    ensure_parent_directory(path)
    new_file = not os.path.exists(path) or os.path.getsize(path) == 0
    written = 0
    with open(path, "a", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if new_file:
            writer.writerow(CSV_HEADER)
        for row in rows:
            if len(row) != len(CSV_HEADER):
                raise ValueError(f"CSV row has {len(row)} fields, header has {len(CSV_HEADER)}")
            writer.writerow(row)
            written += 1
    return written


def read_csv_rows(path: str) -> List[Dict[str, str]]:
    """Rows of a results CSV as dicts"""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return list(reader)


def write_json(path: str, payload: Any) -> None:
    """Write a JSON document (indent 2, sorted keys)"""
    ensure_parent_directory(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _column_label(method: str, m: str) -> str:
    return method if not m else f"{method}@{m}"


def _grid_sort_key(label: str) -> Tuple[str, int]:
    method, _, m = label.partition("@")
    return method, int(m) if m else -1


def median_by_cell(rows: Sequence[Dict[str, str]], metric: str) -> Dict[Tuple[str, str], float]:
    """Median of one CSV column per (dataset, method@m) over seeds"""
    cells: Dict[Tuple[str, str], List[float]] = {}
    for row in rows:
        key = (row["dataset"], _column_label(row["method"], row["m"]))
        cells.setdefault(key, []).append(float(row[metric]))
    return {key: statistics.median(values) for key, values in cells.items()}


def summary_table(rows: Sequence[Dict[str, str]], metric: str = "hamming", tablefmt: str = "github") -> str:
    """
    Dataset × (method, m) grid of medians over seeds

    Args:
        rows: Rows from read_csv_rows
        metric: CSV column to tabulate
        tablefmt: tabulate format

    Returns:
        Rendered table
    """
    if metric not in CSV_HEADER[5:]:
        raise ValueError(f"metric must be one of {CSV_HEADER[5:]}, got {metric!r}")
    medians = median_by_cell(rows, metric)
    datasets = sorted({dataset for dataset, _ in medians})
    columns = sorted({label for _, label in medians}, key=_grid_sort_key)
    body = [
        [dataset] + [medians.get((dataset, label), "") for label in columns]
        for dataset in datasets
    ]
    return tabulate(body, headers=["dataset"] + columns, tablefmt=tablefmt, floatfmt=".4f")


def compare_with_reference(rows: Sequence[Dict[str, str]], dataset: str = "corel5k") -> Dict[str, Any]:
    """
    Check measured corel5k medians against the published values

    Returns:
        {'cells': per-cell comparison, 'within_tolerance': bool,
         'ordering_holds': fallback ordering check or None}
    """
    ours = [row for row in rows if row["dataset"] == dataset]
    hamming = median_by_cell(ours, "hamming")
    f1 = median_by_cell(ours, "example_f1")
    cells = []
    all_within = True
    for (method, m), (ref_h, ref_f1, _) in COREL5K_REFERENCE.items():
        label = _column_label(method, "" if m is None else str(m))
        if (dataset, label) not in hamming:
            continue
        got_h = hamming[(dataset, label)]
        got_f1 = f1[(dataset, label)]
        within = abs(got_h - ref_h) <= HAMMING_TOLERANCE and abs(got_f1 - ref_f1) <= EXAMPLE_F1_TOLERANCE
        all_within = all_within and within
        cells.append(
            {
                "cell": label,
                "hamming": got_h,
                "hamming_reference": ref_h,
                "example_f1": got_f1,
                "example_f1_reference": ref_f1,
                "within_tolerance": within,
            }
        )

    ordering: Optional[bool] = None
    needed = [(dataset, "gauss@1024"), (dataset, "wh@256"), (dataset, "knn")]
    if all(key in hamming for key in needed):
        gauss, wh, knn = (hamming[key] for key in needed)
        ordering = gauss <= wh and gauss <= 2 * knn and wh <= 2 * knn
    return {"cells": cells, "within_tolerance": bool(cells) and all_within, "ordering_holds": ordering}
