"""
Multi-label evaluation measures and timing
"""
import time
from typing import Callable, List, Optional, Tuple, TypeVar

import numpy as np
from pydantic import BaseModel, Field

T = TypeVar("T")


class MetricsReport(BaseModel):
    """Evaluation of one fitted model on one test split"""

    hamming_loss: float = Field(ge=0.0, le=1.0)
    example_f1: float = Field(ge=0.0, le=1.0)
    fit_seconds: float = Field(ge=0.0)
    predict_seconds: float = Field(ge=0.0)
    n_test: int
    q: int

    def to_csv_row(
        self, dataset: str, method: str, m: Optional[int], k: int, seed: int
    ) -> List[str]:
        """Row matching the fixed CSV header"""
        return [
            dataset,
            method,
            "" if m is None else str(m),
            str(k),
            str(seed),
            f"{self.hamming_loss:.10g}",
            f"{self.example_f1:.10g}",
            f"{self.fit_seconds:.6f}",
            f"{self.predict_seconds:.6f}",
        ]


def _check_pair(Y_true: object, Y_pred: object) -> Tuple[np.ndarray, np.ndarray]:
    truth = np.asarray(Y_true)
    pred = np.asarray(Y_pred)
    if truth.shape != pred.shape or truth.ndim != 2:
        raise ValueError(f"label matrices must share a 2-D shape, got {truth.shape} and {pred.shape}")
    for name, matrix in (("Y_true", truth), ("Y_pred", pred)):
        if not np.all((matrix == 0) | (matrix == 1)):
            raise ValueError(f"{name} has non-binary entries")
    return truth.astype(bool), pred.astype(bool)


def hamming_loss(Y_true: object, Y_pred: object) -> float:
    """Fraction of (example, label) slots that disagree"""
    truth, pred = _check_pair(Y_true, Y_pred)
    if truth.size == 0:
        return 0.0
    return float(np.count_nonzero(truth != pred)) / truth.size


def example_f1(Y_true: object, Y_pred: object, empty_score: float = 1.0) -> float:
    """
    Mean per-example F1 = 2|y ∩ ŷ| / (|y| + |ŷ|)

    Args:
        Y_true: n×q binary truth
        Y_pred: n×q binary predictions
        empty_score: Score of an example where both y and ŷ are empty

    Returns:
        Mean over examples
    """
    truth, pred = _check_pair(Y_true, Y_pred)
    if truth.shape[0] == 0:
        return 0.0
    overlap = np.count_nonzero(truth & pred, axis=1).astype(np.float64)
    sizes = (np.count_nonzero(truth, axis=1) + np.count_nonzero(pred, axis=1)).astype(np.float64)
    scores = np.full(truth.shape[0], empty_score, dtype=np.float64)
    nonempty = sizes > 0
    scores[nonempty] = 2.0 * overlap[nonempty] / sizes[nonempty]
    return float(np.mean(scores))


def zero_one_per_label_error(Y_true: object, Y_pred: object) -> np.ndarray:
    """Per-label mismatch frequency (length q)"""
    truth, pred = _check_pair(Y_true, Y_pred)
    if truth.shape[0] == 0:
        return np.zeros(truth.shape[1])
    return np.count_nonzero(truth != pred, axis=0) / truth.shape[0]


def timed(thunk: Callable[[], T]) -> Tuple[T, float]:
    """
    Run thunk and measure wall-clock time

    Returns:
        (result, seconds) using the monotonic performance counter
    """
    start = time.perf_counter()
    result = thunk()
    return result, max(0.0, time.perf_counter() - start)


def evaluate(
    Y_true: object,
    Y_pred: object,
    fit_seconds: float,
    predict_seconds: float,
    empty_score: float = 1.0,
) -> MetricsReport:
    """Assemble a MetricsReport for one prediction"""
    truth = np.asarray(Y_true)
    return MetricsReport(
        hamming_loss=hamming_loss(Y_true, Y_pred),
        example_f1=example_f1(Y_true, Y_pred, empty_score=empty_score),
        fit_seconds=fit_seconds,
        predict_seconds=predict_seconds,
        n_test=int(truth.shape[0]),
        q=int(truth.shape[1]),
    )
