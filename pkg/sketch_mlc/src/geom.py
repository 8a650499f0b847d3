"""
Covering numbers, doubling dimension and generalization-bound evaluators
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator
from scipy.spatial.distance import cdist

logger = logging.getLogger(__name__)

# Point pairs per distance block in the diameter scan
_PAIR_BLOCK_CELLS = 4_000_000


class CoverResult(BaseModel):
    """Greedy epsilon-cover; its size upper-bounds the covering number"""

    epsilon: float = Field(gt=0.0)
    center_indices: List[int]
    metric: str
    size: int


class DoublingEstimate(BaseModel):
    """Slope of log2(size) against log2(1/ε) with the fit residual"""

    slope: float
    residual: float
    note: str = ""


class BoundInputs(BaseModel):
    """Inputs of the 1NN / kNN generalization bounds (diameter normalized to 1)"""

    q: int = Field(ge=1)
    n: int
    L: float = Field(ge=0.0)
    V_frobenius: float = Field(ge=0.0)
    D: float
    k: int = Field(default=1, ge=1)
    bayes_errors: List[float]

    @field_validator("bayes_errors")
    @classmethod
    def _bounded(cls, values: List[float]) -> List[float]:
        for value in values:
            if not 0.0 <= value <= 1.0 or not math.isfinite(value):
                raise ValueError(f"bayes error {value} outside [0, 1]")
        return values


def _as_points(points: object) -> np.ndarray:
    array = np.asarray(points, dtype=np.float64)
    if array.ndim == 1:
        array = array[:, None]
    if array.ndim != 2 or array.shape[0] == 0:
        raise ValueError("point set must be non-empty")
    return array


def _project(points: np.ndarray, metric: str, V_hat: Optional[np.ndarray]) -> np.ndarray:
    if metric == "euclidean":
        return points
    if metric == "embedding":
        if V_hat is None:
            raise ValueError("metric 'embedding' requires V_hat")
        return points @ np.asarray(V_hat, dtype=np.float64)
    raise ValueError(f"unknown metric: {metric}")


def greedy_epsilon_cover(
    points: object,
    epsilon: float,
    metric: str = "euclidean",
    V_hat: Optional[np.ndarray] = None,
    initial_centers: Optional[Sequence[int]] = None,
) -> CoverResult:
    """
    Sequential greedy epsilon-cover

    Points are scanned in index order; a point becomes a center when its
    distance to every existing center is >= epsilon. `initial_centers`
    (pairwise >= epsilon apart, e.g. the centers of a cover at a larger
    radius) are taken as centers before the scan starts.

    Args:
        points: n×d array (or 1-D for points on a line)
        epsilon: Cover radius (> 0)
        metric: 'euclidean' or 'embedding' (distance between V_hat' x)
        V_hat: Regressors for the embedding metric
        initial_centers: Indices that start the cover

    Returns:
        CoverResult
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    projected = _project(_as_points(points), metric, V_hat)
    n = projected.shape[0]
    nearest = np.full(n, np.inf)
    centers: List[int] = []
    for i in initial_centers or ():
        if not 0 <= i < n:
            raise ValueError(f"initial center {i} out of range for {n} points")
        if nearest[i] < epsilon:
            raise ValueError(f"initial centers closer than epsilon={epsilon}")
        centers.append(int(i))
        np.minimum(nearest, np.linalg.norm(projected - projected[i], axis=1), out=nearest)
    for i in range(n):
        if nearest[i] >= epsilon:
            centers.append(i)
            distances = np.linalg.norm(projected - projected[i], axis=1)
            np.minimum(nearest, distances, out=nearest)
    return CoverResult(epsilon=epsilon, center_indices=centers, metric=metric, size=len(centers))


def verify_cover(points: object, cover: CoverResult, V_hat: Optional[np.ndarray] = None) -> bool:
    """Every point within epsilon of a center, centers pairwise >= epsilon apart"""
    projected = _project(_as_points(points), cover.metric, V_hat)
    centers = projected[cover.center_indices]
    if centers.shape[0] == 0:
        return False
    to_centers = cdist(projected, centers)
    covered = bool(np.all(to_centers.min(axis=1) < cover.epsilon))
    between = cdist(centers, centers)
    np.fill_diagonal(between, np.inf)
    separated = bool(np.all(between >= cover.epsilon))
    return covered and separated


def nested_covers(
    points: object,
    epsilons: Sequence[float],
    metric: str = "euclidean",
    V_hat: Optional[np.ndarray] = None,
) -> List[CoverResult]:
    """
    Greedy covers for descending radii, each one extending the previous

    Centers of the cover at a larger radius stay >= the smaller radius apart,
    so every cover starts from them and sizes never decrease as ε shrinks.
    """
    eps = list(epsilons)
    if not eps or any(e <= 0 for e in eps):
        raise ValueError("epsilons must be positive")
    if any(a < b for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be sorted descending")
    projected = _project(_as_points(points), metric, V_hat)
    covers: List[CoverResult] = []
    previous: List[int] = []
    for e in eps:
        cover = greedy_epsilon_cover(projected, e, initial_centers=previous)
        covers.append(cover.model_copy(update={"metric": metric}))
        previous = cover.center_indices
    return covers


def covering_curve(
    points: object,
    epsilons: Sequence[float],
    metric: str = "euclidean",
    V_hat: Optional[np.ndarray] = None,
) -> List[Tuple[float, int]]:
    """
    Greedy cover size per epsilon

    Args:
        points: Point set
        epsilons: Positive radii sorted descending

    Returns:
        List of (epsilon, size), non-decreasing in size
    """
    return [(cover.epsilon, cover.size) for cover in nested_covers(points, epsilons, metric, V_hat)]


def doubling_dim_estimate(curve: Sequence[Tuple[float, int]]) -> DoublingEstimate:
    """Least-squares slope of log2(size) on log2(1/ε), a proxy for the doubling dimension"""
    if len(curve) < 2 or len({e for e, _ in curve}) < 2:
        raise ValueError("need at least two curve points with distinct epsilon")
    x = np.log2([1.0 / e for e, _ in curve])
    y = np.log2([float(size) for _, size in curve])
    if np.all(y == y[0]):
        return DoublingEstimate(slope=0.0, residual=0.0, note="degenerate curve: constant cover size")
    coefficients, residuals, _, _, _ = np.polyfit(x, y, 1, full=True)
    residual = float(residuals[0]) if residuals.size else 0.0
    return DoublingEstimate(slope=float(coefficients[0]), residual=residual)


def diameter(points: object) -> float:
    """Exact Euclidean diameter by a blocked pairwise scan"""
    array = _as_points(points)
    n = array.shape[0]
    block = max(1, _PAIR_BLOCK_CELLS // n)
    best = 0.0
    for start in range(0, n, block):
        best = max(best, float(cdist(array[start:start + block], array).max()))
    return best


def normalize_diameter(points: object) -> Tuple[np.ndarray, float]:
    """
    Rescale a point set to diameter 1

    Returns:
        (scaled points, scale factor applied)
    """
    array = _as_points(points)
    diam = diameter(array)
    if diam == 0.0:
        return array.copy(), 1.0
    scale = 1.0 / diam
    return array * scale, scale


def _check_bound_inputs(b: BoundInputs) -> None:
    if b.D <= 0 or b.n <= 0:
        raise ValueError(f"doubling dimension and n must be positive, got D={b.D}, n={b.n}")
    if len(b.bayes_errors) != b.q:
        raise ValueError(f"expected {b.q} bayes errors, got {len(b.bayes_errors)}")


def knn_bayes_factor(k: int) -> float:
    """1 + sqrt(8/k)"""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return 1.0 + math.sqrt(8.0 / k)


def bound_rhs_1nn(b: BoundInputs) -> float:
    """Σ 2·bayes_i + 3 q L ||V_hat||_F / n^(1/(D+1))"""
    _check_bound_inputs(b)
    rate = b.n ** (1.0 / (b.D + 1.0))
    return 2.0 * math.fsum(b.bayes_errors) + 3.0 * b.q * b.L * b.V_frobenius / rate


def bound_rhs_knn(b: BoundInputs) -> float:
    """Σ (1 + sqrt(8/k))·bayes_i + q (6 L ||V_hat||_F + k) / n^(1/(D+1))"""
    _check_bound_inputs(b)
    rate = b.n ** (1.0 / (b.D + 1.0))
    return knn_bayes_factor(b.k) * math.fsum(b.bayes_errors) + b.q * (
        6.0 * b.L * b.V_frobenius + b.k
    ) / rate
