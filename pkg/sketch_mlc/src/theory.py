"""
Empirical side of the sketching guarantees

The set of interest is Y = range(X) ∩ unit sphere: the least-squares problems
are unconstrained, so the tangent cone at the optimum is the whole parameter
space. For an orthonormal basis B of range(X), the supremum of |<g, z>| over
Y is ||B'g||_2, which turns every width into a Monte-Carlo mean of a norm.
"""
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from .linalg import DenseMatrix, as_dense, frobenius_objective, least_squares
from .rng import RngState
from .sketch import SketchOperator, apply_sketch, build_sketch, sketch_frobenius_sq

logger = logging.getLogger(__name__)

ORTHONORMAL_TOL = 1e-8

# Monte-Carlo sample vectors generated per block
_SAMPLE_BLOCK_CELLS = 2_000_000


class WidthEstimate(BaseModel):
    """Monte-Carlo width with its standard error"""

    kind: str
    mean: float = Field(ge=0.0)
    std_error: float = Field(ge=0.0)
    samples: int


class DeltaReport(BaseModel):
    """Exact vs sketched optimum for one operator"""

    f_star: float
    g_hat: float
    delta_emp: Optional[float] = None
    zero_residual: bool = False
    m: int
    variant: str
    seed: int

    def sandwich(self, delta: float) -> bool:
        """(1-δ) f* <= g <= (1+δ) f*"""
        if self.zero_residual:
            return abs(self.g_hat) <= 1e-12
        return (1.0 - delta) * self.f_star <= self.g_hat <= (1.0 + delta) * self.f_star


class CalibrationResult(BaseModel):
    """Sandwich frequency per sketch size and the implied c1"""

    variant: str
    delta: float
    width: float
    fractions: Dict[int, float]
    smallest_m: Optional[int] = None
    implied_c1: Optional[float] = None


def _check_basis(B: DenseMatrix) -> None:
    if B.ndim != 2 or B.shape[1] < 1:
        raise ValueError(f"basis must be n×r with r >= 1, got shape {B.shape}")
    gram = B.T @ B
    error = np.max(np.abs(gram - np.eye(B.shape[1])))
    if error > ORTHONORMAL_TOL:
        raise ValueError(f"basis is not orthonormal (max |B'B - I| = {error:.3e})")


def _summarize(kind: str, values: np.ndarray) -> WidthEstimate:
    samples = values.size
    std = float(np.std(values, ddof=1)) if samples > 1 else 0.0
    return WidthEstimate(
        kind=kind,
        mean=float(np.mean(values)),
        std_error=std / math.sqrt(samples),
        samples=samples,
    )


def _sample_norms(B: DenseMatrix, samples: int, seed: int, draw: str) -> np.ndarray:
    n = B.shape[0]
    block = max(1, _SAMPLE_BLOCK_CELLS // n)
    norms = np.empty(samples, dtype=np.float64)
    state = RngState(seed=seed, stream_id=0)
    for start in range(0, samples, block):
        stop = min(samples, start + block)
        generator = state.generator()
        if draw == "gaussian":
            vectors = generator.standard_normal((stop - start, n))
        else:
            vectors = 2.0 * generator.integers(0, 2, size=(stop - start, n)).astype(np.float64) - 1.0
        norms[start:stop] = np.linalg.norm(vectors @ B, axis=1)
        state = state.advance()
    return norms


def gaussian_width_mc(B: DenseMatrix, samples: int, seed: int = 42) -> WidthEstimate:
    """
    Gaussian width of range(B) ∩ sphere: mean of ||B'g||, g ~ N(0, I_n)

    Args:
        B: n×r orthonormal basis
        samples: Monte-Carlo samples (>= 1)
        seed: RNG seed

    Returns:
        WidthEstimate(kind='gaussian')
    """
    _check_basis(B)
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    return _summarize("gaussian", _sample_norms(B, samples, seed, "gaussian"))


def rademacher_width_mc(B: DenseMatrix, samples: int, seed: int = 42) -> WidthEstimate:
    """Rademacher width: mean of ||B'w|| over i.i.d. sign vectors w"""
    _check_basis(B)
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    return _summarize("rademacher", _sample_norms(B, samples, seed, "rademacher"))


def s_gaussian_width_mc(
    B: DenseMatrix, variant: str, m: int, samples: int, seed: int = 42
) -> WidthEstimate:
    """
    S-Gaussian width: mean over fresh (g, S) of ||(S B)' g||

    The operators are already scaled by 1/sqrt(m) (E[S'S] = I), which is the
    Sz/sqrt(m) normalization for rows with identity covariance.

    Args:
        B: n×r orthonormal basis
        variant: Sketch variant name
        m: Sketch size (<= n)
        samples: Fresh sketches drawn (one per sample)
        seed: RNG seed; sample i uses stream i + 1

    Returns:
        WidthEstimate(kind='s_gaussian')
    """
    _check_basis(B)
    n = B.shape[0]
    if m > n:
        raise ValueError(f"sketch size m={m} exceeds n={n}")
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    values = np.empty(samples, dtype=np.float64)
    for i in range(samples):
        op = build_sketch(variant, m, n, seed=seed, stream_id=i + 1)
        SB = apply_sketch(op, B)
        g = RngState(seed=seed, stream_id=0, counter=i).generator().standard_normal(m)
        values[i] = np.linalg.norm(SB.T @ g)
    return _summarize("s_gaussian", values)


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def recommend_sketch_size(width: float, delta: float, c1: float = 1.0) -> int:
    """
    Subgaussian sketch size ceil((c1/δ)^2 ω^2)

    Args:
        width: Gaussian width estimate (> 0)
        delta: Target δ in (0, 1)
        c1: Universal constant (calibrated)

    Returns:
        Recommended m
    """
    _check_delta(delta)
    if width <= 0 or c1 <= 0:
        raise ValueError(f"width and c1 must be positive, got width={width}, c1={c1}")
    return int(math.ceil((c1 / delta) ** 2 * width ** 2))


def recommend_sketch_size_walsh_hadamard(
    s_width: float, rademacher_width: float, n: int, delta: float, c1: float = 1.0
) -> int:
    """Walsh-Hadamard sketch size ceil((c1/δ)^2 (Υ + sqrt(6 log2 n))^2 ω_S^2)"""
    _check_delta(delta)
    if s_width <= 0 or c1 <= 0 or rademacher_width < 0 or n < 1:
        raise ValueError(
            f"invalid sizing inputs: s_width={s_width}, rademacher_width={rademacher_width}, n={n}, c1={c1}"
        )
    factor = (rademacher_width + math.sqrt(6.0 * math.log2(n))) ** 2
    return int(math.ceil((c1 / delta) ** 2 * factor * s_width ** 2))


def _sketched_objective(X: DenseMatrix, Y: np.ndarray, op: SketchOperator) -> tuple:
    stacked = np.hstack([X, Y])
    sketched = apply_sketch(op, stacked)
    p = X.shape[1]
    SX, SY = sketched[:, :p], sketched[:, p:]
    V_hat = least_squares(SX, SY)
    return V_hat, frobenius_objective(SX, V_hat, SY)


def delta_optimality_check(X: object, Y: object, op: SketchOperator) -> DeltaReport:
    """
    Compare f(V*) = ||X V* - Y||^2 with g(V_hat) = ||S X V_hat - S Y||^2

    Returns:
        DeltaReport; delta_emp = |g - f|/f, skipped (zero_residual) when f* = 0
    """
    X = as_dense(X, "X")
    Yf = as_dense(np.asarray(Y, dtype=np.float64), "Y")
    if op.n != X.shape[0]:
        raise ValueError(f"sketch built for n={op.n} rows, X has {X.shape[0]}")
    V_star = least_squares(X, Yf)
    f_star = frobenius_objective(X, V_star, Yf)
    _, g_hat = _sketched_objective(X, Yf, op)

    zero_residual = f_star <= 1e-12 * max(1.0, float(np.sum(Yf * Yf)))
    if zero_residual:
        logger.warning("⚠️ zero-residual system: delta_emp is undefined")
    return DeltaReport(
        f_star=f_star,
        g_hat=g_hat,
        delta_emp=None if zero_residual else abs(g_hat - f_star) / f_star,
        zero_residual=zero_residual,
        m=op.m,
        variant=op.variant,
        seed=op.seed,
    )


def remark_bound_holds(X: object, Y: object, op: SketchOperator) -> bool:
    """g(V_hat) <= ||S||_F^2 · f(V_hat) for the sketched solution"""
    X = as_dense(X, "X")
    Yf = as_dense(np.asarray(Y, dtype=np.float64), "Y")
    V_hat, g_hat = _sketched_objective(X, Yf, op)
    f_hat = frobenius_objective(X, V_hat, Yf)
    return g_hat <= sketch_frobenius_sq(op) * f_hat * (1.0 + 1e-12) + 1e-12


def calibrate_c1(
    X: object,
    Y: object,
    variant: str,
    delta: float,
    m_grid: Sequence[int],
    seeds: Sequence[int],
    width: float,
    target_fraction: float = 0.9,
) -> CalibrationResult:
    """
    Smallest m in the grid whose δ-sandwich holds in >= target_fraction of seeds

    The implied constant solves m = (c1/δ)^2 ω^2 for c1.
    """
    _check_delta(delta)
    X = as_dense(X, "X")
    n = X.shape[0]
    fractions: Dict[int, float] = {}
    smallest: Optional[int] = None
    for m in sorted(m_grid):
        if m > n:
            logger.warning(f"⚠️ skipping m={m} > n={n}")
            continue
        hits: List[bool] = []
        for seed in seeds:
            report = delta_optimality_check(X, Y, build_sketch(variant, m, n, seed=seed))
            hits.append(report.sandwich(delta))
        fractions[m] = float(np.mean(hits))
        logger.info(f"📐 m={m}: sandwich fraction {fractions[m]:.2f}")
        if smallest is None and fractions[m] >= target_fraction:
            smallest = m
    implied = None if smallest is None or width <= 0 else delta * math.sqrt(smallest) / width
    return CalibrationResult(
        variant=variant,
        delta=delta,
        width=width,
        fractions=fractions,
        smallest_m=smallest,
        implied_c1=implied,
    )
