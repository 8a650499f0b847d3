"""
Stochastic sketch operators

Two families:
    * sigma-subgaussian sketches: dense m×n matrices with i.i.d. N(0,1) or
      ±1 entries scaled by 1/sqrt(m)
    * Walsh-Hadamard sketches (SRHT): S = sqrt(n'/m) · P · (H/sqrt(n')) · R,
      i.e. random signs R, unnormalized Hadamard H on the zero-padded length
      n' = 2^ceil(log2 n), m sampled rows P, and one scale 1/sqrt(m)

Both are normalized so that E[S'S] = I on the first n coordinates.
"""
import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .linalg import DenseMatrix
from .rng import RngState, gaussian, rademacher, sample_without_replacement
from .utils import is_power_of_two, next_power_of_two

logger = logging.getLogger(__name__)

SUBGAUSSIAN_GAUSSIAN = "subgaussian_gaussian"
SUBGAUSSIAN_RADEMACHER = "subgaussian_rademacher"
WALSH_HADAMARD = "walsh_hadamard"

VARIANT_ALIASES = {
    "gauss": SUBGAUSSIAN_GAUSSIAN,
    "gaussian": SUBGAUSSIAN_GAUSSIAN,
    SUBGAUSSIAN_GAUSSIAN: SUBGAUSSIAN_GAUSSIAN,
    "rademacher": SUBGAUSSIAN_RADEMACHER,
    SUBGAUSSIAN_RADEMACHER: SUBGAUSSIAN_RADEMACHER,
    "wh": WALSH_HADAMARD,
    WALSH_HADAMARD: WALSH_HADAMARD,
}

ApplyMode = Literal["full", "pruned"]


@dataclass(frozen=True)
class SketchOperator:
    """
    Materialized sketch S (m×n)

    Subgaussian variants carry the dense payload in `matrix`; the
    Walsh-Hadamard variant carries `signs` (length padded_n), sorted
    `indices` (m distinct rows of [0, padded_n)) and `scale`.
    """

    variant: str
    m: int
    n: int
    seed: int
    sigma: float = 1.0
    matrix: Optional[np.ndarray] = None
    signs: Optional[np.ndarray] = None
    indices: Optional[np.ndarray] = None
    padded_n: int = 0
    scale: float = 1.0

    @property
    def is_walsh_hadamard(self) -> bool:
        return self.variant == WALSH_HADAMARD

    def describe(self) -> dict:
        """Metadata without payload"""
        return {"variant": self.variant, "m": self.m, "n": self.n, "seed": self.seed}


def fwht_in_place(v: np.ndarray) -> np.ndarray:
    """
    Unnormalized fast Walsh-Hadamard transform along axis 0

    v is overwritten with H·v where H_ij = (-1)^<bits(i), bits(j)>
    (Sylvester ordering). 2-D input transforms every column.

    Args:
        v: float64 C-contiguous array whose first dimension is a power of two

    Returns:
        v (the same object)
    """
    n = v.shape[0]
    if not is_power_of_two(n):
        raise ValueError(f"FWHT length must be a power of two, got {n}")
    if not v.flags.c_contiguous:
        raise ValueError("FWHT needs a C-contiguous array to transform in place")
    tail = v.shape[1:]
    h = 1
    while h < n:
        view = v.reshape((n // (2 * h), 2, h) + tail)
        top = view[:, 0].copy()
        view[:, 0] += view[:, 1]
        view[:, 1] = top - view[:, 1]
        h *= 2
    return v


def subsampled_fwht(v: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """
    Rows `indices` of H·v without computing the others

    Recursive pruning of the butterfly: the top half of H·v is H(v_top + v_bot),
    the bottom half H(v_top - v_bot); only halves that hold a requested row
    are expanded.

    Args:
        v: n×c (or length-n) array, n a power of two
        indices: sorted distinct row indices in [0, n)

    Returns:
        len(indices)×c array (1-D for 1-D input)
    """
    n = v.shape[0]
    if not is_power_of_two(n):
        raise ValueError(f"FWHT length must be a power of two, got {n}")
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx[0] < 0 or idx[-1] >= n or np.any(np.diff(idx) <= 0)):
        raise ValueError("indices must be sorted, distinct and inside [0, n)")
    squeeze = v.ndim == 1
    block = v.reshape(n, -1)
    result = _pruned(block, idx)
    return result[:, 0] if squeeze else result


def _pruned(block: np.ndarray, idx: np.ndarray) -> np.ndarray:
    n = block.shape[0]
    if idx.size == 0:
        return np.empty((0, block.shape[1]), dtype=np.float64)
    if n == 1:
        return block.copy()
    if idx.size == n:
        out = np.array(block, dtype=np.float64, order="C", copy=True)
        return fwht_in_place(out)
    half = n // 2
    split = int(np.searchsorted(idx, half))
    top, bottom = block[:half], block[half:]
    parts = []
    if split > 0:
        parts.append(_pruned(top + bottom, idx[:split]))
    if split < idx.size:
        parts.append(_pruned(top - bottom, idx[split:] - half))
    return parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)


def _check_sizes(m: int, n: int) -> None:
    if m < 1:
        raise ValueError(f"sketch size m must be >= 1, got {m}")
    if m > n:
        raise ValueError(f"sketch size m={m} exceeds input rows n={n}")


def build_subgaussian(
    m: int, n: int, dist: str = "gaussian", seed: int = 42, stream_id: int = 0
) -> SketchOperator:
    """
    Dense sigma-subgaussian sketch

    Args:
        m: Sketch size
        n: Input rows
        dist: 'gaussian' or 'rademacher'
        seed: RNG seed
        stream_id: RNG stream

    Returns:
        SketchOperator with entries i.i.d. N(0,1) or ±1, times 1/sqrt(m)
    """
    _check_sizes(m, n)
    state = RngState(seed=seed, stream_id=stream_id)
    if dist == "gaussian":
        entries, _ = gaussian(state, m * n)
        variant = SUBGAUSSIAN_GAUSSIAN
    elif dist == "rademacher":
        entries, _ = rademacher(state, m * n)
        variant = SUBGAUSSIAN_RADEMACHER
    else:
        raise ValueError(f"unknown subgaussian distribution: {dist}")
    matrix = entries.reshape(m, n) / np.sqrt(m)
    if not np.any(matrix):
        raise ValueError("sketch matrix S must not be zero")
    return SketchOperator(variant=variant, m=m, n=n, seed=seed, matrix=matrix)


def build_walsh_hadamard(
    m: int, n: int, seed: int = 42, stream_id: int = 0
) -> SketchOperator:
    """
    Subsampled randomized Hadamard sketch

    Args:
        m: Sketch size (rows kept)
        n: Input rows; padded to the next power of two

    Returns:
        SketchOperator with signs, sorted sampled indices and scale 1/sqrt(m)
    """
    _check_sizes(m, n)
    padded_n = next_power_of_two(n)
    base = RngState(seed=seed, stream_id=stream_id)
    signs, _ = rademacher(base, padded_n)
    indices, _ = sample_without_replacement(base.advance(), m, padded_n)
    scale = np.sqrt(padded_n / m) / np.sqrt(padded_n)
    return SketchOperator(
        variant=WALSH_HADAMARD,
        m=m,
        n=n,
        seed=seed,
        signs=signs,
        indices=indices,
        padded_n=padded_n,
        scale=float(scale),
    )


def build_sketch(variant: str, m: int, n: int, seed: int = 42, stream_id: int = 0) -> SketchOperator:
    """Build a sketch by variant name ('gauss', 'rademacher', 'wh' or full names)"""
    resolved = VARIANT_ALIASES.get(variant)
    if resolved is None:
        raise ValueError(f"unknown sketch variant: {variant}")
    if resolved == WALSH_HADAMARD:
        return build_walsh_hadamard(m, n, seed=seed, stream_id=stream_id)
    dist = "gaussian" if resolved == SUBGAUSSIAN_GAUSSIAN else "rademacher"
    return build_subgaussian(m, n, dist=dist, seed=seed, stream_id=stream_id)


def apply_sketch(op: SketchOperator, M: DenseMatrix, mode: ApplyMode = "full") -> DenseMatrix:
    """
    S·M

    Args:
        op: Sketch operator
        M: n×c matrix
        mode: 'full' runs the whole FWHT then gathers; 'pruned' computes only
              the sampled rows (Walsh-Hadamard only)

    Returns:
        m×c matrix
    """
    if M.ndim != 2 or M.shape[0] != op.n:
        raise ValueError(f"sketch expects {op.n} rows, got matrix of shape {M.shape}")
    if not op.is_walsh_hadamard:
        assert op.matrix is not None
        return np.ascontiguousarray(op.matrix @ M)

    assert op.signs is not None and op.indices is not None
    padded = np.zeros((op.padded_n, M.shape[1]), dtype=np.float64)
    padded[: op.n] = M
    padded *= op.signs[:, None]
    if mode == "full":
        transformed = fwht_in_place(padded)[op.indices]
    elif mode == "pruned":
        transformed = subsampled_fwht(padded, op.indices)
    else:
        raise ValueError(f"unknown apply mode: {mode}")
    return np.ascontiguousarray(transformed * op.scale)


def materialize(op: SketchOperator) -> DenseMatrix:
    """Explicit m×n matrix of the operator"""
    if not op.is_walsh_hadamard:
        assert op.matrix is not None
        return op.matrix.copy()
    return apply_sketch(op, np.eye(op.n))


def sketch_frobenius_sq(op: SketchOperator) -> float:
    """||S||_F^2"""
    if op.is_walsh_hadamard:
        # Every Hadamard entry is ±1 and padded columns are dropped.
        return float(op.m * op.n * op.scale ** 2)
    assert op.matrix is not None
    return float(np.sum(op.matrix * op.matrix))
