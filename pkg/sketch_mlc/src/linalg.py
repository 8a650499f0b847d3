"""
Dense matrix arithmetic and multi-right-hand-side least squares

DenseMatrix is a 2-D, C-contiguous float64 numpy array with finite entries.
Least squares runs Householder QR with column pivoting (LAPACK dgeqp3) and
applies Q' to all right-hand sides at once (dormqr), never forming X'X.
"""
from typing import Tuple

import numpy as np
import scipy.linalg
import scipy.linalg.lapack as lapack

DenseMatrix = np.ndarray

# Diagonal entries of R with |R_ii| <= RANK_TOL_BASE * max(n, p) * |R_00|
# are treated as zero.
RANK_TOL_BASE = 2.0 ** -40


def as_dense(a: object, name: str = "matrix") -> DenseMatrix:
    """
    Validate and convert to a DenseMatrix

    Args:
        a: Array-like with two dimensions
        name: Name used in error messages

    Returns:
        C-contiguous float64 copy or view
    """
    matrix = np.ascontiguousarray(a, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError(f"{name} contains non-finite entries")
    return matrix


def matmul(A: DenseMatrix, B: DenseMatrix, ordered: bool = False) -> DenseMatrix:
    """
    Product A·B; errors name both shapes on mismatch

    The default goes through BLAS, whose summation order depends on the
    library and thread count, so the last bits can differ across machines.
    With ordered=True every entry is accumulated over the inner index in
    ascending order, which is bit-reproducible everywhere and much slower.
    """
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {A.shape} x {B.shape}")
    if ordered:
        product = np.zeros((A.shape[0], B.shape[1]), dtype=np.result_type(A, B, np.float64))
        for j in range(A.shape[1]):
            product += np.multiply.outer(A[:, j], B[j, :])
    else:
        product = A @ B
    if not np.all(np.isfinite(product)):
        raise ValueError(f"matmul produced non-finite entries for {A.shape} x {B.shape}")
    return np.ascontiguousarray(product)


def rank_tolerance(n: int, p: int) -> float:
    """Relative rank tolerance for an n×p design"""
    return RANK_TOL_BASE * max(n, p)


def _numerical_rank(R: np.ndarray, n: int, p: int) -> int:
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    keep = diag > rank_tolerance(n, p) * diag[0]
    return int(keep.size) if keep.all() else int(np.argmin(keep))


def _check_design(A: DenseMatrix, name: str = "design matrix") -> None:
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    if not np.any(A):
        raise ValueError("zero design matrix")


def pivoted_qr(A: DenseMatrix) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
    """
    Householder QR with column pivoting in LAPACK raw form

    Args:
        A: n×p design

    Returns:
        (reflectors, tau, R, permutation, numerical rank)
    """
    _check_design(A)
    n, p = A.shape
    (reflectors, tau), R, perm = scipy.linalg.qr(A, mode="raw", pivoting=True)
    return reflectors, tau, R, perm, _numerical_rank(R, n, p)


def least_squares(A: DenseMatrix, B: DenseMatrix) -> DenseMatrix:
    """
    Solve min_V ||A V - B||_F^2 for all columns of B

    Rank-deficient designs are truncated at the numerical rank; the
    components of V for dropped pivot columns are set to zero.

    Args:
        A: n×p design matrix
        B: n×q right-hand sides

    Returns:
        V, p×q
    """
    if B.ndim != 2 or B.shape[1] < 1:
        raise ValueError(f"right-hand side must be n×q with q >= 1, got shape {B.shape}")
    if A.ndim != 2 or A.shape[0] != B.shape[0]:
        raise ValueError(f"least_squares row mismatch: A {A.shape}, B {B.shape}")
    if not np.all(np.isfinite(B)):
        raise ValueError("right-hand side contains non-finite entries")

    reflectors, tau, R, perm, rank = pivoted_qr(A)
    n, p = A.shape
    q = B.shape[1]

    k = tau.shape[0]
    lwork = max(1, q) * 64
    qtb, _, info = lapack.dormqr(
        "L", "T", np.asfortranarray(reflectors[:, :k]), tau, np.asfortranarray(B), lwork
    )
    if info != 0:
        raise ValueError(f"LAPACK dormqr failed with info={info}")

    V = np.zeros((p, q), dtype=np.float64)
    if rank > 0:
        solution = scipy.linalg.solve_triangular(R[:rank, :rank], qtb[:rank], lower=False)
        V[perm[:rank]] = solution
    if not np.all(np.isfinite(V)):
        raise ValueError("least_squares produced non-finite coefficients")
    return V


def frobenius_objective(A: DenseMatrix, V: DenseMatrix, B: DenseMatrix) -> float:
    """||A V - B||_F^2 (no 1/2 factor)"""
    if A.shape[1] != V.shape[0] or A.shape[0] != B.shape[0] or V.shape[1] != B.shape[1]:
        raise ValueError(
            f"objective shape mismatch: A {A.shape}, V {V.shape}, B {B.shape}"
        )
    residual = A @ V - B
    return float(np.sum(residual * residual))


def orthonormal_basis(A: DenseMatrix) -> DenseMatrix:
    """
    Orthonormal basis of range(A)

    Args:
        A: n×p matrix

    Returns:
        n×r matrix with orthonormal columns, r = numerical rank
    """
    _check_design(A, "matrix")
    n, p = A.shape
    Q, R, _ = scipy.linalg.qr(A, mode="economic", pivoting=True)
    rank = _numerical_rank(R, n, p)
    return np.ascontiguousarray(Q[:, :rank])
