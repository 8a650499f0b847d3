"""
Binary-relevance regressors and embedding-space kNN prediction

fit_exact solves min ||X V - Y||_F^2, fit_sketched solves the sketched problem
min ||S X V - S Y||_F^2. Both embed the (unsketched) training inputs as
Z = X V_hat; prediction embeds a query through V_hat and votes over its k
nearest training embeddings.
"""
import json
import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from pydantic import BaseModel
from scipy.spatial.distance import cdist

from .linalg import DenseMatrix, as_dense, least_squares
from .sketch import ApplyMode, SketchOperator, apply_sketch
from .utils import array_sha256, ensure_parent_directory

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1

# Query rows per distance block; keeps block × n_train doubles bounded.
_DISTANCE_BLOCK_CELLS = 4_000_000


@dataclass
class SketchedModel:
    """Fitted regressors, embedded training set and prediction settings"""

    V_hat: np.ndarray
    train_embedding: np.ndarray
    train_labels: np.ndarray
    k: int = 10
    theta: float = 0.5
    nonempty: bool = False
    sketch_meta: Optional[dict] = None
    fit_seconds: float = 0.0
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.train_embedding.shape[0] != self.train_labels.shape[0]:
            raise ValueError(
                f"embedding rows {self.train_embedding.shape[0]} != label rows {self.train_labels.shape[0]}"
            )
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError(f"theta must lie in (0, 1], got {self.theta}")
        if not np.all(np.isfinite(self.V_hat)):
            raise ValueError("V_hat contains non-finite entries")

    @property
    def n_train(self) -> int:
        return int(self.train_labels.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.V_hat.shape[0])

    @property
    def n_labels(self) -> int:
        return int(self.train_labels.shape[1])


class ModelFile(BaseModel):
    """On-disk JSON schema of a fitted model"""

    format_version: int = MODEL_FORMAT_VERSION
    V_hat: List[List[float]]
    k: int
    theta: float
    nonempty: bool
    sketch_meta: Optional[dict] = None
    fit_seconds: float
    labels_sha256: str
    n_train: int
    n_labels: int


def _binary_labels(Y: object) -> np.ndarray:
    labels = np.asarray(Y)
    if labels.ndim != 2:
        raise ValueError(f"labels must be 2-D, got shape {labels.shape}")
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("labels must be binary (0/1)")
    return np.ascontiguousarray(labels, dtype=np.uint8)


def _check_pair(X: DenseMatrix, Y: np.ndarray) -> None:
    if X.shape[0] != Y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")


def _check_k(k: int, n: int) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of training points n={n}")


def fit_exact(
    X: object, Y: object, k: int = 10, theta: float = 0.5, nonempty: bool = False
) -> SketchedModel:
    """
    Exact binary-relevance least squares

    Args:
        X: n×p inputs
        Y: n×q binary labels
        k: Neighbours used at prediction time

    Returns:
        SketchedModel without sketch metadata
    """
    X = as_dense(X, "X")
    labels = _binary_labels(Y)
    _check_pair(X, labels)
    _check_k(k, X.shape[0])

    start = time.perf_counter()
    V_hat = least_squares(X, labels.astype(np.float64))
    embedding = X @ V_hat
    elapsed = time.perf_counter() - start

    return SketchedModel(
        V_hat=V_hat,
        train_embedding=np.ascontiguousarray(embedding),
        train_labels=labels,
        k=k,
        theta=theta,
        nonempty=nonempty,
        fit_seconds=elapsed,
    )


def fit_sketched(
    X: object,
    Y: object,
    op: SketchOperator,
    k: int = 10,
    theta: float = 0.5,
    nonempty: bool = False,
    mode: ApplyMode = "full",
) -> SketchedModel:
    """
    Sketch-and-solve binary-relevance least squares

    Args:
        X: n×p inputs
        Y: n×q binary labels
        op: Sketch operator with op.n == n
        k: Neighbours used at prediction time
        mode: Walsh-Hadamard application path

    Returns:
        SketchedModel; fit_seconds covers sketch application, solve and embedding
    """
    X = as_dense(X, "X")
    labels = _binary_labels(Y)
    _check_pair(X, labels)
    if op.n != X.shape[0]:
        raise ValueError(f"sketch built for n={op.n} rows, X has {X.shape[0]}")
    _check_k(k, X.shape[0])

    n, p = X.shape
    warnings: List[str] = []
    if op.m < p:
        message = f"sketch size m={op.m} < p={p}: sketched system may be rank-deficient"
        logger.warning(f"⚠️ {message}")
        warnings.append(message)

    start = time.perf_counter()
    stacked = np.hstack([X, labels.astype(np.float64)])
    sketched = apply_sketch(op, stacked, mode=mode)
    V_hat = least_squares(sketched[:, :p], sketched[:, p:])
    embedding = X @ V_hat
    elapsed = time.perf_counter() - start

    return SketchedModel(
        V_hat=V_hat,
        train_embedding=np.ascontiguousarray(embedding),
        train_labels=labels,
        k=k,
        theta=theta,
        nonempty=nonempty,
        sketch_meta=op.describe(),
        fit_seconds=elapsed,
        warnings=warnings,
    )


def fit_knn_baseline(
    X: object, Y: object, k: int = 10, theta: float = 0.5, nonempty: bool = False
) -> SketchedModel:
    """Binary relevance with a kNN base learner in the raw input space (V_hat = I)"""
    X = as_dense(X, "X")
    labels = _binary_labels(Y)
    _check_pair(X, labels)
    _check_k(k, X.shape[0])

    start = time.perf_counter()
    V_hat = np.eye(X.shape[1])
    embedding = X.copy()
    elapsed = time.perf_counter() - start

    return SketchedModel(
        V_hat=V_hat,
        train_embedding=embedding,
        train_labels=labels,
        k=k,
        theta=theta,
        nonempty=nonempty,
        sketch_meta={"variant": "identity"},
        fit_seconds=elapsed,
    )


def embed(model: SketchedModel, X: object) -> DenseMatrix:
    """Rows z = V_hat' x"""
    X = as_dense(X, "X_query")
    if X.shape[1] != model.n_features:
        raise ValueError(f"query has {X.shape[1]} features, model expects {model.n_features}")
    return np.ascontiguousarray(X @ model.V_hat)


def nearest_neighbors(train: DenseMatrix, queries: DenseMatrix, k: int) -> np.ndarray:
    """
    Indices of the k nearest training rows per query

    Exact Euclidean search; distance ties go to the lower training index.

    Args:
        train: n×d embedded training points
        queries: t×d embedded queries
        k: Neighbours per query (1 <= k <= n)

    Returns:
        t×k int64 array, nearest first
    """
    n = train.shape[0]
    _check_k(k, n)
    t = queries.shape[0]
    result = np.empty((t, k), dtype=np.int64)
    block = max(1, _DISTANCE_BLOCK_CELLS // max(n, 1))
    for start in range(0, t, block):
        stop = min(t, start + block)
        distances = cdist(queries[start:stop], train, metric="sqeuclidean")
        if k < n:
            kth = np.partition(distances, k - 1, axis=1)[:, k - 1]
        for row in range(stop - start):
            d = distances[row]
            if k < n:
                candidates = np.flatnonzero(d <= kth[row])
            else:
                candidates = np.arange(n)
            order = np.argsort(d[candidates], kind="stable")
            result[start + row] = candidates[order[:k]]
    return result


def _vote(model: SketchedModel, neighbors: np.ndarray, k: int, nonempty: bool) -> np.ndarray:
    counts = model.train_labels[neighbors].sum(axis=1, dtype=np.int64)
    predictions = (counts > model.theta * k).astype(np.uint8)
    if nonempty:
        empty_rows = np.flatnonzero(predictions.sum(axis=1) == 0)
        if empty_rows.size:
            best = np.argmax(counts[empty_rows], axis=1)
            predictions[empty_rows, best] = 1
    return predictions


def predict(model: SketchedModel, X_query: object) -> np.ndarray:
    """
    kNN prediction in the embedding space

    Label i is predicted for a query when more than theta·k of its k nearest
    training embeddings carry label i. With `nonempty`, an all-zero row gets
    the label with the highest neighbour count (lowest index on ties).

    Args:
        model: Fitted model
        X_query: t×p inputs

    Returns:
        t×q uint8 matrix
    """
    _check_k(model.k, model.n_train)
    queries = embed(model, X_query)
    neighbors = nearest_neighbors(model.train_embedding, queries, model.k)
    return _vote(model, neighbors, model.k, model.nonempty)


def predict_1nn(model: SketchedModel, X_query: object) -> np.ndarray:
    """Nearest-neighbour prediction: the label row of the closest training point"""
    if model.n_train == 0:
        raise ValueError("empty training set")
    queries = embed(model, X_query)
    neighbors = nearest_neighbors(model.train_embedding, queries, 1)
    return model.train_labels[neighbors[:, 0]].copy()


def save_model(model: SketchedModel, path: str) -> None:
    """Write the model as a self-describing JSON file"""
    payload = ModelFile(
        V_hat=model.V_hat.tolist(),
        k=model.k,
        theta=model.theta,
        nonempty=model.nonempty,
        sketch_meta=model.sketch_meta,
        fit_seconds=model.fit_seconds,
        labels_sha256=array_sha256(model.train_labels),
        n_train=model.n_train,
        n_labels=model.n_labels,
    )
    ensure_parent_directory(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload.model_dump(), f, indent=2)
    logger.info(f"💾 Model saved to {path}")


def load_model(path: str, X_train: object, Y_train: object) -> SketchedModel:
    """
    Read a model file and re-attach its training set

    Args:
        path: JSON model file
        X_train: n×p training inputs the model was fitted on
        Y_train: n×q training labels; their hash must match the file

    Returns:
        SketchedModel ready for prediction
    """
    with open(path, "r", encoding="utf-8") as f:
        payload = ModelFile.model_validate(json.load(f))
    if payload.format_version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {payload.format_version}")

    labels = _binary_labels(Y_train)
    if array_sha256(labels) != payload.labels_sha256:
        raise ValueError("training labels do not match the model file (hash mismatch)")
    X = as_dense(X_train, "X_train")
    _check_pair(X, labels)

    V_hat = np.asarray(payload.V_hat, dtype=np.float64)
    if V_hat.shape[0] != X.shape[1]:
        raise ValueError(f"model expects {V_hat.shape[0]} features, X_train has {X.shape[1]}")
    return SketchedModel(
        V_hat=V_hat,
        train_embedding=np.ascontiguousarray(X @ V_hat),
        train_labels=labels,
        k=payload.k,
        theta=payload.theta,
        nonempty=payload.nonempty,
        sketch_meta=payload.sketch_meta,
        fit_seconds=payload.fit_seconds,
    )
