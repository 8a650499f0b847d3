"""
Datasets: sparse multi-label file format, splits and synthetic generators

File format (UTF-8 text):
    line 1:        n p q
    lines 2..n+1:  <labels> <idx:val> <idx:val> ...
where <labels> is a comma-separated list of 0-based label indices (possibly
empty) and feature indices are 0-based and strictly increasing.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, Field

from .linalg import DenseMatrix
from .rng import RngState
from .utils import ensure_parent_directory

logger = logging.getLogger(__name__)

BAYES_SAMPLES = 1_000_000
NU_FLOOR = 0.05
NU_CEIL = 0.95


class DatasetFormatError(ValueError):
    """Malformed dataset file; carries the 1-based line number"""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass
class MultiLabelDataset:
    """Sparse features (CSR, sorted indices) and binary labels"""

    features: sp.csr_matrix
    labels: np.ndarray
    name: str = "dataset"

    def __post_init__(self) -> None:
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} label rows"
            )
        if self.labels.ndim != 2 or self.labels.shape[1] < 1:
            raise ValueError(f"labels must be n×q with q >= 1, got shape {self.labels.shape}")
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise ValueError("labels must be binary (0/1)")
        if not self.features.has_sorted_indices:
            self.features.sort_indices()

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def p(self) -> int:
        return int(self.features.shape[1])

    @property
    def q(self) -> int:
        return int(self.labels.shape[1])

    def to_dense(self) -> DenseMatrix:
        return np.ascontiguousarray(self.features.toarray(), dtype=np.float64)

    def subset(self, indices: np.ndarray, name: Optional[str] = None) -> "MultiLabelDataset":
        return MultiLabelDataset(
            features=self.features[indices].tocsr(),
            labels=self.labels[indices].copy(),
            name=name or self.name,
        )


class SyntheticSpec(BaseModel):
    """Parameters of a synthetic dataset"""

    kind: str = "planted_linear"
    n: int = Field(default=1000, ge=1)
    p: int = Field(default=20, ge=1)
    q: int = Field(default=4, ge=1)
    noise_sigma: float = Field(default=0.5, ge=0.0)
    lipschitz_scale: float = 1.0
    seed: int = 42


class PlantedLinearData(NamedTuple):
    dataset: MultiLabelDataset
    w_true: np.ndarray
    scores: np.ndarray


@dataclass(frozen=True)
class LinearNu:
    """ν_i(x) = clamp(0.5 + scale·(a_i'x + b_i), 0.05, 0.95) for each label i"""

    a: np.ndarray
    b: np.ndarray
    scale: float

    def __call__(self, X: np.ndarray) -> np.ndarray:
        raw = 0.5 + self.scale * (np.asarray(X) @ self.a.T + self.b)
        return np.clip(raw, NU_FLOOR, NU_CEIL)

    @property
    def lipschitz(self) -> float:
        return abs(self.scale) * float(np.max(np.linalg.norm(self.a, axis=1)))

    def describe(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist(), "scale": self.scale}


class SmoothBayesData(NamedTuple):
    dataset: MultiLabelDataset
    bayes_errors: np.ndarray
    nu: LinearNu


def _parse_header(line: str) -> Tuple[int, int, int]:
    parts = line.split()
    if len(parts) != 3:
        raise DatasetFormatError(1, f"header must be 'n p q', got {line!r}")
    try:
        n, p, q = (int(part) for part in parts)
    except ValueError:
        raise DatasetFormatError(1, f"header values must be integers, got {line!r}")
    if n < 0 or p < 1 or q < 1:
        raise DatasetFormatError(1, f"invalid sizes n={n}, p={p}, q={q}")
    return n, p, q


def load_sparse_multilabel(path: str, name: Optional[str] = None) -> MultiLabelDataset:
    """
    Parse a dataset file

    Args:
        path: File in the documented text format
        name: Dataset name (defaults to the file stem)

    Returns:
        MultiLabelDataset
    """
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise DatasetFormatError(1, "empty file")
    n, p, q = _parse_header(lines[0])
    body = lines[1:]
    while len(body) > n and not body[-1].strip():
        body.pop()
    if len(body) != n:
        raise DatasetFormatError(len(lines), f"header declares {n} examples, found {len(body)}")

    labels = np.zeros((n, q), dtype=np.uint8)
    indptr = [0]
    indices: List[int] = []
    values: List[float] = []
    for row, line in enumerate(body):
        line_number = row + 2
        # the label field may be empty, so split on the first space only
        label_field, _, feature_field = line.partition(" ")
        if label_field:
            for token in label_field.split(","):
                try:
                    label = int(token)
                except ValueError:
                    raise DatasetFormatError(line_number, f"bad label index {token!r}")
                if not 0 <= label < q:
                    raise DatasetFormatError(line_number, f"label index {label} outside [0, {q})")
                labels[row, label] = 1
        previous = -1
        for token in feature_field.split():
            idx_text, sep, value_text = token.partition(":")
            if not sep:
                raise DatasetFormatError(line_number, f"feature must be idx:val, got {token!r}")
            try:
                idx = int(idx_text)
                value = float(value_text)
            except ValueError:
                raise DatasetFormatError(line_number, f"bad feature {token!r}")
            if idx < 0 or idx >= p:
                raise DatasetFormatError(line_number, f"feature index {idx} outside [0, {p})")
            if idx == previous:
                raise DatasetFormatError(line_number, f"duplicate feature index {idx}")
            if idx < previous:
                raise DatasetFormatError(line_number, f"feature indices not increasing at {idx}")
            if not math.isfinite(value):
                raise DatasetFormatError(line_number, f"non-finite feature value {value_text!r}")
            indices.append(idx)
            values.append(value)
            previous = idx
        indptr.append(len(indices))

    features = sp.csr_matrix(
        (np.asarray(values, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(n, p),
    )
    dataset_name = name or Path(path).stem
    logger.info(f"📂 Loaded {dataset_name}: n={n}, p={p}, q={q}")
    return MultiLabelDataset(features=features, labels=labels, name=dataset_name)


def write_sparse_multilabel(ds: MultiLabelDataset, path: str) -> None:
    """Write a dataset in the text format read by load_sparse_multilabel"""
    ensure_parent_directory(path)
    features = ds.features.tocsr()
    features.sort_indices()
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{ds.n} {ds.p} {ds.q}\n")
        for row in range(ds.n):
            label_field = ",".join(str(i) for i in np.flatnonzero(ds.labels[row]))
            start, stop = features.indptr[row], features.indptr[row + 1]
            pairs = " ".join(
                f"{idx}:{value!r}"
                for idx, value in zip(features.indices[start:stop].tolist(), features.data[start:stop].tolist())
            )
            f.write(f"{label_field} {pairs}\n")


def train_test_split(
    ds: MultiLabelDataset, test_fraction: float, seed: int = 42
) -> Tuple[MultiLabelDataset, MultiLabelDataset]:
    """
    Seeded shuffle, then floor(n·fraction) examples go to the test part

    Returns:
        (train, test)
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n_test = int(math.floor(ds.n * test_fraction))
    if n_test < 1 or n_test >= ds.n:
        raise ValueError(f"split of n={ds.n} with fraction {test_fraction} leaves an empty part")
    order = RngState(seed=seed, stream_id=7).generator().permutation(ds.n)
    test_idx = np.sort(order[:n_test])
    train_idx = np.sort(order[n_test:])
    return ds.subset(train_idx, f"{ds.name}-train"), ds.subset(test_idx, f"{ds.name}-test")


def gen_planted_linear(spec: SyntheticSpec) -> PlantedLinearData:
    """
    Planted linear labels: X ~ N(0,1), scores = X W + σ·noise, label = score > 0

    W has i.i.d. N(0, 1/p) entries (standard deviation 1/sqrt(p)).
    """
    if spec.kind != "planted_linear":
        raise ValueError(f"expected kind 'planted_linear', got {spec.kind!r}")
    base = RngState(seed=spec.seed, stream_id=11)
    gen_x = base.generator()
    X = gen_x.standard_normal((spec.n, spec.p))
    W = base.advance().generator().standard_normal((spec.p, spec.q)) / math.sqrt(spec.p)
    noise = base.advance().advance().generator().standard_normal((spec.n, spec.q))
    scores = X @ W + spec.noise_sigma * noise
    labels = (scores > 0).astype(np.uint8)
    dataset = MultiLabelDataset(features=sp.csr_matrix(X), labels=labels, name="planted")
    return PlantedLinearData(dataset=dataset, w_true=W, scores=scores)


def estimate_bayes_errors(nu: LinearNu, samples: int = BAYES_SAMPLES, seed: int = 42) -> np.ndarray:
    """Monte-Carlo mean of min(ν, 1-ν) per label over fresh uniform points"""
    return _uniform_average(nu, samples, seed, lambda v: np.minimum(v, 1.0 - v))


def asymptotic_1nn_risk(nu: LinearNu, samples: int = BAYES_SAMPLES, seed: int = 42) -> np.ndarray:
    """Large-sample 1NN risk E[2ν(1-ν)] per label"""
    return _uniform_average(nu, samples, seed, lambda v: 2.0 * v * (1.0 - v))


def _uniform_average(
    nu: LinearNu, samples: int, seed: int, statistic: Callable[[np.ndarray], np.ndarray]
) -> np.ndarray:
    totals = np.zeros(nu.a.shape[0])
    state = RngState(seed=seed, stream_id=13)
    block = 250_000
    for start in range(0, samples, block):
        count = min(block, samples - start)
        points = state.generator().random((count, nu.a.shape[1]))
        totals += statistic(nu(points)).sum(axis=0)
        state = state.advance()
    return totals / samples


def gen_smooth_bayes(spec: SyntheticSpec, bayes_samples: int = BAYES_SAMPLES) -> SmoothBayesData:
    """
    Labels with a known conditional probability ν on the unit square

    x ~ U[0,1]^2; ν_i(x) = clamp(0.5 + scale·(a_i'x + b_i), 0.05, 0.95) with
    a_i ~ N(0, I_2) and b_i = -a_i'c_i, c_i ~ U[0.25, 0.75]^2 so each decision
    boundary crosses the square; y_i ~ Bernoulli(ν_i(x)).
    """
    if spec.kind != "smooth_bayes":
        raise ValueError(f"expected kind 'smooth_bayes', got {spec.kind!r}")
    if spec.p != 2:
        raise ValueError(f"smooth_bayes data is two-dimensional, got p={spec.p}")
    base = RngState(seed=spec.seed, stream_id=17)
    gen_params = base.generator()
    a = gen_params.standard_normal((spec.q, 2))
    centers = gen_params.uniform(0.25, 0.75, size=(spec.q, 2))
    b = -np.sum(a * centers, axis=1)
    nu = LinearNu(a=a, b=b, scale=spec.lipschitz_scale)

    gen_data = base.advance().generator()
    X = gen_data.random((spec.n, 2))
    labels = (gen_data.random((spec.n, spec.q)) < nu(X)).astype(np.uint8)
    dataset = MultiLabelDataset(features=sp.csr_matrix(X), labels=labels, name="smooth")
    bayes = estimate_bayes_errors(nu, bayes_samples, seed=spec.seed)
    return SmoothBayesData(dataset=dataset, bayes_errors=bayes, nu=nu)


def sample_smooth_bayes(nu: LinearNu, n: int, seed: int) -> MultiLabelDataset:
    """Fresh labelled sample from an existing ν (e.g. a shared test set)"""
    gen = RngState(seed=seed, stream_id=19).generator()
    X = gen.random((n, nu.a.shape[1]))
    labels = (gen.random((n, nu.a.shape[0])) < nu(X)).astype(np.uint8)
    return MultiLabelDataset(features=sp.csr_matrix(X), labels=labels, name="smooth-sample")


def generate(spec: SyntheticSpec) -> MultiLabelDataset:
    """Dataset for a SyntheticSpec of either kind"""
    if spec.kind == "planted_linear":
        return gen_planted_linear(spec).dataset
    if spec.kind == "smooth_bayes":
        return gen_smooth_bayes(spec).dataset
    raise ValueError(f"unknown synthetic kind: {spec.kind!r}")
