"""
Experiment orchestration: method × sketch-size × seed grids, δ sweeps,
width reports, geometry diagnostics and c1 calibration
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from .config import ExperimentConfig
from .data import (
    MultiLabelDataset,
    gen_smooth_bayes,
    generate,
    load_sparse_multilabel,
    train_test_split,
)
from .geom import (
    BoundInputs,
    CoverResult,
    DoublingEstimate,
    bound_rhs_1nn,
    bound_rhs_knn,
    doubling_dim_estimate,
    nested_covers,
    normalize_diameter,
    verify_cover,
)
from .linalg import orthonormal_basis
from .metrics import MetricsReport, evaluate, timed, zero_one_per_label_error
from .model import (
    SketchedModel,
    fit_exact,
    fit_knn_baseline,
    fit_sketched,
    predict,
    predict_1nn,
)
from .report import append_csv_rows, write_json
from .theory import (
    CalibrationResult,
    DeltaReport,
    WidthEstimate,
    calibrate_c1,
    delta_optimality_check,
    gaussian_width_mc,
    rademacher_width_mc,
    recommend_sketch_size,
    recommend_sketch_size_walsh_hadamard,
    s_gaussian_width_mc,
)
from .sketch import build_sketch

logger = logging.getLogger(__name__)

SKETCH_METHODS = ("gauss", "rademacher", "wh")
# Fresh sketches per S-Gaussian width estimate
S_WIDTH_SAMPLES_CAP = 200


class GridCell(BaseModel):
    """Outcome of one (method, m, seed) cell"""

    dataset: str
    method: str
    m: Optional[int] = None
    k: int
    seed: int
    status: str = "ok"
    error: Optional[str] = None
    metrics: Optional[MetricsReport] = None
    sketch_s: float = 0.0
    warnings: List[str] = Field(default_factory=list)


class ExperimentResult(BaseModel):
    cells: List[GridCell]
    timings_comparable: bool = True

    @property
    def failed(self) -> int:
        return sum(1 for cell in self.cells if cell.status != "ok")


class DeltaSweepRow(BaseModel):
    """DeltaReport plus the sandwich flag at the configured δ"""

    report: DeltaReport
    delta: float
    sandwich: bool


class WidthReport(BaseModel):
    n: int
    rank: int
    gaussian: WidthEstimate
    rademacher: WidthEstimate
    s_gaussian: Optional[WidthEstimate] = None
    s_variant: Optional[str] = None
    s_m: Optional[int] = None
    c1: float
    recommended_m: Dict[str, int]
    recommended_m_walsh_hadamard: Dict[str, int] = Field(default_factory=dict)


class DiagnoseReport(BaseModel):
    method: str
    m: Optional[int] = None
    scale: float
    metric: str
    epsilons: List[float]
    sizes: List[int]
    covers_valid: bool
    doubling: DoublingEstimate
    V_frobenius: float
    L: float
    bayes_errors: List[float]
    bayes_known: bool
    test_error_1nn: List[float]
    bound_1nn: float
    bound_knn: float
    k: int


def load_dataset(config: ExperimentConfig) -> MultiLabelDataset:
    """Dataset named by the config (file or synthetic spec)"""
    if config.data is not None:
        logger.info(f"📂 Loading dataset {config.data}")
        return load_sparse_multilabel(config.data)
    assert config.synthetic is not None
    logger.info(f"🧪 Generating synthetic {config.synthetic.kind} data (n={config.synthetic.n})")
    return generate(config.synthetic)


def _grid(config: ExperimentConfig) -> List[Tuple[str, Optional[int], int]]:
    cells: List[Tuple[str, Optional[int], int]] = []
    for method in config.methods:
        sizes: List[Optional[int]] = list(config.m_grid) if method in SKETCH_METHODS else [None]
        for m in sizes:
            for seed in config.seeds:
                cells.append((method, m, seed))
    return cells


def fit_method(
    X: np.ndarray, Y: np.ndarray, method: str, m: Optional[int], seed: int, config: ExperimentConfig
) -> Tuple[SketchedModel, float]:
    """
    Fit one method on a training split

    Returns:
        (model, sketch construction seconds)
    """
    if method == "exact":
        return fit_exact(X, Y, k=config.k, theta=config.theta, nonempty=config.nonempty), 0.0
    if method == "knn":
        return fit_knn_baseline(X, Y, k=config.k, theta=config.theta, nonempty=config.nonempty), 0.0
    if method not in SKETCH_METHODS or m is None:
        raise ValueError(f"method {method!r} needs a sketch size")
    op, sketch_s = timed(lambda: build_sketch(method, m, X.shape[0], seed=seed))
    model = fit_sketched(
        X, Y, op, k=config.k, theta=config.theta, nonempty=config.nonempty, mode=config.wh_mode
    )
    model.fit_seconds += sketch_s
    return model, sketch_s


def _run_cell(
    ds: MultiLabelDataset, method: str, m: Optional[int], seed: int, config: ExperimentConfig
) -> GridCell:
    cell = GridCell(dataset=config.dataset_label, method=method, m=m, k=config.k, seed=seed)
    try:
        train, test = train_test_split(ds, config.test_fraction, seed=seed)
        X_train, X_test = train.to_dense(), test.to_dense()
        model, cell.sketch_s = fit_method(X_train, train.labels, method, m, seed, config)
        predictions, predict_s = timed(lambda: predict(model, X_test))
        cell.metrics = evaluate(test.labels, predictions, model.fit_seconds, predict_s, config.f1_empty_score)
        cell.warnings = list(model.warnings)
        logger.info(
            f"✅ {method} m={m} seed={seed}: hamming={cell.metrics.hamming_loss:.4f} "
            f"f1={cell.metrics.example_f1:.4f} fit={cell.metrics.fit_seconds:.3f}s"
        )
    except Exception as e:
        cell.status = "failed"
        cell.error = str(e)
        logger.error(f"❌ {method} m={m} seed={seed} failed: {e}")
    return cell


def run_experiment(config: ExperimentConfig, dataset: Optional[MultiLabelDataset] = None) -> ExperimentResult:
    """
    Run the method × m × seed grid

    Each cell splits with its own seed, fits (timed, sketch construction
    included), predicts the test part (timed) and scores it. `exact` and
    `knn` ignore m. A failing cell is recorded and the grid continues; only
    completed cells reach the CSV, in grid order.

    Args:
        config: Validated experiment settings
        dataset: Already loaded data (loaded from the config when None)

    Returns:
        ExperimentResult
    """
    ds = dataset if dataset is not None else load_dataset(config)
    grid = _grid(config)
    logger.info(f"🚀 Running {len(grid)} grid cells on {config.dataset_label} (n={ds.n}, p={ds.p}, q={ds.q})")

    def completed() -> Iterator[GridCell]:
        if config.parallel_cells:
            with ThreadPoolExecutor() as pool:
                yield from pool.map(lambda c: _run_cell(ds, *c, config), grid)
        else:
            for method, m, seed in grid:
                yield _run_cell(ds, method, m, seed, config)

    cells: List[GridCell] = []
    written = 0
    for cell in completed():
        cells.append(cell)
        # appended as each cell finishes, in grid order
        if config.out_csv and cell.metrics is not None:
            append_csv_rows(config.out_csv, [cell.metrics.to_csv_row(cell.dataset, cell.method, cell.m, cell.k, cell.seed)])
            written += 1

    result = ExperimentResult(cells=cells, timings_comparable=not config.parallel_cells)
    if config.out_csv:
        logger.info(f"💾 {written} rows appended to {config.out_csv}")
    if config.out_json:
        write_json(config.out_json, experiment_summary(config, result))
    if result.failed:
        logger.warning(f"⚠️ {result.failed}/{len(cells)} grid cells failed")
    return result


def experiment_summary(config: ExperimentConfig, result: ExperimentResult) -> Dict[str, Any]:
    """JSON summary of a grid run"""
    return {
        "config": config.model_dump(mode="json"),
        "timings_comparable": result.timings_comparable,
        "failed": result.failed,
        "cells": [cell.model_dump(mode="json") for cell in result.cells],
    }


def _sketch_methods(config: ExperimentConfig) -> List[str]:
    methods = [m for m in config.methods if m in SKETCH_METHODS]
    if not methods:
        raise ValueError(f"no sketch method among {config.methods}; choose from {list(SKETCH_METHODS)}")
    return methods


def run_delta_sweep(config: ExperimentConfig, dataset: Optional[MultiLabelDataset] = None) -> List[DeltaSweepRow]:
    """
    δ-optimality check for every sketch method, m and seed on the full data

    Zero-residual systems are flagged in their reports, never failed. Grid
    sizes larger than n are skipped with a warning.
    """
    ds = dataset if dataset is not None else load_dataset(config)
    X = ds.to_dense()
    Y = ds.labels.astype(np.float64)
    rows: List[DeltaSweepRow] = []
    for method in _sketch_methods(config):
        for m in config.m_grid:
            if m > ds.n:
                logger.warning(f"⚠️ {method}: skipping m={m} > n={ds.n}")
                continue
            for seed in config.seeds:
                report = delta_optimality_check(X, Y, build_sketch(method, m, ds.n, seed=seed))
                rows.append(DeltaSweepRow(report=report, delta=config.delta, sandwich=report.sandwich(config.delta)))
            medians = [r.report.delta_emp for r in rows[-len(config.seeds):] if r.report.delta_emp is not None]
            if medians:
                logger.info(f"📐 {method} m={m}: median delta_emp {float(np.median(medians)):.4f}")
    if config.out_json:
        write_json(config.out_json, [row.model_dump(mode="json") for row in rows])
    return rows


def median_delta_by_m(rows: List[DeltaSweepRow], variant: Optional[str] = None) -> Dict[int, float]:
    """Median delta_emp per sketch size (zero-residual rows skipped)"""
    grouped: Dict[int, List[float]] = {}
    for row in rows:
        if variant is not None and row.report.variant != variant:
            continue
        if row.report.delta_emp is not None:
            grouped.setdefault(row.report.m, []).append(row.report.delta_emp)
    return {m: float(np.median(values)) for m, values in sorted(grouped.items())}


def run_widths(config: ExperimentConfig, dataset: Optional[MultiLabelDataset] = None) -> WidthReport:
    """
    Widths of range(X) ∩ sphere and recommended sketch sizes per δ

    The S-Gaussian width uses the first sketch method in the config (if any)
    at the largest grid size not exceeding n.
    """
    ds = dataset if dataset is not None else load_dataset(config)
    B = orthonormal_basis(ds.to_dense())
    seed = config.seeds[0]
    gaussian = gaussian_width_mc(B, config.width_samples, seed=seed)
    rademacher = rademacher_width_mc(B, config.width_samples, seed=seed)
    logger.info(f"📏 gaussian width {gaussian.mean:.4f} ± {gaussian.std_error:.4f}")

    s_width: Optional[WidthEstimate] = None
    s_variant: Optional[str] = None
    s_m: Optional[int] = None
    sketch_methods = [m for m in config.methods if m in SKETCH_METHODS]
    fitting = [m for m in config.m_grid if m <= ds.n]
    if sketch_methods and fitting:
        s_variant, s_m = sketch_methods[0], max(fitting)
        samples = min(config.width_samples, S_WIDTH_SAMPLES_CAP)
        s_width = s_gaussian_width_mc(B, s_variant, s_m, samples, seed=seed)

    recommended = {
        str(delta): recommend_sketch_size(gaussian.mean, delta, config.c1) for delta in config.deltas
    }
    recommended_wh: Dict[str, int] = {}
    if s_width is not None and s_width.mean > 0:
        recommended_wh = {
            str(delta): recommend_sketch_size_walsh_hadamard(
                s_width.mean, rademacher.mean, ds.n, delta, config.c1
            )
            for delta in config.deltas
        }
    report = WidthReport(
        n=ds.n,
        rank=B.shape[1],
        gaussian=gaussian,
        rademacher=rademacher,
        s_gaussian=s_width,
        s_variant=s_variant,
        s_m=s_m,
        c1=config.c1,
        recommended_m=recommended,
        recommended_m_walsh_hadamard=recommended_wh,
    )
    if config.out_json:
        write_json(config.out_json, report.model_dump(mode="json"))
    return report


def _diagnose_data(config: ExperimentConfig) -> Tuple[MultiLabelDataset, Optional[np.ndarray], Optional[float]]:
    if config.data is None and config.synthetic is not None and config.synthetic.kind == "smooth_bayes":
        generated = gen_smooth_bayes(config.synthetic)
        return generated.dataset, generated.bayes_errors, generated.nu.lipschitz
    return load_dataset(config), None, None


def run_diagnose(config: ExperimentConfig) -> DiagnoseReport:
    """
    Covering curve, doubling estimate and bound values on diameter-1 data

    The model (first configured method at the smallest grid size) is fitted on
    the normalized training split; covers use the embedding metric. Bayes
    errors are known for smooth_bayes data only; otherwise the bounds carry
    no Bayes term and the report says so.
    """
    ds, bayes, lipschitz = _diagnose_data(config)
    seed = config.seeds[0]
    train, test = train_test_split(ds, config.test_fraction, seed=seed)
    X_train, scale = normalize_diameter(train.to_dense())
    X_test = test.to_dense() * scale
    logger.info(f"📐 diameter scale factor {scale:.6g}")

    method = config.methods[0]
    m = min(config.m_grid) if method in SKETCH_METHODS else None
    model, _ = fit_method(X_train, train.labels, method, m, seed, config)

    eps = sorted(config.epsilons, reverse=True)
    covers: List[CoverResult] = nested_covers(X_train, eps, metric="embedding", V_hat=model.V_hat)
    curve = [(cover.epsilon, cover.size) for cover in covers]
    valid = all(verify_cover(X_train, cover, V_hat=model.V_hat) for cover in covers)
    doubling = doubling_dim_estimate(curve)

    # ν's Lipschitz constant in the rescaled coordinates
    L = config.L if lipschitz is None else lipschitz / scale
    bayes_known = bayes is not None
    bayes_errors = [float(b) for b in bayes] if bayes is not None else [0.0] * ds.q
    inputs = BoundInputs(
        q=ds.q,
        n=train.n,
        L=L,
        V_frobenius=float(np.linalg.norm(model.V_hat)),
        D=max(doubling.slope, 1e-9),
        k=config.k,
        bayes_errors=bayes_errors,
    )
    test_error = zero_one_per_label_error(test.labels, predict_1nn(model, X_test))
    report = DiagnoseReport(
        method=method,
        m=m,
        scale=scale,
        metric="embedding",
        epsilons=[e for e, _ in curve],
        sizes=[size for _, size in curve],
        covers_valid=valid,
        doubling=doubling,
        V_frobenius=inputs.V_frobenius,
        L=L,
        bayes_errors=bayes_errors,
        bayes_known=bayes_known,
        test_error_1nn=[float(e) for e in test_error],
        bound_1nn=bound_rhs_1nn(inputs),
        bound_knn=bound_rhs_knn(inputs),
        k=config.k,
    )
    if not bayes_known:
        logger.warning("⚠️ Bayes errors unknown for this data: bounds exclude the Bayes term")
    if config.out_json:
        write_json(config.out_json, report.model_dump(mode="json"))
    return report


def run_calibration(config: ExperimentConfig, dataset: Optional[MultiLabelDataset] = None) -> List[CalibrationResult]:
    """calibrate_c1 for every configured sketch method against the Gaussian width"""
    ds = dataset if dataset is not None else load_dataset(config)
    X = ds.to_dense()
    Y = ds.labels.astype(np.float64)
    width = gaussian_width_mc(orthonormal_basis(X), config.width_samples, seed=config.seeds[0]).mean
    results = [
        calibrate_c1(X, Y, method, config.delta, config.m_grid, config.seeds, width)
        for method in _sketch_methods(config)
    ]
    if config.out_json:
        write_json(config.out_json, [r.model_dump(mode="json") for r in results])
    return results
