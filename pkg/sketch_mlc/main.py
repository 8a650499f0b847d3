#!/usr/bin/env python3
"""
Main entry point for the sketch-and-solve multi-label toolkit

Trains binary-relevance least-squares classifiers on sketched systems,
predicts by kNN in the embedding space, and checks the sketching and
generalization guarantees empirically.
"""
import functools
import os
import sys
from typing import Any, Callable, Dict, List, Optional

import click
import numpy as np
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from sketch_mlc.src.config import ExperimentConfig, build_experiment_config, get_config, load_config
from sketch_mlc.src.data import SyntheticSpec, generate, train_test_split, write_sparse_multilabel
from sketch_mlc.src.experiment import (
    fit_method,
    load_dataset,
    median_delta_by_m,
    run_calibration,
    run_delta_sweep,
    run_diagnose,
    run_experiment,
    run_widths,
)
from sketch_mlc.src.health import EnvironmentChecker
from sketch_mlc.src.metrics import evaluate, timed
from sketch_mlc.src.model import load_model, predict, save_model
from sketch_mlc.src.report import compare_with_reference, read_csv_rows, summary_table, write_json
from sketch_mlc.src.utils import LOG_LEVELS, setup_logging

SYNTHETIC_KINDS = {"planted": "planted_linear", "smooth": "smooth_bayes"}

console = Console()


def _int_list(value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


def _float_list(value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


def experiment_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Flags shared by every experiment subcommand; all mirror config keys"""
    options = [
        click.option("--data", type=click.Path(), help="Sparse multi-label dataset file"),
        click.option("--synthetic", type=click.Choice(list(SYNTHETIC_KINDS)), help="Synthetic generator"),
        click.option("--n", "n_rows", type=int, help="Synthetic examples"),
        click.option("--p", "n_features", type=int, help="Synthetic features"),
        click.option("--q", "n_labels", type=int, help="Synthetic labels"),
        click.option("--noise", type=float, help="Synthetic noise level"),
        click.option("--seed", type=int, help="Seed (synthetic data, single-run commands)"),
        click.option("--seeds", help="Comma-separated grid seeds"),
        click.option("--method", "methods", help="Comma-separated methods (exact,gauss,rademacher,wh,knn)"),
        click.option("--m", "m_single", type=int, help="Single sketch size"),
        click.option("--m-grid", help="Comma-separated sketch sizes"),
        click.option("--k", type=int, help="Neighbours for prediction"),
        click.option("--theta", type=float, help="Per-label vote threshold (fraction of k)"),
        click.option("--nonempty/--allow-empty", default=None, help="Force at least one label per prediction"),
        click.option("--f1-empty-score", "f1_empty_score", type=float,
                     help="Example-F1 score when truth and prediction are both empty"),
        click.option("--test-fraction", type=float, help="Test split fraction"),
        click.option("--out-json", type=click.Path(), help="JSON output path"),
        click.option("--out-csv", type=click.Path(), help="CSV output path (rows appended)"),
        click.option("--c1", type=float, help="Sketch-size constant"),
        click.option("--delta", type=float, help="Target δ"),
        click.option("--L", "lipschitz", type=float, help="Assumed Lipschitz constant of ν"),
        click.option("--epsilons", help="Comma-separated cover radii"),
        click.option("--deltas", help="Comma-separated δ values for size recommendations"),
        click.option("--width-samples", type=int, help="Monte-Carlo samples per width"),
        click.option("--wh-mode", type=click.Choice(["full", "pruned"]), help="Walsh-Hadamard application path"),
        click.option("--parallel-cells", is_flag=True, default=None, help="Run grid cells concurrently"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _build_config(ctx: click.Context, opts: Dict[str, Any]) -> ExperimentConfig:
    synthetic: Optional[Dict[str, Any]] = None
    spec_fields = {
        "kind": SYNTHETIC_KINDS.get(opts["synthetic"]) if opts["synthetic"] else None,
        "n": opts["n_rows"],
        "p": opts["n_features"],
        "q": opts["n_labels"],
        "noise_sigma": opts["noise"],
        "seed": opts["seed"],
    }
    if opts["synthetic"] is not None:
        synthetic = {key: value for key, value in spec_fields.items() if value is not None}
        # smooth data lives on the unit square
        if opts["synthetic"] == "smooth" and opts["n_features"] is None:
            synthetic["p"] = 2
    m_grid = [opts["m_single"]] if opts["m_single"] is not None else _int_list(opts["m_grid"])
    seeds = _int_list(opts["seeds"])
    if seeds is None and opts["seed"] is not None:
        seeds = [opts["seed"]]
    overrides = {
        "data": opts["data"],
        "synthetic": synthetic,
        "methods": opts["methods"].split(",") if opts["methods"] else None,
        "m_grid": m_grid,
        "k": opts["k"],
        "theta": opts["theta"],
        "nonempty": opts["nonempty"],
        "f1_empty_score": opts["f1_empty_score"],
        "seeds": seeds,
        "test_fraction": opts["test_fraction"],
        "out_json": opts["out_json"],
        "out_csv": opts["out_csv"],
        "c1": opts["c1"],
        "delta": opts["delta"],
        "L": opts["lipschitz"],
        "epsilons": _float_list(opts["epsilons"]),
        "deltas": _float_list(opts["deltas"]),
        "width_samples": opts["width_samples"],
        "wh_mode": opts["wh_mode"],
        "parallel_cells": opts["parallel_cells"],
    }
    return build_experiment_config(ctx.obj["config"].get("experiment"), overrides)


def handle_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    """Configuration and input errors end the command with exit code 1"""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except (ValidationError, ValueError, FileNotFoundError) as e:
            console.print(f"❌ {e}", style="bold red")
            sys.exit(1)

    return wrapper


@click.group()
@click.option("--config", "-c", "config_path", default=None, help="Configuration file path")
@click.option("--log-level", type=click.Choice(list(LOG_LEVELS)), default=None,
              help="Logging level")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], log_level: Optional[str]) -> None:
    """
    📐 Sketch-and-solve multi-label classification

    Least squares on sketched systems, kNN prediction in the embedding
    space, and empirical checks of the sketching guarantees.
    """
    ctx.ensure_object(dict)
    try:
        if config_path is not None:
            config = load_config(config_path)
        elif os.environ.get("SKETCH_MLC_CONFIG"):
            config = get_config()
        else:
            config = {}
    except Exception as e:
        console.print(f"❌ Failed to load configuration: {e}", style="bold red")
        sys.exit(1)
    ctx.obj["config"] = config
    level = log_level or config.get("environment", {}).get("log_level", "INFO")
    try:
        ctx.obj["logger"] = setup_logging(level)
    except ValueError as e:
        console.print(f"❌ {e}", style="bold red")
        sys.exit(1)


def _metrics_table(title: str, rows: List[List[str]], headers: List[str]) -> Table:
    table = Table(title=title)
    for header in headers:
        table.add_column(header, style="cyan" if header in ("method", "dataset") else None)
    for row in rows:
        table.add_row(*row)
    return table


@cli.command()
@experiment_options
@click.option("--model-out", type=click.Path(), required=True, help="Where to write the model file")
@click.pass_context
@handle_errors
def train(ctx: click.Context, model_out: str, **opts: Any) -> None:
    """🏋️ Fit one model on the training split and save it"""
    config = _build_config(ctx, opts)
    method, seed = config.methods[0], config.seeds[0]
    m = config.m_grid[0] if method in ("gauss", "rademacher", "wh") else None
    train_part, _ = train_test_split(load_dataset(config), config.test_fraction, seed=seed)
    model, sketch_s = fit_method(train_part.to_dense(), train_part.labels, method, m, seed, config)
    save_model(model, model_out)
    for warning in model.warnings:
        console.print(f"⚠️ {warning}", style="bold yellow")
    console.print(Panel(
        f"Method: [cyan]{method}[/cyan]  m: [cyan]{m}[/cyan]  seed: [cyan]{seed}[/cyan]\n"
        f"Fit: [green]{model.fit_seconds:.4f}s[/green] (sketch {sketch_s:.4f}s)\n"
        f"Model: [green]{model_out}[/green]",
        title="🏋️ Training complete",
        border_style="green",
    ))


@cli.command(name="eval")
@experiment_options
@click.option("--model", "model_path", type=click.Path(exists=True), required=True, help="Model file")
@click.pass_context
@handle_errors
def evaluate_model(ctx: click.Context, model_path: str, **opts: Any) -> None:
    """📊 Evaluate a saved model on the test split"""
    config = _build_config(ctx, opts)
    seed = config.seeds[0]
    train_part, test_part = train_test_split(load_dataset(config), config.test_fraction, seed=seed)
    model = load_model(model_path, train_part.to_dense(), train_part.labels)
    predictions, predict_s = timed(lambda: predict(model, test_part.to_dense()))
    report = evaluate(test_part.labels, predictions, model.fit_seconds, predict_s, config.f1_empty_score)
    console.print(_metrics_table(
        "📊 Evaluation",
        [[f"{report.hamming_loss:.4f}", f"{report.example_f1:.4f}", f"{report.fit_seconds:.4f}",
          f"{report.predict_seconds:.4f}"]],
        ["hamming", "example_f1", "fit_s", "predict_s"],
    ))
    if config.out_json:
        write_json(config.out_json, report.model_dump(mode="json"))


@cli.command()
@experiment_options
@click.pass_context
@handle_errors
def sweep(ctx: click.Context, **opts: Any) -> None:
    """🚀 Run the method × sketch-size × seed grid"""
    config = _build_config(ctx, opts)
    console.print(Panel(
        f"Dataset: [cyan]{config.dataset_label}[/cyan]\n"
        f"Methods: [cyan]{', '.join(config.methods)}[/cyan]\n"
        f"Sketch sizes: [cyan]{config.m_grid}[/cyan]  Seeds: [cyan]{config.seeds}[/cyan]\n"
        f"k: [cyan]{config.k}[/cyan]  θ: [cyan]{config.theta}[/cyan]",
        title="🚀 Experiment grid",
        border_style="cyan",
    ))
    result = run_experiment(config)
    rows = []
    for cell in result.cells:
        if cell.metrics is None:
            rows.append([cell.method, str(cell.m or ""), str(cell.seed), "-", "-", "-", f"❌ {cell.error}"])
        else:
            rows.append([
                cell.method, str(cell.m or ""), str(cell.seed),
                f"{cell.metrics.hamming_loss:.4f}", f"{cell.metrics.example_f1:.4f}",
                f"{cell.metrics.fit_seconds:.4f}", "✅",
            ])
    console.print(_metrics_table(
        "📊 Grid results", rows, ["method", "m", "seed", "hamming", "example_f1", "fit_s", "status"]
    ))
    if result.failed:
        console.print(f"⚠️ {result.failed} grid cells failed", style="bold yellow")
        sys.exit(2)
    console.print("✅ All grid cells completed", style="bold green")


@cli.command(name="delta-check")
@experiment_options
@click.pass_context
@handle_errors
def delta_check(ctx: click.Context, **opts: Any) -> None:
    """📐 Compare exact and sketched optima over the sketch-size grid"""
    config = _build_config(ctx, opts)
    rows = run_delta_sweep(config)
    variants = sorted({row.report.variant for row in rows})
    table_rows = []
    for variant in variants:
        medians = median_delta_by_m(rows, variant)
        for m, median in medians.items():
            hits = [row.sandwich for row in rows if row.report.variant == variant and row.report.m == m]
            table_rows.append([variant, str(m), f"{median:.4f}", f"{np.mean(hits):.2f}"])
    zero = sum(1 for row in rows if row.report.zero_residual)
    if zero:
        console.print(f"⚠️ {zero} runs on a zero-residual system (delta_emp undefined)", style="bold yellow")
    console.print(_metrics_table(
        f"📐 δ-optimality (δ={config.delta})", table_rows, ["variant", "m", "median delta_emp", "sandwich rate"]
    ))


@cli.command()
@experiment_options
@click.pass_context
@handle_errors
def widths(ctx: click.Context, **opts: Any) -> None:
    """📏 Width estimates and recommended sketch sizes"""
    config = _build_config(ctx, opts)
    report = run_widths(config)
    estimates = [report.gaussian, report.rademacher] + ([report.s_gaussian] if report.s_gaussian else [])
    console.print(_metrics_table(
        f"📏 Widths (n={report.n}, rank={report.rank})",
        [[e.kind, f"{e.mean:.4f}", f"{e.std_error:.4f}", str(e.samples)] for e in estimates],
        ["kind", "mean", "std_error", "samples"],
    ))
    rows = [[delta, str(m), str(report.recommended_m_walsh_hadamard.get(delta, ""))]
            for delta, m in report.recommended_m.items()]
    console.print(_metrics_table(f"🎯 Recommended m (c1={report.c1})", rows, ["δ", "subgaussian", "walsh_hadamard"]))


@cli.command()
@experiment_options
@click.pass_context
@handle_errors
def diagnose(ctx: click.Context, **opts: Any) -> None:
    """🔬 Covering numbers, doubling dimension and bound values"""
    config = _build_config(ctx, opts)
    report = run_diagnose(config)
    console.print(_metrics_table(
        f"🔬 Greedy covers ({report.metric} metric, diameter scale {report.scale:.4g})",
        [[f"{e:g}", str(size)] for e, size in zip(report.epsilons, report.sizes)],
        ["epsilon", "size"],
    ))
    status = "✅" if report.covers_valid else "❌"
    console.print(Panel(
        f"Doubling estimate: [cyan]{report.doubling.slope:.3f}[/cyan] (residual {report.doubling.residual:.3g})\n"
        f"Covers verified: {status}\n"
        f"1NN bound: [green]{report.bound_1nn:.4f}[/green]  kNN bound (k={report.k}): "
        f"[green]{report.bound_knn:.4f}[/green]\n"
        f"1NN test error: [cyan]{sum(report.test_error_1nn):.4f}[/cyan] (summed over labels)",
        title="🔬 Diagnostics",
        border_style="cyan",
    ))


@cli.command()
@experiment_options
@click.option("--out", "out_path", type=click.Path(), required=True, help="Dataset file to write")
@click.pass_context
@handle_errors
def gen(ctx: click.Context, out_path: str, **opts: Any) -> None:
    """🧪 Write a synthetic dataset"""
    config = _build_config(ctx, opts)
    if config.synthetic is None:
        raise ValueError("gen needs --synthetic (or a synthetic section in the config)")
    spec: SyntheticSpec = config.synthetic
    dataset = generate(spec)
    write_sparse_multilabel(dataset, out_path)
    console.print(f"✅ Wrote {spec.kind} data (n={dataset.n}, p={dataset.p}, q={dataset.q}) to {out_path}",
                  style="bold green")


@cli.command()
@click.option("--csv", "csv_path", type=click.Path(exists=True), required=True, help="Results CSV")
@click.option("--metric", type=click.Choice(["hamming", "example_f1", "fit_s", "predict_s"]), default="hamming")
@click.option("--reference/--no-reference", default=False, help="Compare with published corel5k values")
@click.option("--dataset", default="corel5k", help="Dataset name for the reference comparison")
@handle_errors
def report(csv_path: str, metric: str, reference: bool, dataset: str) -> None:
    """📋 Summary tables from a results CSV"""
    rows = read_csv_rows(csv_path)
    console.print(Panel(summary_table(rows, metric), title=f"📋 Median {metric} over seeds", border_style="cyan"))
    if not reference:
        return
    comparison = compare_with_reference(rows, dataset)
    if not comparison["cells"]:
        console.print(f"⚠️ No rows for {dataset} in {csv_path}", style="bold yellow")
        return
    console.print(_metrics_table(
        "📚 Published values",
        [[c["cell"], f"{c['hamming']:.4f}", f"{c['hamming_reference']:.4f}", f"{c['example_f1']:.4f}",
          f"{c['example_f1_reference']:.4f}", "✅" if c["within_tolerance"] else "❌"]
         for c in comparison["cells"]],
        ["cell", "hamming", "published", "example_f1", "published", "within"],
    ))
    if comparison["ordering_holds"] is not None:
        status = "✅ holds" if comparison["ordering_holds"] else "❌ fails"
        console.print(f"Ordering check: {status}")


@cli.command()
@click.option("--quick", is_flag=True, help="Benchmark a shorter FWHT column")
def health(quick: bool) -> None:
    """🔍 Check environment health"""
    console.print(Panel("Checking Python, packages and FWHT speed...", title="🔍 Health Check",
                        border_style="cyan"))
    checker = EnvironmentChecker(bench_length=1 << 16) if quick else EnvironmentChecker()
    results = checker.run_full_check()
    checker.print_health_report(console, results)
    if checker.health_score < checker.max_score:
        console.print("⚠️ Health check indicates issues.", style="bold yellow")
        sys.exit(1)
    console.print("✅ Environment is healthy and ready!", style="bold green")


@cli.command()
@experiment_options
@click.pass_context
@handle_errors
def calibrate(ctx: click.Context, **opts: Any) -> None:
    """🎛️ Calibrate c1 from the δ-sandwich frequency over the sketch-size grid"""
    config = _build_config(ctx, opts)
    for result in run_calibration(config):
        rows = [[str(m), f"{fraction:.2f}"] for m, fraction in sorted(result.fractions.items())]
        console.print(_metrics_table(f"🎛️ {result.variant} (δ={result.delta})", rows, ["m", "sandwich rate"]))
        if result.smallest_m is None:
            console.print("⚠️ No grid size reached the target frequency", style="bold yellow")
        else:
            console.print(f"✅ smallest m = {result.smallest_m}, implied c1 = {result.implied_c1:.4f}",
                          style="bold green")


if __name__ == "__main__":
    cli()
