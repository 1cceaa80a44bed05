"""
CDR Flare Forecast - Main Entry Point

Command-line pipeline: synthetic data, feature extraction, AR-level splits,
both trainers, evaluation, threshold scans, reward sweeps, Shapley
explanations, paired t-tests and comparison with external forecasts.

Every command writes its outputs plus a ``manifest.json`` into one run
directory.
"""

import functools
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
import typer
from rich.table import Table

from src.config.config import AppConfig, load_config
from src.config.settings import settings
from src.models.attribution import ShapConfig
from src.models.dataset import ARRecord, CVSplit, StandardizationStats
from src.models.metrics import MetricReport
from src.models.run import RunConfig
from src.models.training import REWARD_PRESETS, FoldOutcome, Rewards
from src.networks.base import Classifier
from src.networks.checkpoint import build_model, apply_checkpoint, load_model, save_model
from src.services import (
    get_evaluation_service,
    get_explain_service,
    get_sweep_service,
)
from src.services.evaluation_service import load_external_probabilities
from src.services.sweep_service import parse_range
from src.services.training_service import train_folds
from src.tools import artifact_store, dataset_io, metrics
from src.tools.features import extract_index
from src.tools.splits import class_tally, make_cv_splits, subset
from src.tools.synthetic import generate_synthetic
from src.utils.errors import ConfigError, DataError, FlareForecastError
from src.utils.log import console, setup_logging

app = typer.Typer(help="Class-dependent-reward solar flare forecasting toolkit.")

FittedModel = Tuple[Classifier, StandardizationStats, dict]


def handle_errors(func):
    """Report toolkit errors as one red line and exit with the error's code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except FlareForecastError as e:
            console.print(f"[bold red]Error ({e.error_type}):[/bold red] {e}")
            raise typer.Exit(e.exit_code)

    return wrapper


@app.callback()
def main(
    log_level: Optional[str] = typer.Option(None, help="Overrides CDR_LOG_LEVEL"),
    log_file: Optional[str] = typer.Option(None, help="Overrides CDR_LOG_FILE"),
):
    """Configure logging for every command."""
    if log_level:
        settings.LOG_LEVEL = log_level
    if log_file:
        settings.LOG_FILE = log_file
    try:
        settings.validate_settings()
    except ConfigError as e:
        console.print(f"[bold red]Error ({e.error_type}):[/bold red] {e}")
        raise typer.Exit(e.exit_code)
    setup_logging(settings.LOG_LEVEL, settings.LOG_FILE)


# Helpers -------------------------------------------------------------------


def _seed(seed: Optional[int]) -> int:
    return settings.SEED if seed is None else seed


def _jobs(jobs: Optional[int]) -> int:
    jobs = settings.JOBS if jobs is None else jobs
    if jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    return jobs


def _finish(
    run_dir: Path,
    command: str,
    seed: int,
    inputs: Dict[str, Optional[Path]],
    options: dict,
    output_dir: Optional[Path],
) -> None:
    given = {k: v for k, v in inputs.items() if v is not None}
    run = RunConfig(
        command=command,
        seed=seed,
        inputs={k: str(v) for k, v in given.items()},
        options=options,
        output_dir=str(output_dir) if output_dir else str(run_dir),
    )
    manifest = artifact_store.write_manifest(run_dir, run, inputs=given)
    console.print(f"[green]✓[/green] Outputs written to {run_dir} ({manifest.name})")


def _load_records(dataset: Path, features: Optional[str]) -> List[ARRecord]:
    records = dataset_io.load_csv(dataset)
    if features:
        records = dataset_io.select_features(records, dataset_io.resolve_feature_set(features))
    return records


def _load_splits(splits: Path, folds: Optional[int], split_index: int) -> List[CVSplit]:
    all_splits = dataset_io.read_split_manifest(splits)
    if folds is None:
        if not 0 <= split_index < len(all_splits):
            raise ConfigError(f"--split-index must lie in 0..{len(all_splits) - 1}")
        return [all_splits[split_index]]
    if not 1 <= folds <= len(all_splits):
        raise ConfigError(f"--folds must lie in 1..{len(all_splits)}")
    return all_splits[:folds]


def _load_models(model: Optional[Path], run: Optional[Path]) -> List[FittedModel]:
    if (model is None) == (run is None):
        raise ConfigError("give exactly one of --model or --run")
    paths = [model] if model else sorted(run.glob("fold_*/model.json"))
    if not paths:
        raise DataError(f"no fold_*/model.json checkpoints under {run}")
    fitted = []
    for path in paths:
        classifier, _, extra = load_model(path)
        if "stats" not in extra:
            raise DataError(f"{path} carries no standardization statistics")
        fitted.append((classifier, StandardizationStats.model_validate(extra["stats"]), extra))
    return fitted


def _run_seed(fitted: List[FittedModel]) -> int:
    classifier, _, extra = fitted[0]
    return int(extra.get("run_seed", classifier.seed))


def _metrics_seed(path: Path) -> Optional[int]:
    """Seed of the run that wrote a fold_metrics.csv, when its manifest sits beside it."""
    if not (path.parent / artifact_store.MANIFEST_NAME).exists():
        return None
    return artifact_store.load_manifest(path.parent).run.seed


def _records_for(
    records: List[ARRecord], extra: dict, splits: Optional[List[CVSplit]], which: str
) -> List[ARRecord]:
    """The model's feature columns on one set of its own split."""
    records = dataset_io.select_features(records, extra["features"])
    if which == "all" or splits is None:
        return records
    fold = extra["fold"]
    matching = [s for s in splits if s.index == fold]
    if not matching:
        raise DataError(f"split {fold} is not in the split manifest")
    return subset(records, getattr(matching[0], which))


def _report_table(title: str, rows: Sequence[Tuple[str, MetricReport]]) -> Table:
    table = Table(title=title, show_header=True, header_style="bold magenta")
    for column in ("Model", "Recall", "FPR", "TSS", "BS", "BSS", "TP", "TN", "FP", "FN"):
        table.add_column(column, justify="right" if column != "Model" else "left")
    for name, r in rows:
        c = r.counts
        table.add_row(
            name,
            *(f"{v:.3f}" for v in (r.recall, r.fpr, r.tss, r.bs, r.bss)),
            *(str(v) for v in (c.TP, c.TN, c.FP, c.FN)),
        )
    return table


# Commands ------------------------------------------------------------------


@app.command()
@handle_errors
def synth(
    out: Optional[Path] = typer.Option(None, help="Run directory (default <runs>/synth)"),
    seed: Optional[int] = typer.Option(None, help="Generator seed"),
    config: Optional[Path] = typer.Option(None, help="JSON run config"),
    separation: Optional[float] = typer.Option(None, help="Override class separation"),
):
    """Generate a synthetic SHARP-like AR dataset."""
    seed = _seed(seed)
    app_config = load_config(config)
    generator = app_config.synthetic
    if separation is not None:
        generator = generator.model_copy(update={"separation": separation})
    run_dir = artifact_store.resolve_run_dir(out, "synth")

    records = generate_synthetic(generator, seed)
    dataset_io.write_csv(records, run_dir / "dataset.csv")
    tally = class_tally(records, [r.ar_id for r in records])
    console.print(f"Generated {len(records)} ARs: {tally}")
    _finish(run_dir, "synth", seed, {"config": config}, generator.model_dump(), out)


@app.command("extract-features")
@handle_errors
def extract_features(
    index: Path = typer.Option(
        ..., help="Index CSV: ar_id,class_label,multi_ar,magnetograms[,vector_maps]"
    ),
    out: Optional[Path] = typer.Option(None, help="Run directory"),
    levels: int = typer.Option(5, help="Haar decomposition levels"),
):
    """Compute gradient, wavelet, flux (and SHARP sum) features from grid files."""
    run_dir = artifact_store.resolve_run_dir(out, "extract")
    records = extract_index(index, levels)
    dataset_io.write_csv(records, run_dir / "dataset.csv")
    console.print(f"Extracted {len(records[0].feature_names)} features for {len(records)} ARs")
    _finish(run_dir, "extract-features", 0, {"index": index}, {"levels": levels}, out)


@app.command()
@handle_errors
def split(
    dataset: Path = typer.Option(..., help="Dataset CSV"),
    out: Optional[Path] = typer.Option(None, help="Run directory"),
    n_splits: Optional[int] = typer.Option(None, help="Number of CV datasets"),
    seed: Optional[int] = typer.Option(None, help="Split seed"),
    config: Optional[Path] = typer.Option(None, help="JSON run config"),
):
    """Build AR-level train/validation/test splits."""
    seed = _seed(seed)
    split_config = load_config(config).split
    if n_splits is not None:
        split_config = split_config.model_copy(update={"n_splits": n_splits})
    run_dir = artifact_store.resolve_run_dir(out, "split")

    records = dataset_io.load_csv(dataset)
    splits = make_cv_splits(records, split_config.n_splits, split_config.ratios, seed)
    dataset_io.write_split_manifest(splits, run_dir / "splits.json")

    rows = []
    for s in splits:
        for name in ("train", "val", "test"):
            rows.append({"split": s.index, "set": name, **class_tally(records, getattr(s, name))})
    artifact_store.save_table(run_dir, "split_sizes.csv", pd.DataFrame(rows))

    table = Table(title="Split 0 class counts", header_style="bold magenta")
    for column in ("Set", "NOFLARE", "C", "M", "X"):
        table.add_column(column, justify="right")
    for row in rows[:3]:
        table.add_row(row["set"], *(str(row[k]) for k in ("NOFLARE", "C", "M", "X")))
    console.print(table)
    _finish(
        run_dir,
        "split",
        seed,
        {"dataset": dataset, "config": config},
        split_config.model_dump(),
        out,
    )


def _train(
    trainer: str,
    dataset: Path,
    splits: Path,
    out: Optional[Path],
    split_index: int,
    folds: Optional[int],
    features: Optional[str],
    seed: Optional[int],
    config: Optional[Path],
    jobs: Optional[int],
) -> None:
    seed = _seed(seed)
    app_config: AppConfig = load_config(config)
    trainer_config = app_config.dl if trainer == "dl" else app_config.cdr
    command = f"train-{trainer}"
    run_dir = artifact_store.resolve_run_dir(out, command)

    records = _load_records(dataset, features)
    chosen = _load_splits(splits, folds, split_index)
    outcomes: List[FoldOutcome] = train_folds(
        records,
        chosen,
        app_config.network,
        trainer,
        trainer_config,
        seed,
        jobs=_jobs(jobs),
        threshold=app_config.eval.threshold,
    )

    feature_names = list(records[0].feature_names)
    network = app_config.network.model_copy(update={"F": len(feature_names)})
    for outcome in outcomes:
        fold_dir = run_dir / f"fold_{outcome.fold}"
        model = apply_checkpoint(build_model(network, outcome.seed), outcome.result.checkpoint)
        extra = {
            "trainer": trainer,
            "fold": outcome.fold,
            "run_seed": seed,
            "features": feature_names,
            "stats": outcome.stats.model_dump(),
        }
        save_model(fold_dir / "model.json", model, outcome.result.checkpoint, extra)
        log_frame = pd.DataFrame([row.model_dump() for row in outcome.result.log.rows])
        artifact_store.save_table(fold_dir, "train_log.csv", log_frame)

    reports = [o.test_report for o in outcomes]
    fold_ids = [o.fold for o in outcomes]
    artifact_store.save_table(
        run_dir, "fold_metrics.csv", metrics.reports_to_frame(reports, fold_ids)
    )
    console.print(
        _report_table(
            f"{command} test metrics", [(f"fold {f}", r) for f, r in zip(fold_ids, reports)]
        )
    )
    if len(reports) >= 2:
        aggregate = metrics.aggregate_folds(reports)
        artifact_store.save_json(run_dir, "summary.json", aggregate.model_dump())
        console.print(
            f"TSS {aggregate.fmt('tss')}  BSS {aggregate.fmt('bss')}  over {len(reports)} folds"
        )

    options = {
        "trainer": trainer_config.model_dump(),
        "network": network.model_dump(),
        "folds": fold_ids,
        "features": feature_names,
    }
    inputs = {"dataset": dataset, "splits": splits, "config": config}
    _finish(run_dir, command, seed, inputs, options, out)


@app.command("train-dl")
@handle_errors
def train_dl(
    dataset: Path = typer.Option(..., help="Dataset CSV"),
    splits: Path = typer.Option(..., help="splits.json from the split command"),
    out: Optional[Path] = typer.Option(None, help="Run directory"),
    split_index: int = typer.Option(0, help="Split to train on when --folds is not given"),
    folds: Optional[int] = typer.Option(None, help="Train on the first k splits"),
    features: Optional[str] = typer.Option(None, help="Feature set name or comma list"),
    seed: Optional[int] = typer.Option(None, help="Base seed"),
    config: Optional[Path] = typer.Option(None, help="JSON run config"),
    jobs: Optional[int] = typer.Option(None, help="Parallel folds"),
):
    """Train with weighted cross-entropy and checkpoint-on-best-validation."""
    _train("dl", dataset, splits, out, split_index, folds, features, seed, config, jobs)


@app.command("train-cdr")
@handle_errors
def train_cdr(
    dataset: Path = typer.Option(..., help="Dataset CSV"),
    splits: Path = typer.Option(..., help="splits.json from the split command"),
    out: Optional[Path] = typer.Option(None, help="Run directory"),
    split_index: int = typer.Option(0, help="Split to train on when --folds is not given"),
    folds: Optional[int] = typer.Option(None, help="Train on the first k splits"),
    features: Optional[str] = typer.Option(None, help="Feature set name or comma list"),
    seed: Optional[int] = typer.Option(None, help="Base seed"),
    config: Optional[Path] = typer.Option(None, help="JSON run config"),
    jobs: Optional[int] = typer.Option(None, help="Parallel folds"),
):
    """Train with class-dependent rewards and experience replay."""
    _train("cdr", dataset, splits, out, split_index, folds, features, seed, config, jobs)


@app.command("eval")
@handle_errors
def eval_command(
    dataset: Path = typer.Option(..., help="Dataset CSV"),
    splits: Path = typer.Option(..., help="splits.json used in training"),
    model: Optional[Path] = typer.Option(None, help="One model.json"),
    run: Optional[Path] = typer.Option(None, help="Training run directory (all folds)"),
    which: str = typer.Option("test", "--set", help="test, val or train"),
    threshold: Optional[float] = typer.Option(None, help="Decision threshold"),
    config: Optional[Path] = typer.Option(None, help="JSON run config"),
    out: Optional[Path] = typer.Option(None, help="Run directory"),
):
    """Score trained models: Recall, FPR, TSS, BS, BSS."""
    if which not in ("test", "val", "train"):
        raise ConfigError("--set must be test, val or train")
    threshold = load_config(config).eval.threshold if threshold is None else threshold
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"threshold must lie in [0, 1], got {threshold}")
    run_dir = artifact_store.resolve_run_dir(out, "eval")
    records = dataset_io.load_csv(dataset)
    split_list = dataset_io.read_split_manifest(splits)
    service = get_evaluation_service()

    fitted = _load_models(model, run)
    reports, fold_ids = [], []
    for classifier, stats, extra in fitted:
        subset_records = _records_for(records, extra, split_list, which)
        reports.append(service.evaluate_model(classifier, stats, subset_records, threshold))
        fold_ids.append(extra.get("fold", 0))

    artifact_store.save_table(
        run_dir, "fold_metrics.csv", metrics.reports_to_frame(reports, fold_ids)
    )
    artifact_store.save_json(run_dir, "report.json", [r.model_dump() for r in reports])
    if len(reports) >= 2:
        aggregate = metrics.aggregate_folds(reports)
        artifact_store.save_json(run_dir, "summary.json", aggregate.model_dump())
        console.print(f"TSS {aggregate.fmt('tss')}  BSS {aggregate.fmt('bss')}")
    console.print(
        _report_table(f"{which} metrics", [(f"fold {f}", r) for f, r in zip(fold_ids, reports)])
    )
    _finish(
        run_dir,
        "eval",
        _run_seed(fitted),
        {"dataset": dataset, "splits": splits, "model": model, "run": run},
        {"set": which, "threshold": threshold, "model_seeds": [m.seed for m, _, _ in fitted]},
        out,
    )


@app.command()
@handle_errors
def scan(
    dataset: Path = typer.Option(..., help="Dataset CSV"),
    splits: Path = typer.Option(..., help="splits.json used in training"),
    model: Optional[Path] = typer.Option(None, help="One model.json"),
    run: Optional[Path] = typer.Option(None, help="Training run directory (all folds)"),
    which: str = typer.Option("test", "--set", help="test, val or train"),
    out: Optional[Path] = typer.Option(None, help="Run directory"),
):
    """TSS at every probability threshold from 0% to 100% (fold-averaged)."""
    run_dir = artifact_store.resolve_run_dir(out, "scan")
    records = dataset_io.load_csv(dataset)
    split_list = dataset_io.read_split_manifest(splits)
    service = get_evaluation_service()

    fitted = _load_models(model, run)
    scans = [
        service.scan_model(classifier, stats, _records_for(records, extra, split_list, which))
        for classifier, stats, extra in fitted
    ]
    averaged = metrics.mean_scan(scans)
    best = metrics.best_threshold(averaged)
    artifact_store.save_table(run_dir, "scan.csv", metrics.scan_to_frame(averaged))
    artifact_store.save_json(run_dir, "best_threshold.json", best.model_dump())
    console.print(
        f"Best threshold {best.threshold_pct}%: TSS {best.tss:.3f} "
        f"(recall {best.recall:.3f}, FPR {best.fpr:.3f})"
    )
    _finish(
        run_dir,
        "scan",
        _run_seed(fitted),
        {"dataset": dataset, "splits": splits, "model": model, "run": run},
        {"set": which, "model_seeds": [m.seed for m, _, _ in fitted]},
        out,
    )


@app.command()
@handle_errors
def sweep(
    which: str = typer.Option(..., help="Reward to perturb: TP, TN, FP or FN"),
    value_range: str = typer.Option(..., "--range", help="start:stop[:step], inclusive"),
    dataset: Path = typer.Option(..., help="Dataset CSV"),
    splits: Path = typer.Option(..., help="splits.json"),
    folds: int = typer.Option(1, help="Folds per reward value"),
    base: Optional[str] = typer.Option(None, help="Reward preset: transformer, cnn, cnn_bilstm"),
    features: Optional[str] = typer.Option(None, help="Feature set name or comma list"),
    seed: Optional[int] = typer.Option(None, help="Base seed"),
    config: Optional[Path] = typer.Option(None, help="JSON run config"),
    jobs: Optional[int] = typer.Option(None, help="Parallel cells"),
    out: Optional[Path] = typer.Option(None, help="Run directory"),
):
    """Reward-sensitivity table: TSS and BSS per perturbed reward value."""
    seed = _seed(seed)
    which = which.upper()
    app_config = load_config(config)
    cdr_config = app_config.cdr
    if base is not None:
        if base not in REWARD_PRESETS:
            raise ConfigError(f"unknown reward preset '{base}'")
        cdr_config = cdr_config.model_copy(update={"rewards": Rewards(**REWARD_PRESETS[base])})
    run_dir = artifact_store.resolve_run_dir(out, "sweep")

    records = _load_records(dataset, features)
    split_list = dataset_io.read_split_manifest(splits)
    service = get_sweep_service()
    table = service.sweep_rewards(
        cdr_config,
        which,
        parse_range(value_range),
        records,
        split_list,
        app_config.network,
        n_folds=folds,
        seed=seed,
        jobs=_jobs(jobs),
        threshold=app_config.eval.threshold,
    )
    artifact_store.save_table(run_dir, "sweep.csv", service.to_frame(table))
    artifact_store.save_json(run_dir, "sweep.json", table.model_dump())

    view = Table(title=f"{which} reward sweep", header_style="bold magenta")
    for column in (which, "TSS", "BSS", ""):
        view.add_column(column, justify="right")
    for row in table.rows:
        view.add_row(
            f"{row.value:g}",
            f"{row.tss.mean:.3f}±{row.tss.std:.3f}",
            f"{row.bss.mean:.3f}±{row.bss.std:.3f}",
            "base" if row.base else "",
            style="bold" if row.base else None,
        )
    console.print(view)
    _finish(
        run_dir,
        "sweep",
        seed,
        {"dataset": dataset, "splits": splits, "config": config},
        {
            "which": which,
            "range": value_range,
            "folds": folds,
            "rewards": cdr_config.rewards.model_dump(),
        },
        out,
    )


@app.command()
@handle_errors
def explain(
    dataset: Path = typer.Option(..., help="Dataset CSV"),
    splits: Path = typer.Option(..., help="splits.json used in training"),
    model: Path = typer.Option(..., help="model.json"),
    which: str = typer.Option("test", "--set", help="ARs to explain: test, val or train"),
    limit: Optional[int] = typer.Option(None, help="Explain at most this many ARs"),
    background: str = typer.Option("mean", help="mean or instance"),
    background_ar: Optional[int] = typer.Option(None, help="AR id used as background instance"),
    out: Optional[Path] = typer.Option(None, help="Run directory"),
):
    """Exact Shapley attributions with each feature channel as one player."""
    if background not in ("mean", "instance"):
        raise ConfigError("--background must be mean or instance")
    run_dir = artifact_store.resolve_run_dir(out, "explain")
    records = dataset_io.load_csv(dataset)
    split_list = dataset_io.read_split_manifest(splits)
    fitted = _load_models(model, None)
    ((classifier, stats, extra),) = fitted

    targets = _records_for(records, extra, split_list, which)
    if limit is not None:
        targets = targets[:limit]
    train_records = _records_for(records, extra, split_list, "train")
    background_record = None
    if background == "instance":
        if background_ar is None:
            raise ConfigError("--background instance needs --background-ar")
        background_record = subset(_records_for(records, extra, None, "all"), [background_ar])[0]

    service = get_explain_service()
    result = service.explain(
        classifier,
        stats,
        targets,
        train_records,
        ShapConfig(background=background),
        background_record,
    )
    attributions = service.attribution_frame(result.attributions)
    artifact_store.save_table(run_dir, "attributions.csv", attributions)
    artifact_store.save_table(run_dir, "efficiency.csv", service.summary_frame(result.attributions))
    importance = service.global_frame(result.global_importance)
    artifact_store.save_table(run_dir, "global_importance.csv", importance)
    artifact_store.save_table(run_dir, "waterfall.csv", service.waterfall_frame(result.waterfalls))
    artifact_store.save_table(run_dir, "beeswarm.csv", result.beeswarm)
    artifact_store.save_json(
        run_dir,
        "baseline.json",
        {
            "phi0": {str(a.ar_id): a.phi0 for a in result.attributions},
            "expected_value": result.expected_value,
        },
    )

    view = Table(title="Global importance (mean |φ|)", header_style="bold magenta")
    view.add_column("Feature")
    view.add_column("φ global", justify="right")
    for _, row in importance.iterrows():
        view.add_row(row["feature"], f"{row['phi_global']:.4f}")
    console.print(view)
    _finish(
        run_dir,
        "explain",
        _run_seed(fitted),
        {"dataset": dataset, "splits": splits, "model": model},
        {
            "set": which,
            "limit": limit,
            "background": background,
            "background_ar": background_ar,
            "model_seed": classifier.seed,
        },
        out,
    )


@app.command()
@handle_errors
def ttest(
    a: Path = typer.Option(..., help="fold_metrics.csv of model A"),
    b: Path = typer.Option(..., help="fold_metrics.csv of model B"),
    out: Optional[Path] = typer.Option(None, help="Run directory"),
):
    """Paired t-tests of per-fold TSS and BSS."""
    run_dir = artifact_store.resolve_run_dir(out, "ttest")
    results = get_evaluation_service().ttest_files(a, b)
    artifact_store.save_json(run_dir, "ttest.json", {k: v.model_dump() for k, v in results.items()})

    view = Table(title="Paired t-test (A - B)", header_style="bold magenta")
    for column in ("Metric", "Mean diff", "t", "df", "p-value"):
        view.add_column(column, justify="right")
    for name, r in results.items():
        view.add_row(
            name.upper(), f"{r.mean_difference:.4f}", f"{r.t:.3f}", str(r.df), f"{r.p_value:.4g}"
        )
    console.print(view)
    seeds = {"a": _metrics_seed(a), "b": _metrics_seed(b)}
    seed = seeds["a"] if seeds["a"] is not None else 0
    _finish(run_dir, "ttest", seed, {"a": a, "b": b}, {"run_seeds": seeds}, out)


@app.command()
@handle_errors
def compare(
    dataset: Path = typer.Option(..., help="Dataset CSV"),
    probabilities: Path = typer.Option(..., help="External CSV: ar_id,probability,label"),
    model: Optional[Path] = typer.Option(None, help="One model.json"),
    run: Optional[Path] = typer.Option(None, help="Training run directory (all folds)"),
    out: Optional[Path] = typer.Option(None, help="Run directory"),
):
    """Threshold scans of our models vs external forecasts, original and filtered sets."""
    run_dir = artifact_store.resolve_run_dir(out, "compare")
    records = dataset_io.load_csv(dataset)
    fitted = _load_models(model, run)
    external = load_external_probabilities(probabilities)

    feature_names = fitted[0][2]["features"]
    if any(extra["features"] != feature_names for _, _, extra in fitted):
        raise DataError("fold models use different feature columns")
    records = dataset_io.select_features(records, feature_names)
    blocks = get_evaluation_service().compare_external(
        [(classifier, stats) for classifier, stats, _ in fitted], records, external
    )

    view = Table(title="Best thresholds", header_style="bold magenta")
    for column in ("Test set", "N", "Pos", "Model θ", "Model TSS", "External θ", "External TSS"):
        view.add_column(column, justify="right")
    for block in blocks:
        frame = pd.DataFrame(
            {
                "threshold_pct": [p.threshold_pct for p in block.model_scan.points],
                "model_tss": block.model_scan.tss_values(),
                "external_tss": block.external_scan.tss_values(),
            }
        )
        artifact_store.save_table(run_dir, f"compare_{block.name}.csv", frame)
        view.add_row(
            block.name,
            str(block.n),
            str(block.n_positive),
            f"{block.model_best.threshold_pct}%",
            f"{block.model_best.tss:.3f}",
            f"{block.external_best.threshold_pct}%",
            f"{block.external_best.tss:.3f}",
        )
    artifact_store.save_json(
        run_dir,
        "compare.json",
        [
            {
                "name": b.name,
                "n": b.n,
                "n_positive": b.n_positive,
                "model_best": b.model_best.model_dump(),
                "external_best": b.external_best.model_dump(),
            }
            for b in blocks
        ],
    )
    console.print(view)
    _finish(
        run_dir,
        "compare",
        _run_seed(fitted),
        {"dataset": dataset, "probabilities": probabilities, "model": model, "run": run},
        {"model_seeds": [m.seed for m, _, _ in fitted]},
        out,
    )


@app.command("show-config")
def show_config(config: Optional[Path] = typer.Option(None, help="JSON run config")):
    """Print the effective configuration (defaults merged with --config)."""
    try:
        console.print_json(json.dumps(load_config(config).model_dump()))
    except FlareForecastError as e:
        console.print(f"[bold red]Error ({e.error_type}):[/bold red] {e}")
        raise typer.Exit(e.exit_code)


if __name__ == "__main__":
    app()
