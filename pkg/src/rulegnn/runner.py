"""Experiment orchestration: generation, preprocessing, training,
evaluation and artifact management for the CLI.

Artifacts written under the experiment output directory:

  folds.json                      the exact splits used
  logs/fold{F}_run{R}.csv         per-epoch metrics (epoch, lr, train
                                  loss/acc, val acc), repr-exact floats
  checkpoints/fold{F}_run{R}.npz  best-validation parameter pools + digest
  results.json, results.txt       the aggregated accuracy table
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cache import PreprocessCache
from .config import ExperimentConfig
from .engine import (
    CVResult,
    MetricRow,
    ParameterStore,
    cross_validate,
    evaluate,
    load_checkpoint,
    save_checkpoint,
)
from .errors import ContractError, DataError
from .folds import FoldSpec, load_folds, make_folds, save_folds
from .graphs import GraphDataset, all_pairs_distances, diameter
from .model import PropagationLayerSpec, compile_model, resolve_labeling
from .tud_io import write_tud_dataset


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def dataset_stats(dataset: GraphDataset) -> dict:
    nodes = np.asarray([g.node_count for g in dataset.graphs])
    edges = np.asarray([g.edge_count for g in dataset.graphs])
    diams = np.asarray([diameter(g) for g in dataset.graphs])
    labels = set()
    for g in dataset.graphs:
        labels.update(g.node_labels.tolist())
    counts = np.bincount(dataset.class_labels, minlength=dataset.num_classes)
    return {
        "name": dataset.name,
        "graphs": len(dataset),
        "classes": dataset.num_classes,
        "per_class": counts.tolist(),
        "node_labels": len(labels),
        "nodes": {"min": int(nodes.min()), "avg": float(nodes.mean()), "max": int(nodes.max())},
        "edges": {"min": int(edges.min()), "avg": float(edges.mean()), "max": int(edges.max())},
        "diameter": {"min": int(diams.min()), "avg": float(diams.mean()), "max": int(diams.max())},
    }


def stats_report(stats: dict) -> str:
    lines = [
        f"dataset: {stats['name']}",
        f"graphs: {stats['graphs']}",
        f"classes: {stats['classes']} (per class: {stats['per_class']})",
        f"node labels: {stats['node_labels']}",
    ]
    for key in ("nodes", "edges", "diameter"):
        block = stats[key]
        lines.append(
            f"{key}: min {block['min']}  avg {block['avg']:.1f}  max {block['max']}"
        )
    return "\n".join(lines) + "\n"


def write_generated(dataset: GraphDataset, directory: str | Path) -> Path:
    directory = Path(directory)
    write_tud_dataset(dataset, directory)
    report = stats_report(dataset_stats(dataset))
    _atomic_write(directory / f"{dataset.name}_stats.txt", report)
    return directory


def resolve_folds(config: ExperimentConfig, dataset: GraphDataset) -> FoldSpec:
    if config.folds.mode == "load":
        if not config.folds.file:
            raise ContractError("fold mode 'load' needs a file")
        spec = load_folds(config.folds.file)
        spec.validate(len(dataset))
        return spec
    return make_folds(dataset, config.folds.k, config.folds.seed)


def preprocess(
    config: ExperimentConfig, cache_root: str | Path
) -> dict[str, float]:
    """Populate the caches a training run will need; returns wall-clock
    seconds per stage. Safe to re-run: cache hits cost almost nothing."""
    dataset = config.dataset.load()
    cache = PreprocessCache(cache_root, config.dataset.cache_key())
    timings: dict[str, float] = {}

    needs_distances = any(
        isinstance(layer, PropagationLayerSpec) for layer in config.model.layers
    )
    t0 = time.perf_counter()
    if needs_distances and cache.get_distances() is None:
        cache.put_distances([all_pairs_distances(g) for g in dataset.graphs])
    timings["distances"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    seen = set()
    for layer in config.model.layers:
        key = layer.labeling.descriptor()
        if key not in seen:
            seen.add(key)
            resolve_labeling(dataset, layer.labeling, cache)
    timings["labels"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    compile_model(dataset, config.model, cache)
    timings["layouts"] = time.perf_counter() - t0
    return timings


@dataclass
class ExperimentResult:
    cv: CVResult
    out_dir: Path
    dataset_name: str

    def table_row(self) -> str:
        return f"{self.dataset_name}: {self.cv.summary()}"


def _log_csv(rows: list[MetricRow]) -> str:
    lines = ["epoch,lr,train_loss,train_acc,val_acc"]
    for r in rows:
        lines.append(
            f"{r.epoch},{r.lr!r},{r.train_loss!r},{r.train_acc!r},{r.val_acc!r}"
        )
    return "\n".join(lines) + "\n"


def run_experiment(
    config: ExperimentConfig,
    cache_root: str | Path,
    n_jobs: int = 1,
    out_dir: str | Path | None = None,
) -> ExperimentResult:
    dataset = config.dataset.load()
    cache = PreprocessCache(cache_root, config.dataset.cache_key())
    folds = resolve_folds(config, dataset)
    model = compile_model(dataset, config.model, cache)
    cv = cross_validate(model, folds, config.training, n_jobs=n_jobs)

    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_folds(folds, out / "folds.json")
    digest = model.digest()
    (out / "logs").mkdir(exist_ok=True)
    (out / "checkpoints").mkdir(exist_ok=True)
    for run in cv.runs:
        stem = f"fold{run.fold}_run{run.run}"
        _atomic_write(out / "logs" / f"{stem}.csv", _log_csv(run.log))
        save_checkpoint(out / "checkpoints" / f"{stem}.npz", run.params, digest)

    payload = {
        "dataset": dataset.name,
        "model": config.model.descriptor(),
        "digest": digest,
        "seed": config.training.seed,
        "runs_per_fold": config.training.runs_per_fold,
        "fold_accuracies": cv.fold_accuracies.tolist(),
        "runs": [
            {
                "fold": r.fold,
                "run": r.run,
                "test_acc": r.test_acc,
                "best_epoch": r.best_epoch,
                "best_val_acc": r.best_val_acc,
            }
            for r in cv.runs
        ],
        "mean": cv.mean,
        "std": cv.std,
    }
    _atomic_write(out / "results.json", json.dumps(payload, indent=1))
    _atomic_write(out / "results.txt", f"{dataset.name}: {cv.summary()}\n")
    return ExperimentResult(cv=cv, out_dir=out, dataset_name=dataset.name)


def evaluate_checkpoints(
    config: ExperimentConfig,
    results_dir: str | Path,
    cache_root: str | Path,
) -> tuple[str, dict]:
    """Recompute the results table from saved checkpoints and fold file."""
    results_dir = Path(results_dir)
    folds_path = results_dir / "folds.json"
    if not folds_path.exists():
        raise DataError(f"missing fold file {folds_path}")
    dataset = config.dataset.load()
    folds = load_folds(folds_path)
    folds.validate(len(dataset))
    cache = PreprocessCache(cache_root, config.dataset.cache_key())
    model = compile_model(dataset, config.model, cache)
    digest = model.digest()

    checkpoint_dir = results_dir / "checkpoints"
    per_fold: dict[int, list[float]] = {}
    for path in sorted(checkpoint_dir.glob("fold*_run*.npz")):
        params, saved_digest = load_checkpoint(path)
        if saved_digest != digest:
            raise DataError(
                f"{path}: checkpoint digest {saved_digest} does not match the "
                f"model ({digest})"
            )
        stem = path.stem
        fold = int(stem.split("_")[0][len("fold") :])
        store = ParameterStore([w for w, _ in params], [b for _, b in params])
        acc = evaluate(model, store, folds.folds[fold].test)
        per_fold.setdefault(fold, []).append(acc)
    if not per_fold:
        raise DataError(f"no checkpoints found under {checkpoint_dir}")
    fold_ids = sorted(per_fold)
    fold_accs = np.asarray([float(np.mean(per_fold[f])) for f in fold_ids])
    mean, std = float(fold_accs.mean()), float(fold_accs.std())
    table = f"{dataset.name}: {100 * mean:.1f} +- {100 * std:.1f}"
    payload = {
        "dataset": dataset.name,
        "digest": digest,
        "fold_accuracies": fold_accs.tolist(),
        "mean": mean,
        "std": std,
    }
    return table, payload
