"""Forward/backward evaluation of rule based layers over shared parameter
pools, softmax cross-entropy loss, Adam, the training loop and the
cross-validation driver.

All arithmetic is double precision. A layer computes
``y = act(W x + b)`` where W and b are assembled sparsely from the pools
through a per-sample layout; gradients of shared parameters accumulate over
every cell that references them.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ContractError, TrainingDivergedError
from .folds import Fold, FoldSpec
from .layouts import RuleLayout

CHECKPOINT_VERSION = 1

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class CompiledLayer:
    """One layer of one sample: layout arrays plus activation flag."""

    rows: np.ndarray
    cols: np.ndarray
    weight_idx: np.ndarray
    bias_rows: np.ndarray
    bias_idx: np.ndarray
    in_dim: int
    out_dim: int
    tanh: bool

    @classmethod
    def from_layout(cls, layout: RuleLayout, tanh: bool) -> "CompiledLayer":
        return cls(
            rows=layout.rows,
            cols=layout.cols,
            weight_idx=layout.weight_idx,
            bias_rows=layout.bias_rows,
            bias_idx=layout.bias_idx,
            in_dim=layout.in_dim,
            out_dim=layout.out_dim,
            tanh=tanh,
        )


@dataclass
class LayerPools:
    """Dataset-wide pool dimensions for one layer of the stack."""

    n_weights: int
    n_biases: int
    init_scale: float
    descriptor: str = ""


@dataclass
class CompiledModel:
    """Everything the trainer needs: per-sample layer layouts and pool sizes."""

    samples: list[list[CompiledLayer]]
    pools: list[LayerPools]
    class_labels: np.ndarray
    num_classes: int
    input_signals: list[np.ndarray] | None = None
    descriptor: str = ""

    def signal(self, index: int) -> np.ndarray:
        if self.input_signals is not None:
            return self.input_signals[index]
        return np.ones(self.samples[index][0].in_dim)

    def digest(self) -> str:
        text = self.descriptor + "|" + "|".join(
            f"{p.n_weights}:{p.n_biases}" for p in self.pools
        )
        return hashlib.sha256(text.encode()).hexdigest()[:16]


class ParameterStore:
    """Shared parameter pools plus Adam moments, one pair per layer."""

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        self.weights = weights
        self.biases = biases
        self.m_w = [np.zeros_like(w) for w in weights]
        self.v_w = [np.zeros_like(w) for w in weights]
        self.m_b = [np.zeros_like(b) for b in biases]
        self.v_b = [np.zeros_like(b) for b in biases]
        self.step = 0

    @classmethod
    def initialize(
        cls, pools: Sequence[LayerPools], rng: np.random.Generator
    ) -> "ParameterStore":
        weights, biases = [], []
        for pool in pools:
            a = pool.init_scale
            weights.append(rng.uniform(-a, a, size=pool.n_weights))
            biases.append(rng.uniform(-a, a, size=pool.n_biases))
        return cls(weights, biases)

    def snapshot(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(w.copy(), b.copy()) for w, b in zip(self.weights, self.biases)]

    def restore(self, saved: list[tuple[np.ndarray, np.ndarray]]) -> None:
        for (w, b), sw in zip(zip(self.weights, self.biases), saved):
            w[:] = sw[0]
            b[:] = sw[1]


def layer_forward(layer: CompiledLayer, weights, biases, x):
    """Sparse y = act(W x + b); returns (y, cache) for the backward pass."""
    if len(x) != layer.in_dim:
        raise ContractError(f"input length {len(x)} != layer in_dim {layer.in_dim}")
    wv = weights[layer.weight_idx]
    pre = np.bincount(
        layer.rows, weights=wv * x[layer.cols], minlength=layer.out_dim
    )
    if layer.bias_rows.size:
        pre[layer.bias_rows] += biases[layer.bias_idx]
    y = np.tanh(pre) if layer.tanh else pre
    return y, (x, wv, y)


def layer_backward(layer: CompiledLayer, cache, upstream, n_weights, n_biases):
    """Gradients for pools and input. Shared positions accumulate."""
    x, wv, y = cache
    s = upstream * (1.0 - y * y) if layer.tanh else upstream
    sr = s[layer.rows]
    grad_w = np.bincount(
        layer.weight_idx, weights=sr * x[layer.cols], minlength=n_weights
    )
    if layer.bias_rows.size:
        grad_b = np.bincount(
            layer.bias_idx, weights=s[layer.bias_rows], minlength=n_biases
        )
    else:
        grad_b = np.zeros(n_biases)
    grad_x = np.bincount(layer.cols, weights=sr * wv, minlength=layer.in_dim)
    return grad_x, grad_w, grad_b


def model_forward(layers: list[CompiledLayer], store: ParameterStore, x):
    """Run the full stack; returns (scores, caches)."""
    caches = []
    for li, layer in enumerate(layers):
        x, cache = layer_forward(layer, store.weights[li], store.biases[li], x)
        caches.append(cache)
    return x, caches


def model_backward(
    layers: list[CompiledLayer],
    store: ParameterStore,
    caches,
    score_grad,
    grad_w_acc,
    grad_b_acc,
):
    upstream = score_grad
    for li in range(len(layers) - 1, -1, -1):
        grad_x, grad_w, grad_b = layer_backward(
            layers[li],
            caches[li],
            upstream,
            len(store.weights[li]),
            len(store.biases[li]),
        )
        grad_w_acc[li] += grad_w
        grad_b_acc[li] += grad_b
        upstream = grad_x


def loss_and_grad(scores: np.ndarray, true_class: int):
    """Numerically stabilized softmax cross-entropy and its score gradient."""
    shifted = scores - scores.max()
    exp = np.exp(shifted)
    total = exp.sum()
    loss = math.log(total) - shifted[true_class]
    grad = exp / total
    grad[true_class] -= 1.0
    return loss, grad


def adam_step(store: ParameterStore, grad_w, grad_b, lr: float) -> None:
    """Standard Adam update over every pool."""
    store.step += 1
    t = store.step
    c1 = 1.0 - ADAM_BETA1**t
    c2 = 1.0 - ADAM_BETA2**t
    for params, grads, m, v in (
        (store.weights, grad_w, store.m_w, store.v_w),
        (store.biases, grad_b, store.m_b, store.v_b),
    ):
        for p, g, mm, vv in zip(params, grads, m, v):
            if not p.size:
                continue
            mm *= ADAM_BETA1
            mm += (1 - ADAM_BETA1) * g
            vv *= ADAM_BETA2
            vv += (1 - ADAM_BETA2) * g * g
            p -= lr * (mm / c1) / (np.sqrt(vv / c2) + ADAM_EPS)


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    batch_size: int = 128
    patience: int = 25
    lr_decay_factor: float | None = None
    lr_decay_interval: int = 10
    seed: int = 0
    runs_per_fold: int = 3

    def __post_init__(self):
        if min(self.learning_rate, self.epochs, self.batch_size, self.patience) <= 0:
            raise ContractError("training settings must be positive")
        if self.patience > self.epochs:
            raise ContractError("patience must not exceed the epoch count")

    @classmethod
    def synthetic(cls, **overrides) -> "TrainConfig":
        base = dict(learning_rate=0.1, epochs=200)
        base.update(overrides)
        return cls(**base)

    @classmethod
    def real_world(cls, **overrides) -> "TrainConfig":
        base = dict(
            learning_rate=0.05, epochs=50, lr_decay_factor=0.5, lr_decay_interval=10
        )
        base.update(overrides)
        return cls(**base)


def lr_schedule(config: TrainConfig, epoch: int) -> float:
    if config.lr_decay_factor is None:
        return config.learning_rate
    return config.learning_rate * config.lr_decay_factor ** (
        epoch // config.lr_decay_interval
    )


@dataclass
class MetricRow:
    epoch: int
    lr: float
    train_loss: float
    train_acc: float
    val_acc: float


@dataclass
class TrainResult:
    params: list[tuple[np.ndarray, np.ndarray]]
    log: list[MetricRow]
    best_epoch: int
    best_val_acc: float


def predict(model: CompiledModel, store: ParameterStore, index: int) -> int:
    scores, _ = model_forward(model.samples[index], store, model.signal(index))
    return int(np.argmax(scores))


def evaluate(model: CompiledModel, store: ParameterStore, indices) -> float:
    """Fraction of samples whose argmax score matches the class label."""
    if len(indices) == 0:
        return 0.0
    correct = sum(
        1 for i in indices if predict(model, store, int(i)) == model.class_labels[i]
    )
    return correct / len(indices)


def train(
    model: CompiledModel,
    train_idx: np.ndarray,
    val_idx: np.ndarray,
    config: TrainConfig,
    rng: np.random.Generator,
) -> TrainResult:
    """Mini-batch training with per-sample sparse passes.

    Gradients are summed over each batch of (variable-size) samples, then
    averaged before the optimizer step. The returned parameters are the
    snapshot from the epoch with the best validation accuracy; training
    stops early once validation accuracy has not improved for
    ``config.patience`` epochs.
    """
    store = ParameterStore.initialize(model.pools, rng)
    best = store.snapshot()
    best_val = -1.0
    best_epoch = -1
    stall = 0
    log: list[MetricRow] = []
    train_idx = np.asarray(train_idx)
    for epoch in range(config.epochs):
        lr = lr_schedule(config, epoch)
        order = train_idx[rng.permutation(len(train_idx))]
        total_loss = 0.0
        correct = 0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            grad_w = [np.zeros_like(w) for w in store.weights]
            grad_b = [np.zeros_like(b) for b in store.biases]
            for i in batch:
                i = int(i)
                layers = model.samples[i]
                scores, caches = model_forward(layers, store, model.signal(i))
                label = int(model.class_labels[i])
                loss, score_grad = loss_and_grad(scores, label)
                if not math.isfinite(loss):
                    raise TrainingDivergedError(
                        f"non-finite loss at epoch {epoch}, sample {i}"
                    )
                total_loss += loss
                correct += int(np.argmax(scores)) == label
                model_backward(layers, store, caches, score_grad, grad_w, grad_b)
            inv = 1.0 / len(batch)
            for g in grad_w:
                g *= inv
            for g in grad_b:
                g *= inv
            adam_step(store, grad_w, grad_b, lr)
        val_acc = evaluate(model, store, val_idx)
        log.append(
            MetricRow(
                epoch=epoch,
                lr=lr,
                train_loss=total_loss / len(order),
                train_acc=correct / len(order),
                val_acc=val_acc,
            )
        )
        # ties refresh the snapshot: among equally validating epochs the
        # longer-trained parameters win, and the stall counter only grows
        # while validation accuracy sits strictly below the best seen
        if val_acc >= best_val:
            best_val = val_acc
            best_epoch = epoch
            best = store.snapshot()
            stall = 0
        else:
            stall += 1
            if stall >= config.patience:
                break
    return TrainResult(
        params=best, log=log, best_epoch=best_epoch, best_val_acc=best_val
    )


@dataclass
class RunResult:
    fold: int
    run: int
    test_acc: float
    best_epoch: int
    best_val_acc: float
    log: list[MetricRow]
    params: list[tuple[np.ndarray, np.ndarray]]


@dataclass
class CVResult:
    runs: list[RunResult]
    fold_accuracies: np.ndarray  # per fold, averaged over runs
    mean: float
    std: float

    def summary(self) -> str:
        return f"{100 * self.mean:.1f} +- {100 * self.std:.1f}"


def run_seed(config: TrainConfig, fold: int, run: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=config.seed, spawn_key=(fold, run))


def _run_single(
    model: CompiledModel, folds: FoldSpec, config: TrainConfig, fold: int, run: int
) -> RunResult:
    rng = np.random.default_rng(run_seed(config, fold, run))
    result = train(
        model, folds.folds[fold].train, folds.folds[fold].validation, config, rng
    )
    store = ParameterStore(
        [w for w, _ in result.params], [b for _, b in result.params]
    )
    test_acc = evaluate(model, store, folds.folds[fold].test)
    return RunResult(
        fold=fold,
        run=run,
        test_acc=test_acc,
        best_epoch=result.best_epoch,
        best_val_acc=result.best_val_acc,
        log=result.log,
        params=result.params,
    )


_SHARED: tuple | None = None


def _cv_worker(job: tuple[int, int]) -> RunResult:
    model, folds, config = _SHARED
    return _run_single(model, folds, config, *job)


def cross_validate(
    model: CompiledModel,
    folds: FoldSpec,
    config: TrainConfig,
    n_jobs: int = 1,
) -> CVResult:
    """Full protocol: every fold trained ``config.runs_per_fold`` times with
    distinct derived seeds; per-fold test accuracies are averaged over runs,
    the reported spread is the standard deviation over folds."""
    jobs = [(f, r) for f in range(len(folds)) for r in range(config.runs_per_fold)]
    if n_jobs <= 1:
        results = [_run_single(model, folds, config, f, r) for f, r in jobs]
    else:
        global _SHARED
        _SHARED = (model, folds, config)
        try:
            ctx = get_context("fork")
            with ProcessPoolExecutor(max_workers=n_jobs, mp_context=ctx) as pool:
                results = list(pool.map(_cv_worker, jobs))
        finally:
            _SHARED = None
    per_fold = np.zeros(len(folds))
    for f in range(len(folds)):
        accs = [r.test_acc for r in results if r.fold == f]
        per_fold[f] = float(np.mean(accs))
    return CVResult(
        runs=results,
        fold_accuracies=per_fold,
        mean=float(per_fold.mean()),
        std=float(per_fold.std()),
    )


def save_checkpoint(
    path: str | Path,
    params: list[tuple[np.ndarray, np.ndarray]],
    digest: str,
) -> None:
    arrays = {"version": np.asarray(CHECKPOINT_VERSION), "digest": np.asarray(digest)}
    for i, (w, b) in enumerate(params):
        arrays[f"w{i}"] = w
        arrays[f"b{i}"] = b
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        np.savez(fh, **arrays)
    tmp.replace(path)


def load_checkpoint(path: str | Path) -> tuple[list[tuple[np.ndarray, np.ndarray]], str]:
    with np.load(path, allow_pickle=False) as data:
        if int(data["version"]) != CHECKPOINT_VERSION:
            raise ContractError(f"{path}: unsupported checkpoint version")
        digest = str(data["digest"])
        params = []
        i = 0
        while f"w{i}" in data:
            params.append((data[f"w{i}"], data[f"b{i}"]))
            i += 1
    return params, digest
