"""Cross-validation fold management.

Fold convention: fold ``f`` uses part ``f`` as the test set, part
``(f + 1) mod k`` as the validation set and the remaining parts for
training. Test parts partition the dataset, so every sample is tested
exactly once. External split files (see ``save_folds``/``load_folds``)
override generation.

Fold file format (JSON, one object):

    {"version": 1, "seed": <int>,
     "folds": [{"train": [...], "validation": [...], "test": [...]}, ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import StratificationError, StructuralError
from .graphs import GraphDataset

FOLD_FILE_VERSION = 1


@dataclass
class Fold:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray


@dataclass
class FoldSpec:
    folds: list[Fold]
    seed: int

    def __len__(self) -> int:
        return len(self.folds)

    def validate(self, dataset_size: int) -> None:
        all_test = np.concatenate([f.test for f in self.folds])
        if not np.array_equal(np.sort(all_test), np.arange(dataset_size)):
            raise StructuralError("test sets do not partition the dataset")
        for i, fold in enumerate(self.folds):
            joined = np.concatenate([fold.train, fold.validation, fold.test])
            if not np.array_equal(np.sort(joined), np.arange(dataset_size)):
                raise StructuralError(f"fold {i} does not partition the dataset")


def make_folds(dataset: GraphDataset, k: int, seed: int) -> FoldSpec:
    """Deterministic stratified folds; every class must have >= k members."""
    if k < 2:
        raise StratificationError(f"need at least 2 folds, got {k}")
    rng = np.random.default_rng(seed)
    class_labels = dataset.class_labels
    parts: list[list[int]] = [[] for _ in range(k)]
    for cls in range(dataset.num_classes):
        members = np.flatnonzero(class_labels == cls)
        if len(members) < k:
            raise StratificationError(
                f"class {cls} has {len(members)} members, fewer than k={k}"
            )
        members = members[rng.permutation(len(members))]
        for i, idx in enumerate(members):
            parts[i % k].append(int(idx))
    part_arrays = [np.sort(np.asarray(p, dtype=np.int64)) for p in parts]
    folds = []
    for f in range(k):
        test = part_arrays[f]
        validation = part_arrays[(f + 1) % k]
        train = np.sort(
            np.concatenate(
                [part_arrays[i] for i in range(k) if i != f and i != (f + 1) % k]
            )
        )
        folds.append(Fold(train=train, validation=validation, test=test))
    spec = FoldSpec(folds=folds, seed=seed)
    spec.validate(len(dataset))
    return spec


def save_folds(spec: FoldSpec, path: str | Path) -> None:
    payload = {
        "version": FOLD_FILE_VERSION,
        "seed": spec.seed,
        "folds": [
            {
                "train": fold.train.tolist(),
                "validation": fold.validation.tolist(),
                "test": fold.test.tolist(),
            }
            for fold in spec.folds
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=1), encoding="ascii")


def load_folds(path: str | Path) -> FoldSpec:
    try:
        payload = json.loads(Path(path).read_text(encoding="ascii"))
    except json.JSONDecodeError as exc:
        raise StructuralError(f"{path}: not valid JSON ({exc})") from exc
    if payload.get("version") != FOLD_FILE_VERSION:
        raise StructuralError(f"{path}: unsupported fold file version")
    folds = [
        Fold(
            train=np.asarray(entry["train"], dtype=np.int64),
            validation=np.asarray(entry["validation"], dtype=np.int64),
            test=np.asarray(entry["test"], dtype=np.int64),
        )
        for entry in payload["folds"]
    ]
    return FoldSpec(folds=folds, seed=int(payload.get("seed", 0)))
