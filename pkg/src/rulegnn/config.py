"""Experiment configuration files: a diff-friendly, line-oriented key/value
format with nested sections (INI syntax via configparser).

Schema (see README for the full reference):

  [dataset]   source = synthetic|tud, plus kind/count/seed or path/name
  [folds]     mode = generate|load, k, seed or file
  [layer.N]   rule = propagation|aggregation, labeling, distances, ...
  [training]  mode = synthetic|real_world plus overrides
  [output]    directory

Packaged presets reproduce the per-dataset reference architectures; load
them with ``load_preset(name)``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .engine import TrainConfig
from .errors import ContractError, DataError
from .graphs import GraphDataset
from .labeling import PatternSpec, cycle_patterns
from .model import (
    AggregationLayerSpec,
    LabelingSpec,
    ModelSpec,
    PropagationLayerSpec,
)
from .synthetic import generate
from .tud_io import parse_tud_dataset


@dataclass
class DatasetConfig:
    source: str  # synthetic | tud
    kind: str = ""
    count: int | None = None
    seed: int = 42
    path: str = ""
    name: str = ""

    def load(self) -> GraphDataset:
        if self.source == "synthetic":
            kwargs = {"seed": self.seed}
            if self.count is not None:
                kwargs["count"] = self.count
            return generate(self.kind, **kwargs)
        if self.source == "tud":
            if not self.path or not self.name:
                raise ContractError("tud dataset needs path and name")
            directory = Path(self.path)
            if not (directory / f"{self.name}_A.txt").exists():
                raise DataError(
                    f"dataset not found: expected {directory / (self.name + '_A.txt')}"
                )
            return parse_tud_dataset(directory, self.name)
        raise ContractError(f"unknown dataset source {self.source!r}")

    def cache_key(self) -> str:
        if self.source == "synthetic":
            count = self.count if self.count is not None else "default"
            return f"{self.kind}_n{count}_s{self.seed}"
        return self.name


@dataclass
class FoldConfig:
    mode: str = "generate"  # generate | load
    k: int = 10
    seed: int = 42
    file: str = ""


@dataclass
class ExperimentConfig:
    dataset: DatasetConfig
    folds: FoldConfig
    model: ModelSpec
    training: TrainConfig
    output_dir: str = "results"


def parse_patterns(text: str) -> tuple[PatternSpec, ...]:
    """Pattern tokens: ``triangle``, ``edge``, ``cycle_4``, ``clique_3``,
    ``star_3``, ``path_2``, ``induced_cycle_5``, and the range forms
    ``simple_cycles<=10`` / ``induced_cycles<=5`` (lengths 3..bound)."""
    out: list[PatternSpec] = []
    for token in text.replace(",", " ").split():
        token = token.strip().lower()
        if not token:
            continue
        if token == "triangle":
            out.append(PatternSpec("simple_cycle", 3))
        elif token in ("edge", "single_edge"):
            out.append(PatternSpec("single_edge"))
        elif token.startswith("simple_cycles<="):
            out.extend(cycle_patterns(int(token.split("<=")[1])))
        elif token.startswith("induced_cycles<="):
            out.extend(cycle_patterns(int(token.split("<=")[1]), induced=True))
        elif token.startswith("cycle_"):
            out.append(PatternSpec("simple_cycle", int(token.split("_")[1])))
        elif token.startswith("induced_cycle_"):
            out.append(PatternSpec("induced_cycle", int(token.rsplit("_", 1)[1])))
        elif token.startswith("clique_"):
            out.append(PatternSpec("clique", int(token.split("_")[1])))
        elif token.startswith("star_"):
            out.append(PatternSpec("star", int(token.split("_")[1])))
        elif token.startswith("path_"):
            out.append(PatternSpec("path", int(token.split("_")[1])))
        else:
            raise ContractError(f"unknown pattern token {token!r}")
    return tuple(out)


def parse_distances(text: str) -> tuple[int, ...]:
    """Distance sets: ``8``, ``1 2 3``, ``1,2``, or the range ``1..10``."""
    out: list[int] = []
    for token in text.replace(",", " ").split():
        if ".." in token:
            lo, hi = token.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(token))
    if not out:
        raise ContractError("empty distance set")
    return tuple(sorted(set(out)))


def _parse_labeling(section: configparser.SectionProxy) -> LabelingSpec:
    kind = section.get("labeling", "original").strip().lower()
    cap = section.getint("label_cap", fallback=None)
    if kind == "wl":
        return LabelingSpec(
            "wl", wl_iterations=section.getint("wl_iterations", 1), cap=cap
        )
    if kind == "pattern":
        return LabelingSpec(
            "pattern", patterns=parse_patterns(section.get("patterns", "")), cap=cap
        )
    if kind in ("original", "degree"):
        return LabelingSpec(kind, cap=cap)
    raise ContractError(f"unknown labeling {kind!r}")


def load_config(path: str | Path) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise DataError(f"config file not found: {path}")
    return _config_from_parser(parser)


def load_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    parser.read_string(text)
    return _config_from_parser(parser)


def _config_from_parser(parser: configparser.ConfigParser) -> ExperimentConfig:
    if "dataset" not in parser:
        raise ContractError("config needs a [dataset] section")
    ds = parser["dataset"]
    dataset = DatasetConfig(
        source=ds.get("source", "synthetic").strip().lower(),
        kind=ds.get("kind", "").strip().lower(),
        count=ds.getint("count", fallback=None),
        seed=ds.getint("seed", 42),
        path=ds.get("path", ""),
        name=ds.get("name", ""),
    )

    fc = parser["folds"] if "folds" in parser else {}
    folds = FoldConfig(
        mode=fc.get("mode", "generate").strip().lower() if fc else "generate",
        k=int(fc.get("k", 10)) if fc else 10,
        seed=int(fc.get("seed", 42)) if fc else 42,
        file=fc.get("file", "") if fc else "",
    )

    layer_sections = sorted(
        (name for name in parser.sections() if name.startswith("layer.")),
        key=lambda name: int(name.split(".", 1)[1]),
    )
    if not layer_sections:
        raise ContractError("config needs at least one [layer.N] section")
    layers = []
    for name in layer_sections:
        section = parser[name]
        rule = section.get("rule", "").strip().lower()
        labeling = _parse_labeling(section)
        if rule == "propagation":
            layers.append(
                PropagationLayerSpec(
                    labeling, parse_distances(section.get("distances", ""))
                )
            )
        elif rule == "aggregation":
            layers.append(
                AggregationLayerSpec(
                    labeling, section.getint("output_size", fallback=None)
                )
            )
        else:
            raise ContractError(f"[{name}] has unknown rule {rule!r}")
    model = ModelSpec(tuple(layers))

    tr = parser["training"] if "training" in parser else None
    mode = tr.get("mode", "synthetic").strip().lower() if tr else "synthetic"
    base = TrainConfig.synthetic if mode == "synthetic" else TrainConfig.real_world
    overrides = {}
    if tr:
        for key, getter in (
            ("learning_rate", tr.getfloat),
            ("epochs", tr.getint),
            ("batch_size", tr.getint),
            ("patience", tr.getint),
            ("seed", tr.getint),
            ("runs_per_fold", tr.getint),
        ):
            value = getter(key, fallback=None)
            if value is not None:
                overrides[key] = value
    training = base(**overrides)

    out = parser["output"] if "output" in parser else None
    output_dir = out.get("directory", "results") if out else "results"
    return ExperimentConfig(
        dataset=dataset,
        folds=folds,
        model=model,
        training=training,
        output_dir=output_dir,
    )


def list_presets() -> list[str]:
    files = resources.files("rulegnn.presets")
    return sorted(
        p.name[: -len(".cfg")] for p in files.iterdir() if p.name.endswith(".cfg")
    )


def load_preset(name: str) -> ExperimentConfig:
    ref = resources.files("rulegnn.presets") / f"{name}.cfg"
    if not ref.is_file():
        raise DataError(f"unknown preset {name!r}; available: {list_presets()}")
    return load_config_text(ref.read_text(encoding="ascii"))


def preset_text(name: str) -> str:
    ref = resources.files("rulegnn.presets") / f"{name}.cfg"
    if not ref.is_file():
        raise DataError(f"unknown preset {name!r}; available: {list_presets()}")
    return ref.read_text(encoding="ascii")
