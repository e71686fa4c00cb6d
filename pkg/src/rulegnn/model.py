"""Declarative model descriptions and their compilation into per-sample
layouts ready for training.

A model is a stack of propagation layers (node-to-node, gated by pairwise
distance) followed by one aggregation layer mapping the node signal to a
fixed-size output. Each layer carries its own node-labeling rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractError
from .engine import CompiledLayer, CompiledModel, LayerPools
from .graphs import GraphDataset, all_pairs_distances
from .labeling import (
    DatasetLabeling,
    PatternSpec,
    cap_labels,
    degree_labels,
    original_labels,
    pattern_labels,
    wl_labels,
)
from .layouts import layout_aggregation, layout_graph_propagation


@dataclass(frozen=True)
class LabelingSpec:
    """How to label nodes: original labels, degrees, refinement iterations,
    or pattern-count vectors; optionally capped to the most frequent values."""

    kind: str  # original | degree | wl | pattern
    wl_iterations: int = 0
    patterns: tuple[PatternSpec, ...] = ()
    cap: int | None = None

    def __post_init__(self):
        if self.kind not in ("original", "degree", "wl", "pattern"):
            raise ContractError(f"unknown labeling kind {self.kind!r}")
        if self.kind == "pattern" and not self.patterns:
            raise ContractError("pattern labeling needs at least one pattern")
        if self.cap is not None and self.cap < 1:
            raise ContractError("label cap must be >= 1")

    def descriptor(self) -> str:
        if self.kind == "wl":
            base = f"wl{self.wl_iterations}"
        elif self.kind == "pattern":
            base = "pattern_" + "-".join(p.descriptor() for p in self.patterns)
        else:
            base = self.kind
        return f"{base}_cap{self.cap}" if self.cap is not None else base


@dataclass(frozen=True)
class PropagationLayerSpec:
    labeling: LabelingSpec
    distances: tuple[int, ...]

    def __post_init__(self):
        if not self.distances:
            raise ContractError("propagation layer needs a nonempty distance set")

    def descriptor(self) -> str:
        dist = ",".join(str(d) for d in sorted(set(self.distances)))
        return f"prop[{self.labeling.descriptor()};d={dist}]"


@dataclass(frozen=True)
class AggregationLayerSpec:
    labeling: LabelingSpec
    output_dim: int | None = None  # None: number of classes

    def descriptor(self) -> str:
        out = self.output_dim if self.output_dim is not None else "classes"
        return f"aggr[{self.labeling.descriptor()};m={out}]"


LayerSpec = PropagationLayerSpec | AggregationLayerSpec


@dataclass(frozen=True)
class ModelSpec:
    """Ordered layer stack; the final layer must be the aggregation."""

    layers: tuple[LayerSpec, ...]
    final_tanh: bool = False

    def __post_init__(self):
        if not self.layers:
            raise ContractError("model needs at least one layer")
        if not isinstance(self.layers[-1], AggregationLayerSpec):
            raise ContractError("the last layer must be an aggregation layer")
        for layer in self.layers[:-1]:
            if not isinstance(layer, PropagationLayerSpec):
                raise ContractError("hidden layers must be propagation layers")

    def descriptor(self) -> str:
        return " ".join(layer.descriptor() for layer in self.layers)


def resolve_labeling(
    dataset: GraphDataset, spec: LabelingSpec, cache=None
) -> DatasetLabeling:
    """Compute (or fetch from the cache) the labeling a spec describes."""
    if cache is not None:
        cached = cache.get_labeling(spec.descriptor())
        if cached is not None:
            return cached
    if spec.kind == "original":
        labeling = original_labels(dataset)
    elif spec.kind == "degree":
        labeling = degree_labels(dataset)
    elif spec.kind == "wl":
        labeling = wl_labels(dataset, spec.wl_iterations)
    else:
        labeling = pattern_labels(dataset, spec.patterns)
    if spec.cap is not None:
        labeling = cap_labels(labeling, spec.cap)
    if cache is not None:
        cache.put_labeling(spec.descriptor(), labeling)
    return labeling


def compile_model(
    dataset: GraphDataset,
    spec: ModelSpec,
    cache=None,
    input_signals: list[np.ndarray] | None = None,
) -> CompiledModel:
    """Materialize per-sample layouts for every layer of the stack."""
    per_layer_layouts: list[list | None] = [
        cache.get_layouts(_resolved_descriptor(layer, dataset.num_classes))
        if cache is not None
        else None
        for layer in spec.layers
    ]

    missing = [li for li, cached in enumerate(per_layer_layouts) if cached is None]
    if missing:
        labelings: dict[str, DatasetLabeling] = {}
        for li in missing:
            key = spec.layers[li].labeling.descriptor()
            if key not in labelings:
                labelings[key] = resolve_labeling(dataset, spec.layers[li].labeling, cache)
        distances = None
        if any(isinstance(spec.layers[li], PropagationLayerSpec) for li in missing):
            if cache is not None:
                distances = cache.get_distances()
            if distances is None:
                distances = [all_pairs_distances(g) for g in dataset.graphs]
                if cache is not None:
                    cache.put_distances(distances)
        for li in missing:
            layer = spec.layers[li]
            labeling = labelings[layer.labeling.descriptor()]
            layouts = [
                _build_layout(layer, labeling, gi, distances, dataset.num_classes)
                for gi in range(len(dataset))
            ]
            if cache is not None:
                cache.put_layouts(_resolved_descriptor(layer, dataset.num_classes), layouts)
            per_layer_layouts[li] = layouts

    samples: list[list[CompiledLayer]] = []
    nnz_total = np.zeros(len(spec.layers), dtype=np.int64)
    row_total = np.zeros(len(spec.layers), dtype=np.int64)
    pool_dims: list[tuple[int, int] | None] = [None] * len(spec.layers)
    for gi in range(len(dataset)):
        compiled = []
        for li in range(len(spec.layers)):
            layout = per_layer_layouts[li][gi]
            dims = (layout.weight_pool_size, layout.bias_pool_size)
            if pool_dims[li] is None:
                pool_dims[li] = dims
            elif pool_dims[li] != dims:
                raise ContractError("inconsistent pool sizes across samples")
            nnz_total[li] += layout.nonzeros
            row_total[li] += layout.out_dim
            is_last = li == len(spec.layers) - 1
            compiled.append(
                CompiledLayer.from_layout(layout, tanh=spec.final_tanh or not is_last)
            )
        samples.append(compiled)

    pools = []
    for li, layer in enumerate(spec.layers):
        avg_row_nnz = nnz_total[li] / max(1, row_total[li])
        pools.append(
            LayerPools(
                n_weights=pool_dims[li][0],
                n_biases=pool_dims[li][1],
                init_scale=1.0 / np.sqrt(max(1.0, avg_row_nnz)),
                descriptor=layer.descriptor(),
            )
        )
    return CompiledModel(
        samples=samples,
        pools=pools,
        class_labels=dataset.class_labels,
        num_classes=dataset.num_classes,
        input_signals=input_signals,
        descriptor=spec.descriptor(),
    )


def _resolved_descriptor(layer: LayerSpec, num_classes: int) -> str:
    if isinstance(layer, AggregationLayerSpec) and layer.output_dim is None:
        return f"aggr[{layer.labeling.descriptor()};m={num_classes}]"
    return layer.descriptor()


def _build_layout(layer, labeling, gi, distances, num_classes):
    labels = labeling.labels[gi]
    if isinstance(layer, PropagationLayerSpec):
        return layout_graph_propagation(
            distances[gi], labels, labeling.alphabet_size, layer.distances
        )
    out_dim = layer.output_dim if layer.output_dim is not None else num_classes
    return layout_aggregation(labels, labeling.alphabet_size, out_dim)
