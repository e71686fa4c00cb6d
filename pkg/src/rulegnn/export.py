"""Export of learned weights for a chosen graph: tabular per-edge records
plus a Graphviz DOT rendering.

Record columns (tab-separated, one header line):

  layer  kind  src  dst  src_label  dst_label  property  value

``kind`` is ``weight`` or ``bias``; bias rows leave src/property empty.
For propagation layers ``property`` is the node-pair distance; aggregation
rows use ``-``. The optional top-k filter keeps, per layer, the k largest
positive and the k largest-magnitude negative weights (bias rows always
remain).

DOT encoding: edge color by sign (red positive, blue negative), edge
penwidth by magnitude class (4 classes relative to the layer maximum),
node width by bias magnitude class.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError
from .graphs import GraphDataset, all_pairs_distances
from .model import (
    AggregationLayerSpec,
    ModelSpec,
    PropagationLayerSpec,
    resolve_labeling,
    _build_layout,
)

_WIDTH_CLASSES = (0.5, 1.2, 2.2, 3.5)
_NODE_SIZES = (0.25, 0.4, 0.55, 0.75)


@dataclass
class WeightRecord:
    layer: int
    kind: str  # weight | bias
    src: int | None
    dst: int
    src_label: int | None
    dst_label: int | None
    property: int | None
    value: float

    def tsv(self) -> str:
        def fmt(x):
            return "-" if x is None else str(x)

        return "\t".join(
            [
                str(self.layer),
                self.kind,
                fmt(self.src),
                str(self.dst),
                fmt(self.src_label),
                fmt(self.dst_label),
                fmt(self.property),
                repr(self.value),
            ]
        )


def export_weight_records(
    dataset: GraphDataset,
    spec: ModelSpec,
    params: list[tuple[np.ndarray, np.ndarray]],
    graph_index: int,
    top_k: int | None = None,
    cache=None,
) -> list[WeightRecord]:
    """Project a checkpoint onto one graph's layouts."""
    if not (0 <= graph_index < len(dataset)):
        raise ContractError(
            f"graph index {graph_index} outside 0..{len(dataset) - 1}"
        )
    if len(params) != len(spec.layers):
        raise ContractError("checkpoint layer count does not match the model")
    g = dataset.graphs[graph_index]
    distances = None
    if any(isinstance(layer, PropagationLayerSpec) for layer in spec.layers):
        distances = {graph_index: all_pairs_distances(g)}
    records: list[WeightRecord] = []
    for li, layer in enumerate(spec.layers):
        labeling = resolve_labeling(dataset, layer.labeling, cache)
        layout = _build_layout(
            layer, labeling, graph_index, distances, dataset.num_classes
        )
        weights, biases = params[li]
        labels = labeling.labels[graph_index]
        layer_records = []
        for r, c, wi in zip(layout.rows, layout.cols, layout.weight_idx):
            prop = None
            if isinstance(layer, PropagationLayerSpec):
                prop = int(distances[graph_index][r, c])
                dst_label = int(labels[r])
            else:
                dst_label = None
            layer_records.append(
                WeightRecord(
                    layer=li + 1,
                    kind="weight",
                    src=int(c),
                    dst=int(r),
                    src_label=int(labels[c]),
                    dst_label=dst_label,
                    property=prop,
                    value=float(weights[wi]),
                )
            )
        if top_k is not None:
            positive = sorted(
                (rec for rec in layer_records if rec.value > 0),
                key=lambda rec: -rec.value,
            )[:top_k]
            negative = sorted(
                (rec for rec in layer_records if rec.value < 0),
                key=lambda rec: rec.value,
            )[:top_k]
            layer_records = sorted(
                positive + negative, key=lambda rec: (rec.dst, rec.src)
            )
        records.extend(layer_records)
        for row, bi in zip(layout.bias_rows, layout.bias_idx):
            records.append(
                WeightRecord(
                    layer=li + 1,
                    kind="bias",
                    src=None,
                    dst=int(row),
                    src_label=None,
                    dst_label=int(labels[row])
                    if isinstance(layer, PropagationLayerSpec)
                    else None,
                    property=None,
                    value=float(biases[bi]),
                )
            )
    return records


def records_to_tsv(records: list[WeightRecord]) -> str:
    header = "layer\tkind\tsrc\tdst\tsrc_label\tdst_label\tproperty\tvalue"
    return "\n".join([header] + [rec.tsv() for rec in records]) + "\n"


def _magnitude_class(value: float, maximum: float, classes: int = 4) -> int:
    if maximum <= 0:
        return 0
    frac = min(abs(value) / maximum, 1.0)
    return min(int(frac * classes), classes - 1)


def records_to_dot(records: list[WeightRecord], graph_name: str = "weights") -> str:
    """Render records as a layered directed graph in DOT syntax."""
    lines = [f'digraph "{graph_name}" {{', "  rankdir=LR;", "  node [shape=circle];"]
    layers = sorted({rec.layer for rec in records})
    weight_max = {
        layer: max(
            (abs(r.value) for r in records if r.layer == layer and r.kind == "weight"),
            default=0.0,
        )
        for layer in layers
    }
    bias_max = {
        layer: max(
            (abs(r.value) for r in records if r.layer == layer and r.kind == "bias"),
            default=0.0,
        )
        for layer in layers
    }
    emitted_nodes = set()

    def node_id(layer: int, index: int, side: str) -> str:
        # layer outputs are the next layer's inputs: share ids across layers
        level = layer - 1 if side == "src" else layer
        return f"n{level}_{index}"

    for rec in records:
        if rec.kind != "bias":
            continue
        nid = node_id(rec.layer, rec.dst, "dst")
        size = _NODE_SIZES[_magnitude_class(rec.value, bias_max[rec.layer])]
        color = "red" if rec.value > 0 else ("blue" if rec.value < 0 else "gray")
        label = rec.dst_label if rec.dst_label is not None else rec.dst
        lines.append(
            f'  {nid} [width={size:.2f}, color={color}, label="{label}"];'
        )
        emitted_nodes.add(nid)
    for rec in records:
        if rec.kind != "weight":
            continue
        src = node_id(rec.layer, rec.src, "src")
        dst = node_id(rec.layer, rec.dst, "dst")
        for nid, lab in ((src, rec.src_label), (dst, rec.dst_label)):
            if nid not in emitted_nodes:
                text = lab if lab is not None else ""
                lines.append(f'  {nid} [label="{text}"];')
                emitted_nodes.add(nid)
        color = "red" if rec.value > 0 else ("blue" if rec.value < 0 else "gray")
        width = _WIDTH_CLASSES[_magnitude_class(rec.value, weight_max[rec.layer])]
        lines.append(f"  {src} -> {dst} [color={color}, penwidth={width:.1f}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_export(
    records: list[WeightRecord], out_prefix: str | Path, graph_name: str = "weights"
) -> tuple[Path, Path]:
    out_prefix = Path(out_prefix)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)
    tsv_path = out_prefix.with_suffix(".tsv")
    dot_path = out_prefix.with_suffix(".dot")
    for path, text in (
        (tsv_path, records_to_tsv(records)),
        (dot_path, records_to_dot(records, graph_name)),
    ):
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(text, encoding="ascii")
        tmp.replace(path)
    return tsv_path, dot_path
