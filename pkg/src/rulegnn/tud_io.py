"""Reading and writing graph datasets in the TUDataset multi-file text format.

A dataset ``NAME`` in directory ``dir`` consists of:

  dir/NAME_A.txt               one line per directed edge: ``u, v`` with
                               1-based global node ids (undirected graphs
                               normally list both directions; duplicates and
                               reversed copies are merged on read)
  dir/NAME_graph_indicator.txt one line per node: 1-based graph id
  dir/NAME_graph_labels.txt    one line per graph: integer class label (raw
                               values are remapped to 0..C-1 preserving the
                               sorted order of the distinct raw values)
  dir/NAME_node_labels.txt     optional, one line per node: integer label;
                               when absent every node gets label 0

Writing produces exactly this layout: edges are emitted in both directions
sorted by (source, target), ids are 1-based, node labels are always written.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError, StructuralError
from .graphs import GraphDataset, LabeledGraph


def _read_int_lines(path: Path) -> list[int]:
    values = []
    with open(path, "r", encoding="ascii") as fh:
        for line_no, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            try:
                values.append(int(text))
            except ValueError:
                raise ParseError(path, line_no, f"expected an integer, got {text!r}")
    return values


def _read_edge_lines(path: Path) -> list[tuple[int, int]]:
    edges = []
    with open(path, "r", encoding="ascii") as fh:
        for line_no, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            parts = text.split(",")
            if len(parts) != 2:
                raise ParseError(path, line_no, f"expected 'u, v', got {text!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(path, line_no, f"expected 'u, v', got {text!r}")
            edges.append((u, v))
    return edges


def parse_tud_dataset(directory: str | Path, name: str) -> GraphDataset:
    """Load a dataset from TUDataset text files.

    Graphs use per-graph 0-based node indexing. Missing node labels default
    to the constant label 0. Duplicate or reversed edge lines are merged.
    """
    directory = Path(directory)
    a_path = directory / f"{name}_A.txt"
    indicator_path = directory / f"{name}_graph_indicator.txt"
    labels_path = directory / f"{name}_graph_labels.txt"
    node_labels_path = directory / f"{name}_node_labels.txt"
    for required in (a_path, indicator_path, labels_path):
        if not required.exists():
            raise StructuralError(f"missing dataset file: {required}")

    indicator = _read_int_lines(indicator_path)
    raw_graph_labels = _read_int_lines(labels_path)
    num_graphs = len(raw_graph_labels)
    if any(gid < 1 or gid > num_graphs for gid in indicator):
        raise StructuralError(
            f"{indicator_path}: graph indicator outside 1..{num_graphs}"
        )

    # Global 1-based node id -> (graph index, local 0-based node id).
    node_graph = np.asarray(indicator, dtype=np.int64) - 1
    node_counts = np.bincount(node_graph, minlength=num_graphs)
    offsets = np.zeros(num_graphs, dtype=np.int64)
    np.cumsum(node_counts[:-1], out=offsets[1:])
    local_id = np.arange(len(indicator), dtype=np.int64) - offsets[node_graph]
    if (node_graph[1:] < node_graph[:-1]).any():
        raise StructuralError(f"{indicator_path}: graph ids must be non-decreasing")

    if node_labels_path.exists():
        node_labels = _read_int_lines(node_labels_path)
        if len(node_labels) != len(indicator):
            raise StructuralError(
                f"{node_labels_path}: {len(node_labels)} labels for "
                f"{len(indicator)} nodes"
            )
        node_labels = np.asarray(node_labels, dtype=np.int64)
    else:
        node_labels = np.zeros(len(indicator), dtype=np.int64)

    per_graph_edges: list[set[tuple[int, int]]] = [set() for _ in range(num_graphs)]
    for u, v in _read_edge_lines(a_path):
        if not (1 <= u <= len(indicator) and 1 <= v <= len(indicator)):
            raise StructuralError(f"{a_path}: node id ({u}, {v}) out of range")
        gu, gv = node_graph[u - 1], node_graph[v - 1]
        if gu != gv:
            raise StructuralError(
                f"{a_path}: edge ({u}, {v}) crosses graphs {gu + 1} and {gv + 1}"
            )
        lu, lv = int(local_id[u - 1]), int(local_id[v - 1])
        if lu == lv:
            raise StructuralError(f"{a_path}: self-loop at node {u}")
        per_graph_edges[gu].add((min(lu, lv), max(lu, lv)))

    graphs = []
    for gi in range(num_graphs):
        count = int(node_counts[gi])
        labels = node_labels[offsets[gi] : offsets[gi] + count]
        graphs.append(LabeledGraph(count, tuple(sorted(per_graph_edges[gi])), labels))

    distinct = sorted(set(raw_graph_labels))
    remap = {raw: i for i, raw in enumerate(distinct)}
    class_labels = np.asarray([remap[raw] for raw in raw_graph_labels], dtype=np.int64)
    return GraphDataset(name, graphs, class_labels, num_classes=len(distinct))


def write_tud_dataset(dataset: GraphDataset, directory: str | Path) -> None:
    """Write a dataset in TUDataset format (see module docstring)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = dataset.name

    offsets = np.zeros(len(dataset), dtype=np.int64)
    counts = np.asarray([g.node_count for g in dataset.graphs], dtype=np.int64)
    np.cumsum(counts[:-1], out=offsets[1:])

    edge_lines = []
    for gi, g in enumerate(dataset.graphs):
        base = int(offsets[gi]) + 1
        for u, v in g.edges:
            edge_lines.append((base + u, base + v))
            edge_lines.append((base + v, base + u))
    edge_lines.sort()

    with open(directory / f"{name}_A.txt", "w", encoding="ascii") as fh:
        for u, v in edge_lines:
            fh.write(f"{u}, {v}\n")
    with open(directory / f"{name}_graph_indicator.txt", "w", encoding="ascii") as fh:
        for gi, g in enumerate(dataset.graphs, start=1):
            fh.write(f"{gi}\n" * g.node_count)
    with open(directory / f"{name}_graph_labels.txt", "w", encoding="ascii") as fh:
        for label in dataset.class_labels:
            fh.write(f"{int(label)}\n")
    with open(directory / f"{name}_node_labels.txt", "w", encoding="ascii") as fh:
        for g in dataset.graphs:
            for label in g.node_labels:
                fh.write(f"{int(label)}\n")
