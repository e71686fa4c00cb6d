"""Graph representation, shortest-path precomputation and permutation utilities.

Conventions used throughout the package:
  - nodes are 0-based integers,
  - edges are unordered pairs stored as sorted ``(u, v)`` tuples with ``u < v``,
  - node labels are arbitrary integers at this level; labeling functions
    compact them to consecutive values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import ContractError, StructuralError

# Distance value marking an unreachable node pair.  A dedicated sentinel (not
# a large number) so that rules can treat "no finite distance" uniformly.
UNREACHABLE = -1


@dataclass
class LabeledGraph:
    """Undirected simple graph with one integer label per node.

    Immutable after construction by convention; helpers are cached.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]
    node_labels: np.ndarray

    def __post_init__(self):
        self.node_labels = np.asarray(self.node_labels, dtype=np.int64)
        normalized = []
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise StructuralError(f"self-loop at node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise StructuralError(f"edge ({u}, {v}) endpoint out of range")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise StructuralError(f"parallel edge {e}")
            seen.add(e)
            normalized.append(e)
        self.edges = tuple(sorted(normalized))
        if len(self.node_labels) != self.node_count:
            raise StructuralError(
                f"{len(self.node_labels)} labels for {self.node_count} nodes"
            )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for nbrs in adj:
            nbrs.sort()
        return adj

    @cached_property
    def adjacency_masks(self) -> list[int]:
        """Neighborhoods as int bitmasks; bit j set iff j is adjacent."""
        masks = [0] * self.node_count
        for u, v in self.edges:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return masks

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self._edge_set

    @cached_property
    def _edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.edges == other.edges
            and np.array_equal(self.node_labels, other.node_labels)
        )


@dataclass
class GraphDataset:
    """A named list of graphs plus per-graph class labels in [0, num_classes)."""

    name: str
    graphs: list[LabeledGraph]
    class_labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        self.class_labels = np.asarray(self.class_labels, dtype=np.int64)
        if len(self.class_labels) != len(self.graphs):
            raise StructuralError("class label count does not match graph count")
        if len(self.class_labels) and self.class_labels.min() < 0:
            raise StructuralError("negative class label")
        if len(self.class_labels) and self.class_labels.max() >= self.num_classes:
            raise StructuralError("class label outside [0, num_classes)")

    def __len__(self) -> int:
        return len(self.graphs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphDataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.num_classes == other.num_classes
            and np.array_equal(self.class_labels, other.class_labels)
            and self.graphs == other.graphs
        )


def all_pairs_distances(g: LabeledGraph) -> np.ndarray:
    """Exact unweighted shortest-path distances, UNREACHABLE for disconnected pairs.

    Returns an int32 matrix of shape (node_count, node_count).
    """
    n = g.node_count
    if n == 0:
        return np.zeros((0, 0), dtype=np.int32)
    if g.edge_count == 0:
        dist = np.full((n, n), UNREACHABLE, dtype=np.int32)
        np.fill_diagonal(dist, 0)
        return dist
    rows = np.fromiter((u for u, _ in g.edges), dtype=np.int64, count=g.edge_count)
    cols = np.fromiter((v for _, v in g.edges), dtype=np.int64, count=g.edge_count)
    data = np.ones(g.edge_count, dtype=np.int8)
    adj = csr_matrix((data, (rows, cols)), shape=(n, n))
    dense = shortest_path(adj, method="D", directed=False, unweighted=True)
    dist = np.full((n, n), UNREACHABLE, dtype=np.int32)
    finite = np.isfinite(dense)
    dist[finite] = dense[finite].astype(np.int32)
    return dist


def diameter(g: LabeledGraph) -> int:
    """Largest finite pairwise distance (0 for the empty/singleton graph)."""
    dist = all_pairs_distances(g)
    finite = dist[dist != UNREACHABLE]
    return int(finite.max()) if finite.size else 0


def permute_graph(g: LabeledGraph, perm: Sequence[int]) -> LabeledGraph:
    """Relabel nodes so node i of the input becomes node perm[i] of the output."""
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (g.node_count,) or not np.array_equal(
        np.sort(perm), np.arange(g.node_count)
    ):
        raise ContractError("perm is not a permutation of the node indices")
    edges = tuple((int(perm[u]), int(perm[v])) for u, v in g.edges)
    labels = np.empty_like(g.node_labels)
    labels[perm] = g.node_labels
    return LabeledGraph(g.node_count, edges, labels)


def graph_from_edges(
    edges: Iterable[tuple[int, int]],
    node_count: int | None = None,
    node_labels: Sequence[int] | None = None,
) -> LabeledGraph:
    """Convenience constructor; labels default to all zeros."""
    edges = [tuple(e) for e in edges]
    if node_count is None:
        node_count = max((max(e) for e in edges), default=-1) + 1
    if node_labels is None:
        node_labels = np.zeros(node_count, dtype=np.int64)
    return LabeledGraph(node_count, tuple(edges), np.asarray(node_labels))


def are_isomorphic(a: LabeledGraph, b: LabeledGraph) -> bool:
    """Exact isomorphism test by backtracking; intended for small graphs.

    Ignores node labels (structure only). Degree-sequence pruning plus
    per-node candidate filtering keeps this fast for graphs up to a few
    dozen nodes.
    """
    if a.node_count != b.node_count or a.edge_count != b.edge_count:
        return False
    n = a.node_count
    if n == 0:
        return True
    deg_a = a.degrees
    deg_b = b.degrees
    if sorted(deg_a.tolist()) != sorted(deg_b.tolist()):
        return False
    adj_a = a.adjacency_masks
    adj_b = b.adjacency_masks
    # Map most-constrained (highest-degree) nodes of `a` first.
    order = sorted(range(n), key=lambda v: -deg_a[v])
    mapping = [-1] * n
    used = [False] * n

    def extend(pos: int) -> bool:
        if pos == n:
            return True
        v = order[pos]
        for w in range(n):
            if used[w] or deg_b[w] != deg_a[v]:
                continue
            ok = True
            for prev_idx in range(pos):
                u = order[prev_idx]
                if ((adj_a[v] >> u) & 1) != ((adj_b[w] >> mapping[u]) & 1):
                    ok = False
                    break
            if not ok:
                continue
            mapping[v] = w
            used[w] = True
            if extend(pos + 1):
                return True
            used[w] = False
            mapping[v] = -1
        return False

    return extend(0)
