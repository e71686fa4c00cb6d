"""Node labeling functions: Weisfeiler-Leman refinement, pattern-embedding
counting, frequency-based label capping.

All labelings are computed dataset-globally so that structurally equal
neighborhoods in different graphs receive equal labels, and are compacted
to consecutive integers 1..alphabet_size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractError, ResourceError
from .graphs import GraphDataset, LabeledGraph

# Extension steps allowed per graph while enumerating patterns before a
# ResourceError is raised (dense graphs can blow up combinatorially).
DEFAULT_ENUMERATION_BUDGET = 50_000_000


@dataclass(frozen=True)
class PatternSpec:
    """One countable pattern; ``size`` is the vertex count of the pattern
    except for paths where it is the edge count (a path of size 1 is an edge).

    kinds: simple_cycle | induced_cycle | clique | star | path | single_edge
    For stars ``size`` counts the leaves.
    """

    kind: str
    size: int = 0

    KINDS = ("simple_cycle", "induced_cycle", "clique", "star", "path", "single_edge")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ContractError(f"unknown pattern kind {self.kind!r}")
        minima = {
            "simple_cycle": 3,
            "induced_cycle": 3,
            "clique": 2,
            "star": 1,
            "path": 1,
            "single_edge": 0,
        }
        if self.size < minima[self.kind]:
            raise ContractError(
                f"{self.kind} needs size >= {minima[self.kind]}, got {self.size}"
            )

    def descriptor(self) -> str:
        if self.kind == "single_edge":
            return "edge"
        return f"{self.kind}{self.size}"


def cycle_patterns(max_length: int, induced: bool = False) -> list[PatternSpec]:
    """All cycle patterns of length 3..max_length as separate counts."""
    kind = "induced_cycle" if induced else "simple_cycle"
    return [PatternSpec(kind, s) for s in range(3, max_length + 1)]


@dataclass
class DatasetLabeling:
    """Per-graph node label arrays (values 1..alphabet_size) plus metadata."""

    labels: list[np.ndarray]
    alphabet_size: int
    source: str

    def frequencies(self) -> np.ndarray:
        """Dataset-wide count per label value, index 0 unused."""
        freq = np.zeros(self.alphabet_size + 1, dtype=np.int64)
        for arr in self.labels:
            freq += np.bincount(arr, minlength=self.alphabet_size + 1)
        return freq

    def validate(self) -> None:
        used = set()
        for arr in self.labels:
            if arr.size:
                if arr.min() < 1 or arr.max() > self.alphabet_size:
                    raise ContractError("label outside 1..alphabet_size")
                used.update(np.unique(arr).tolist())
        if used and max(used) != self.alphabet_size:
            raise ContractError("alphabet_size must equal the maximum used label")


def _compact(values: list[np.ndarray], source: str) -> DatasetLabeling:
    """Map arbitrary per-node keys to 1..K in sorted key order."""
    distinct = sorted(set().union(*[set(arr.tolist()) for arr in values]))
    mapping = {v: i + 1 for i, v in enumerate(distinct)}
    labels = [
        np.asarray([mapping[v] for v in arr.tolist()], dtype=np.int64)
        for arr in values
    ]
    return DatasetLabeling(labels, alphabet_size=len(distinct), source=source)


def original_labels(dataset: GraphDataset) -> DatasetLabeling:
    """Raw node labels compacted dataset-globally (sorted raw-value order)."""
    return _compact([g.node_labels for g in dataset.graphs], "original")


def degree_labels(dataset: GraphDataset) -> DatasetLabeling:
    """Node degree as the label, for datasets without meaningful labels."""
    return _compact([g.degrees for g in dataset.graphs], "degree")


def wl_labels(
    dataset: GraphDataset, k: int, initial: DatasetLabeling | None = None
) -> DatasetLabeling:
    """Weisfeiler-Leman labels after ``k`` refinement iterations.

    Iteration 0 is the (compacted) initial labeling; each following round
    encodes (own label, sorted multiset of neighbor labels). The encoding
    dictionary is shared across the whole dataset: distinct signatures are
    sorted and numbered 1..K, which is deterministic and collision-free.
    """
    if k < 0:
        raise ContractError("iteration count must be >= 0")
    current = initial if initial is not None else original_labels(dataset)
    labels = [arr.copy() for arr in current.labels]
    for _ in range(k):
        signatures: list[list[tuple]] = []
        for g, arr in zip(dataset.graphs, labels):
            adj = g.adjacency
            signatures.append(
                [
                    (int(arr[v]), tuple(sorted(int(arr[u]) for u in adj[v])))
                    for v in range(g.node_count)
                ]
            )
        distinct = sorted(set(sig for graph_sigs in signatures for sig in graph_sigs))
        encoding = {sig: i + 1 for i, sig in enumerate(distinct)}
        labels = [
            np.asarray([encoding[sig] for sig in graph_sigs], dtype=np.int64)
            for graph_sigs in signatures
        ]
    alphabet = max((int(arr.max()) for arr in labels if arr.size), default=0)
    return DatasetLabeling(labels, alphabet_size=alphabet, source=f"wl{k}")


def wl_equivalent(a: LabeledGraph, b: LabeledGraph) -> bool:
    """True iff color refinement from constant labels cannot distinguish a, b.

    Refinement runs jointly over both graphs with a shared palette (the
    standard refinement-based isomorphism test); the graphs are equivalent
    when their stable color multisets coincide.
    """
    graphs = (a, b)
    labels = [np.ones(g.node_count, dtype=np.int64) for g in graphs]
    prev_classes = 1
    for _ in range(a.node_count + b.node_count + 1):
        all_sigs = []
        for g, arr in zip(graphs, labels):
            adj = g.adjacency
            all_sigs.append(
                [
                    (int(arr[v]), tuple(sorted(int(arr[u]) for u in adj[v])))
                    for v in range(g.node_count)
                ]
            )
        palette = {
            sig: i + 1
            for i, sig in enumerate(sorted(set(s for sigs in all_sigs for s in sigs)))
        }
        labels = [
            np.asarray([palette[s] for s in sigs], dtype=np.int64)
            for sigs in all_sigs
        ]
        if len(palette) == prev_classes:
            break
        prev_classes = len(palette)
    return sorted(labels[0].tolist()) == sorted(labels[1].tolist())


def cap_labels(labeling: DatasetLabeling, cap: int) -> DatasetLabeling:
    """Keep the ``cap - 1`` most frequent labels, merge the rest into ``cap``.

    The most frequent label becomes 1, the next 2, and so on; frequency ties
    break by ascending original label id. When there are at most ``cap``
    distinct labels this is a pure frequency-rank renaming without merging.
    """
    if cap < 1:
        raise ContractError("label cap must be >= 1")
    freq = labeling.frequencies()
    present = np.flatnonzero(freq[1:] > 0) + 1
    ranked = sorted(present.tolist(), key=lambda lab: (-int(freq[lab]), lab))
    mapping = np.zeros(labeling.alphabet_size + 1, dtype=np.int64)
    if len(ranked) <= cap:
        for rank, lab in enumerate(ranked, start=1):
            mapping[lab] = rank
        alphabet = len(ranked)
    else:
        for rank, lab in enumerate(ranked[: cap - 1], start=1):
            mapping[lab] = rank
        for lab in ranked[cap - 1 :]:
            mapping[lab] = cap
        alphabet = cap
    labels = [mapping[arr] for arr in labeling.labels]
    return DatasetLabeling(
        labels, alphabet_size=alphabet, source=f"{labeling.source}_cap{cap}"
    )


# ---------------------------------------------------------------------------
# Pattern-embedding counting
# ---------------------------------------------------------------------------


def count_pattern_embeddings(
    g: LabeledGraph, pattern: PatternSpec, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> np.ndarray:
    """Per-node count of distinct pattern occurrences containing the node.

    Occurrences are counted as subgraph copies (vertex/edge sets), not as
    maps: the 4-cycle contains exactly one occurrence of the length-4 cycle.
    """
    if pattern.kind == "single_edge":
        return g.degrees.copy()
    if pattern.kind == "star":
        return _count_stars(g, pattern.size)
    if pattern.kind == "clique":
        return _count_cliques(g, pattern.size, budget)
    if pattern.kind == "path":
        return _count_paths(g, pattern.size, budget)
    if pattern.kind in ("simple_cycle", "induced_cycle"):
        return _count_cycles(g, pattern.size, pattern.kind == "induced_cycle", budget)
    raise ContractError(f"unknown pattern kind {pattern.kind!r}")


def _count_stars(g: LabeledGraph, leaves: int) -> np.ndarray:
    if leaves == 1:
        # a one-leaf star is a single edge; center and leaf roles coincide
        return g.degrees.copy()
    counts = np.zeros(g.node_count, dtype=np.int64)
    deg = g.degrees
    for center in range(g.node_count):
        d = int(deg[center])
        if d < leaves:
            continue
        counts[center] += math.comb(d, leaves)
        leaf_share = math.comb(d - 1, leaves - 1)
        for nbr in g.adjacency[center]:
            counts[nbr] += leaf_share
    return counts


def _count_cliques(g: LabeledGraph, size: int, budget: int) -> np.ndarray:
    counts = np.zeros(g.node_count, dtype=np.int64)
    masks = g.adjacency_masks
    steps = 0

    def extend(members: list[int], candidates: int) -> None:
        nonlocal steps
        if len(members) == size:
            for v in members:
                counts[v] += 1
            return
        cand = candidates
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            steps += 1
            if steps > budget:
                raise ResourceError(
                    f"clique enumeration budget exceeded on a "
                    f"{g.node_count}-node graph"
                )
            members.append(v)
            # restrict to common neighbors above v to keep members increasing
            extend(members, candidates & masks[v] & ~((1 << (v + 1)) - 1))
            members.pop()

    full = (1 << g.node_count) - 1
    for v in range(g.node_count):
        extend([v], masks[v] & full & ~((1 << (v + 1)) - 1))
    return counts


def _count_paths(g: LabeledGraph, length: int, budget: int) -> np.ndarray:
    """Simple paths with exactly ``length`` edges, counted once per edge set."""
    counts = np.zeros(g.node_count, dtype=np.int64)
    masks = g.adjacency_masks
    steps = 0
    path: list[int] = []

    def extend(v: int, visited: int) -> None:
        nonlocal steps
        path.append(v)
        if len(path) == length + 1:
            # count each path once: orient from the smaller endpoint
            if path[0] < path[-1]:
                for u in path:
                    counts[u] += 1
            path.pop()
            return
        cand = masks[v] & ~visited
        while cand:
            low = cand & -cand
            w = low.bit_length() - 1
            cand ^= low
            steps += 1
            if steps > budget:
                raise ResourceError(
                    f"path enumeration budget exceeded on a "
                    f"{g.node_count}-node graph"
                )
            extend(w, visited | low)
        path.pop()

    for start in range(g.node_count):
        extend(start, 1 << start)
    return counts


def _count_cycles(
    g: LabeledGraph, length: int, induced: bool, budget: int
) -> np.ndarray:
    """Simple (or chordless) cycles of exactly ``length`` vertices.

    Each cycle is enumerated once: rooted at its minimum vertex, walking
    only vertices above the root, with the two directions deduplicated by
    requiring the first non-root vertex to be smaller than the last.
    """
    counts = np.zeros(g.node_count, dtype=np.int64)
    masks = g.adjacency_masks
    steps = 0
    path: list[int] = []

    def extend(root: int, v: int, visited: int, chords: int) -> None:
        """Pick the vertex after v; ``chords`` holds neighbors of path[:-1],
        banned for induced cycles (a hit would be a chord)."""
        nonlocal steps
        path.append(v)
        closing = len(path) == length - 2
        cand = masks[v] & ~visited
        if induced:
            cand &= ~chords
        if closing:
            cand &= masks[root]
        elif induced:
            # intermediate vertices adjacent to the root would chord to it
            cand &= ~masks[root]
        while cand:
            low = cand & -cand
            w = low.bit_length() - 1
            cand ^= low
            steps += 1
            if steps > budget:
                raise ResourceError(
                    f"cycle enumeration budget exceeded on a "
                    f"{g.node_count}-node graph"
                )
            if closing:
                if path[0] < w:
                    counts[root] += 1
                    for u in path:
                        counts[u] += 1
                    counts[w] += 1
            else:
                extend(root, w, visited | low, chords | masks[v])
        path.pop()

    for root in range(g.node_count):
        below = (1 << (root + 1)) - 1
        cand = masks[root] & ~below
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            extend(root, v, below | low, 0)
    return counts


def pattern_count_vectors(
    dataset: GraphDataset,
    patterns: Sequence[PatternSpec],
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> list[np.ndarray]:
    """Per-graph (node_count x len(patterns)) matrices of embedding counts."""
    vectors = []
    for gi, g in enumerate(dataset.graphs):
        cols = []
        for pattern in patterns:
            try:
                cols.append(count_pattern_embeddings(g, pattern, budget=budget))
            except ResourceError as exc:
                raise ResourceError(f"graph {gi}: {exc}") from exc
        vectors.append(np.stack(cols, axis=1) if cols else np.zeros((g.node_count, 0)))
    return vectors


def pattern_labels(
    dataset: GraphDataset,
    patterns: Sequence[PatternSpec],
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    precomputed: list[np.ndarray] | None = None,
) -> DatasetLabeling:
    """Label nodes by their pattern-count vectors: equal counts for every
    pattern in the set means equal label (dataset-globally)."""
    vectors = (
        precomputed
        if precomputed is not None
        else pattern_count_vectors(dataset, patterns, budget)
    )
    distinct = sorted(set(tuple(row) for mat in vectors for row in mat.tolist()))
    mapping = {vec: i + 1 for i, vec in enumerate(distinct)}
    labels = [
        np.asarray([mapping[tuple(row)] for row in mat.tolist()], dtype=np.int64)
        for mat in vectors
    ]
    descriptor = "pattern_" + "-".join(p.descriptor() for p in patterns)
    return DatasetLabeling(labels, alphabet_size=len(distinct), source=descriptor)
