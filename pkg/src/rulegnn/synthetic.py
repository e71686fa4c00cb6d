"""Deterministic generators for the synthetic benchmark datasets.

Every generator is a pure function of its parameters and seed. Node indices
are shuffled after construction so models cannot exploit build order, and
class labels are always derivable from the generated graph alone.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import GenerationError
from .graphs import (
    UNREACHABLE,
    GraphDataset,
    LabeledGraph,
    all_pairs_distances,
    are_isomorphic,
    permute_graph,
)
from .labeling import wl_equivalent

# Skip set of the standard 10-class circular-skip-link benchmark.
DEFAULT_CSL_SKIPS = (2, 3, 4, 5, 6, 9, 11, 12, 13, 16)

# Default snowflake attachment family: 4-regular circulants on 14 nodes with
# the listed skip pairs. Same degree and order makes them mutually invisible
# to color refinement; these four lie in distinct isomorphism classes and
# have distinct (4-cycle, 5-cycle) count profiles per node. Both properties
# are re-validated at generation time.
DEFAULT_SNOWFLAKE_SKIPS = ((1, 2), (1, 3), (1, 4), (1, 6))
SNOWFLAKE_ATTACHMENT_NODES = 14


def _cycle_edges(n: int, offset: int = 0) -> list[tuple[int, int]]:
    return [(offset + i, offset + (i + 1) % n) for i in range(n)]


def _shuffled(g: LabeledGraph, rng: np.random.Generator) -> LabeledGraph:
    return permute_graph(g, rng.permutation(g.node_count))


def gen_long_rings(
    count: int = 1200, ring_length: int = 100, seed: int = 0
) -> GraphDataset:
    """Cycles with four marked nodes at quarter offsets.

    Labels 1..4 sit at pairwise distance ``ring_length/4`` or
    ``ring_length/2``; every other node is labeled 0. The class is c when
    label 1 and label c+2 are antipodal (distance ``ring_length/2``).
    """
    if ring_length % 4 != 0:
        raise GenerationError("ring length must be divisible by 4")
    if count % 3 != 0:
        raise GenerationError("count must be divisible by 3 for balanced classes")
    rng = np.random.default_rng(seed)
    quarter = ring_length // 4
    graphs, classes = [], []
    per_class = count // 3
    for cls in range(3):
        for _ in range(per_class):
            q = int(rng.integers(ring_length))
            labels = np.zeros(ring_length, dtype=np.int64)
            labels[q] = 1
            labels[(q + 2 * quarter) % ring_length] = cls + 2
            others = [lab for lab in (2, 3, 4) if lab != cls + 2]
            if rng.integers(2):
                others.reverse()
            labels[(q + quarter) % ring_length] = others[0]
            labels[(q + 3 * quarter) % ring_length] = others[1]
            g = LabeledGraph(ring_length, tuple(_cycle_edges(ring_length)), labels)
            graphs.append(_shuffled(g, rng))
            classes.append(cls)
    return GraphDataset("LongRings", graphs, np.asarray(classes), num_classes=3)


RING_LENGTH_EVEN_ODD = 16


def _even_odd_ring(rng: np.random.Generator) -> tuple[LabeledGraph, np.ndarray]:
    labels = rng.permutation(RING_LENGTH_EVEN_ODD).astype(np.int64)
    g = LabeledGraph(
        RING_LENGTH_EVEN_ODD, tuple(_cycle_edges(RING_LENGTH_EVEN_ODD)), labels
    )
    return g, labels


def _even_odd_class4(labels: np.ndarray) -> int:
    pos0 = int(np.flatnonzero(labels == 0)[0])
    n = RING_LENGTH_EVEN_ODD
    x = int(labels[(pos0 + n // 2) % n])
    y = int(labels[(pos0 + n // 4) % n])
    z = int(labels[(pos0 - n // 4) % n])
    return 2 * (x % 2) + ((y + z) % 2)


def _even_odd_count2(labels: np.ndarray) -> int | None:
    """0 if strictly more antipodal label sums are even, 1 if more are odd,
    None on a tie (caller resamples)."""
    n = RING_LENGTH_EVEN_ODD
    sums = [int(labels[i]) + int(labels[(i + n // 2) % n]) for i in range(n // 2)]
    even = sum(1 for s in sums if s % 2 == 0)
    odd = len(sums) - even
    if even == odd:
        return None
    return 0 if even > odd else 1


def gen_even_odd_rings(
    count: int = 1200, variant: str = "classes4", seed: int = 0
) -> GraphDataset:
    """Rings of 16 nodes labeled by a random permutation of 0..15.

    variant="classes4": the class combines the parity of the label opposite
    the 0-labeled node with the parity of the sum of the two labels at
    distance 4 from it. variant="count2": class 0 when more antipodal label
    pair sums are even than odd (ties are resampled). Rejection sampling
    enforces exact class balance.
    """
    if variant == "classes4":
        num_classes, name = 4, "EvenOddRings"
    elif variant == "count2":
        num_classes, name = 2, "EvenOddRingsCount"
    else:
        raise GenerationError(f"unknown variant {variant!r}")
    if count % num_classes != 0:
        raise GenerationError(f"count must be divisible by {num_classes}")
    rng = np.random.default_rng(seed)
    per_class = count // num_classes
    remaining = {c: per_class for c in range(num_classes)}
    graphs: list[LabeledGraph] = []
    classes: list[int] = []
    attempts = 0
    max_attempts = 1000 * count
    while sum(remaining.values()) > 0:
        attempts += 1
        if attempts > max_attempts:
            raise GenerationError(
                f"could not balance {name} classes within {max_attempts} attempts"
            )
        g, labels = _even_odd_ring(rng)
        cls = (
            _even_odd_class4(labels)
            if variant == "classes4"
            else _even_odd_count2(labels)
        )
        if cls is None or remaining[cls] == 0:
            continue
        remaining[cls] -= 1
        graphs.append(_shuffled(g, rng))
        classes.append(cls)
    order = np.argsort(np.asarray(classes), kind="stable")
    graphs = [graphs[i] for i in order]
    classes = [classes[i] for i in order]
    return GraphDataset(name, graphs, np.asarray(classes), num_classes=num_classes)


def circulant_graph(n: int, skips: Sequence[int], labels=None) -> LabeledGraph:
    """Circulant on n nodes: i connects to i +/- s (mod n) for each skip s."""
    edges = set()
    for s in skips:
        for i in range(n):
            j = (i + s) % n
            if i != j:
                edges.add((min(i, j), max(i, j)))
    if labels is None:
        labels = np.zeros(n, dtype=np.int64)
    return LabeledGraph(n, tuple(sorted(edges)), labels)


def _check_skip_equivalences(n: int, skips: Sequence[int]) -> None:
    """Reject skip sets with duplicate or equivalent circulant classes.

    For skips s, s' the circulants C_n(1, s) and C_n(1, s') coincide when
    s' is -s, or (for prime n, by multiplier equivalence) +/- the modular
    inverse of s.
    """
    skips = list(skips)
    if len(set(skips)) != len(skips):
        raise GenerationError("duplicate skip values")
    prime = n > 1 and all(n % d for d in range(2, int(n**0.5) + 1))
    orbits = []
    for s in skips:
        if not 2 <= s <= n - 2:
            raise GenerationError(f"skip {s} outside 2..{n - 2}")
        orbit = {s, n - s}
        if prime:
            inv = pow(s, -1, n)
            orbit |= {inv, n - inv}
        orbits.append(orbit)
    for i in range(len(skips)):
        for j in range(i + 1, len(skips)):
            if orbits[i] & orbits[j]:
                raise GenerationError(
                    f"skips {skips[i]} and {skips[j]} give equivalent circulants"
                )


def gen_csl(
    count: int = 150,
    nodes: int = 41,
    skips: Sequence[int] = DEFAULT_CSL_SKIPS,
    seed: int = 0,
) -> GraphDataset:
    """Circular-skip-link graphs: ring plus one skip length per class."""
    skips = tuple(skips)
    _check_skip_equivalences(nodes, skips)
    if count % len(skips) != 0:
        raise GenerationError(f"count must be divisible by {len(skips)} classes")
    rng = np.random.default_rng(seed)
    per_class = count // len(skips)
    graphs, classes = [], []
    for cls, skip in enumerate(skips):
        base = circulant_graph(nodes, (1, skip))
        for _ in range(per_class):
            graphs.append(_shuffled(base, rng))
            classes.append(cls)
    return GraphDataset("CSL", graphs, np.asarray(classes), num_classes=len(skips))


def snowflake_attachment_family(
    skips: Sequence[tuple[int, int]] = DEFAULT_SNOWFLAKE_SKIPS,
    nodes: int = SNOWFLAKE_ATTACHMENT_NODES,
) -> list[LabeledGraph]:
    return [circulant_graph(nodes, pair) for pair in skips]


def validate_attachment_family(family: Sequence[LabeledGraph]) -> None:
    """The family must be connected, same-order, pairwise refinement-blind
    and pairwise non-isomorphic; anything else is a configuration error."""
    if len(family) < 2:
        raise GenerationError("attachment family needs at least 2 graphs")
    order = family[0].node_count
    for idx, g in enumerate(family):
        if g.node_count != order:
            raise GenerationError("attachment graphs must share a node count")
        if (all_pairs_distances(g) == UNREACHABLE).any():
            raise GenerationError(f"attachment graph {idx} is disconnected")
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            if not wl_equivalent(family[i], family[j]):
                raise GenerationError(
                    f"attachment graphs {i} and {j} are distinguishable by "
                    "color refinement"
                )
            if are_isomorphic(family[i], family[j]):
                raise GenerationError(f"attachment graphs {i} and {j} are isomorphic")


def gen_snowflakes(
    count: int = 1000,
    seed: int = 0,
    min_cycle: int = 3,
    max_cycle: int = 12,
    family: Sequence[LabeledGraph] | None = None,
) -> GraphDataset:
    """Central cycle with one attachment glued to every cycle node.

    Exactly one cycle node is labeled 1; the class is the index of the
    attachment graph bridged to that node. All attachments come from a
    validated family that color refinement cannot tell apart, so the class
    is invisible to plain refinement-based models.
    """
    if family is None:
        family = snowflake_attachment_family()
    validate_attachment_family(family)
    num_classes = len(family)
    if count % num_classes != 0:
        raise GenerationError(f"count must be divisible by {num_classes}")
    rng = np.random.default_rng(seed)
    graphs, classes = [], []
    per_class = count // num_classes
    for cls in range(num_classes):
        for _ in range(per_class):
            cyc = int(rng.integers(min_cycle, max_cycle + 1))
            special = int(rng.integers(cyc))
            edges = _cycle_edges(cyc)
            m_nodes = family[0].node_count
            total = cyc + cyc * m_nodes
            labels = np.zeros(total, dtype=np.int64)
            labels[special] = 1
            for i in range(cyc):
                kind = cls if i == special else int(rng.integers(num_classes))
                offset = cyc + i * m_nodes
                att = family[kind]
                edges.extend(
                    (offset + u, offset + v) for u, v in att.edges
                )
                edges.append((i, offset))  # bridge to the attachment
            g = LabeledGraph(total, tuple(edges), labels)
            graphs.append(_shuffled(g, rng))
            classes.append(cls)
    return GraphDataset(
        "Snowflakes", graphs, np.asarray(classes), num_classes=num_classes
    )


GENERATORS = {
    "longrings": gen_long_rings,
    "evenoddrings": lambda count=1200, seed=0: gen_even_odd_rings(
        count, "classes4", seed
    ),
    "evenoddringscount": lambda count=1200, seed=0: gen_even_odd_rings(
        count, "count2", seed
    ),
    "csl": gen_csl,
    "snowflakes": gen_snowflakes,
}


def generate(kind: str, **kwargs) -> GraphDataset:
    key = kind.lower()
    if key not in GENERATORS:
        raise GenerationError(
            f"unknown synthetic dataset {kind!r}; options: {sorted(GENERATORS)}"
        )
    return GENERATORS[key](**kwargs)
