"""Rule layouts: per-sample sparse maps from matrix/vector positions into a
shared parameter pool.

A layout lists, for one input sample, which cells of the weight matrix and
bias vector hold which pool parameter; absent cells are zero. Indices here
are 0-based throughout: rows/cols index matrix positions, ``weight_index``
and ``bias_index`` index the pools (pool sizes N and M).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, FixtureError
from .graphs import UNREACHABLE, LabeledGraph

H_LABEL = 1
C_LABEL = 2
SINGLE = "single"
DOUBLE = "double"


@dataclass
class RuleLayout:
    """Sparse assignment (row, col) -> weight pool index, row -> bias index."""

    out_dim: int
    in_dim: int
    rows: np.ndarray
    cols: np.ndarray
    weight_idx: np.ndarray
    bias_rows: np.ndarray
    bias_idx: np.ndarray
    weight_pool_size: int
    bias_pool_size: int

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.int32)
        self.cols = np.asarray(self.cols, dtype=np.int32)
        self.weight_idx = np.asarray(self.weight_idx, dtype=np.int32)
        self.bias_rows = np.asarray(self.bias_rows, dtype=np.int32)
        self.bias_idx = np.asarray(self.bias_idx, dtype=np.int32)

    @property
    def nonzeros(self) -> int:
        return len(self.rows)

    def validate(self) -> None:
        if self.out_dim < 1 or self.in_dim < 1:
            raise ContractError("layout dimensions must be positive")
        if len({(int(r), int(c)) for r, c in zip(self.rows, self.cols)}) != len(
            self.rows
        ):
            raise ContractError("duplicate (row, col) entry")
        if len(set(self.bias_rows.tolist())) != len(self.bias_rows):
            raise ContractError("duplicate bias row")
        for arr, hi, what in (
            (self.rows, self.out_dim, "row"),
            (self.cols, self.in_dim, "col"),
            (self.weight_idx, self.weight_pool_size, "weight index"),
            (self.bias_rows, self.out_dim, "bias row"),
            (self.bias_idx, self.bias_pool_size, "bias index"),
        ):
            if arr.size and (arr.min() < 0 or arr.max() >= hi):
                raise ContractError(f"{what} outside [0, {hi})")

    def index_matrix(self) -> np.ndarray:
        """Dense weight-index matrix with -1 in empty cells."""
        mat = np.full((self.out_dim, self.in_dim), -1, dtype=np.int64)
        mat[self.rows, self.cols] = self.weight_idx
        return mat

    def bias_index_vector(self) -> np.ndarray:
        vec = np.full(self.out_dim, -1, dtype=np.int64)
        vec[self.bias_rows] = self.bias_idx
        return vec

    def dense_weights(self, weights: np.ndarray) -> np.ndarray:
        mat = np.zeros((self.out_dim, self.in_dim))
        mat[self.rows, self.cols] = np.asarray(weights)[self.weight_idx]
        return mat

    def dense_biases(self, biases: np.ndarray) -> np.ndarray:
        vec = np.zeros(self.out_dim)
        if self.bias_rows.size:
            vec[self.bias_rows] = np.asarray(biases)[self.bias_idx]
        return vec


def _no_bias() -> tuple[np.ndarray, np.ndarray]:
    empty = np.zeros(0, dtype=np.int32)
    return empty, empty


def layout_fc(in_dim: int, out_dim: int) -> RuleLayout:
    """Dense layout equivalent to a fully connected layer without bias:
    cell (i, j) holds pool weight i * in_dim + j, using all in*out weights."""
    if in_dim < 1 or out_dim < 1:
        raise ContractError("dimensions must be >= 1")
    rows = np.repeat(np.arange(out_dim, dtype=np.int32), in_dim)
    cols = np.tile(np.arange(in_dim, dtype=np.int32), out_dim)
    widx = rows.astype(np.int64) * in_dim + cols
    bias_rows, bias_idx = _no_bias()
    return RuleLayout(
        out_dim,
        in_dim,
        rows,
        cols,
        widx,
        bias_rows,
        bias_idx,
        weight_pool_size=in_dim * out_dim,
        bias_pool_size=0,
    )


def layout_cnn(img_rows: int, img_cols: int, kernel: int) -> RuleLayout:
    """Layout equivalent to valid-mode 2D cross-correlation with a square
    ``kernel x kernel`` filter at stride 1 over a row-major flattened image.

    Input length is img_rows * img_cols, output length
    (img_rows - kernel + 1) * (img_cols - kernel + 1); the pool holds the
    kernel entries in row-major order. The nonzero pattern is the doubly
    block circulant matrix of the kernel.
    """
    if kernel < 1:
        raise ContractError("kernel must be >= 1")
    if kernel > img_rows or kernel > img_cols:
        raise ContractError("kernel larger than image")
    out_r = img_rows - kernel + 1
    out_c = img_cols - kernel + 1
    rows, cols, widx = [], [], []
    for r in range(out_r):
        for c in range(out_c):
            out_index = r * out_c + c
            for a in range(kernel):
                for b in range(kernel):
                    rows.append(out_index)
                    cols.append((r + a) * img_cols + (c + b))
                    widx.append(a * kernel + b)
    bias_rows, bias_idx = _no_bias()
    return RuleLayout(
        out_r * out_c,
        img_rows * img_cols,
        np.asarray(rows),
        np.asarray(cols),
        np.asarray(widx),
        bias_rows,
        bias_idx,
        weight_pool_size=kernel * kernel,
        bias_pool_size=0,
    )


def layout_graph_propagation(
    distances: np.ndarray,
    node_labels: np.ndarray,
    alphabet_size: int,
    valid_distances: tuple[int, ...],
) -> RuleLayout:
    """Node-to-node layout gated by pairwise distance.

    A cell (i, j) is present iff the distance between i and j is in the
    valid set; its weight index encodes the triple (label_i, label_j,
    distance) densely: ((l_i - 1) * A + (l_j - 1)) * |D| + rank(distance).
    Row i carries bias index l_i - 1. Pool sizes: N = A^2 * |D|, M = A.
    """
    D = tuple(sorted(set(int(d) for d in valid_distances)))
    if not D:
        raise ContractError("valid distance set must be nonempty")
    if any(d < 0 for d in D):
        raise ContractError("distances are non-negative")
    labels = np.asarray(node_labels, dtype=np.int64)
    n = len(labels)
    if labels.size and (labels.min() < 1 or labels.max() > alphabet_size):
        raise ContractError(
            f"labels must lie in 1..{alphabet_size} (apply the cap first)"
        )
    if distances.shape != (n, n):
        raise ContractError("distance matrix shape mismatch")
    sorted_d = np.asarray(D, dtype=np.int64)
    reachable = distances != UNREACHABLE
    pos = np.searchsorted(sorted_d, distances, side="left")
    pos_clipped = np.minimum(pos, len(D) - 1)
    member = reachable & (sorted_d[pos_clipped] == distances)
    rows, cols = np.nonzero(member)
    rank = pos_clipped[rows, cols]
    widx = ((labels[rows] - 1) * alphabet_size + (labels[cols] - 1)) * len(D) + rank
    return RuleLayout(
        n,
        n,
        rows,
        cols,
        widx,
        np.arange(n, dtype=np.int32),
        (labels - 1).astype(np.int32),
        weight_pool_size=alphabet_size * alphabet_size * len(D),
        bias_pool_size=alphabet_size,
    )


def layout_aggregation(
    node_labels: np.ndarray, alphabet_size: int, out_dim: int
) -> RuleLayout:
    """Dense layout collapsing a node signal to ``out_dim`` values.

    Cell (r, i) holds weight (l_i - 1) * out_dim + r, so each label owns a
    block of out_dim pool weights; the bias is an ordinary per-row bias.
    Pool sizes: N = out_dim * A, M = out_dim. The output is invariant under
    node permutations because weights depend on labels only.
    """
    if out_dim < 1:
        raise ContractError("output size must be >= 1")
    labels = np.asarray(node_labels, dtype=np.int64)
    n = len(labels)
    if labels.size and (labels.min() < 1 or labels.max() > alphabet_size):
        raise ContractError(f"labels must lie in 1..{alphabet_size}")
    rows = np.repeat(np.arange(out_dim, dtype=np.int32), n)
    cols = np.tile(np.arange(n, dtype=np.int32), out_dim)
    widx = (labels[cols] - 1) * out_dim + rows
    return RuleLayout(
        out_dim,
        n,
        rows,
        cols,
        widx,
        np.arange(out_dim, dtype=np.int32),
        np.arange(out_dim, dtype=np.int32),
        weight_pool_size=out_dim * alphabet_size,
        bias_pool_size=out_dim,
    )


@dataclass
class MoleculeFixture:
    """Tiny molecule graph for the hand-checked two-layer example: nodes are
    hydrogen (label 1) or carbon (label 2), edges carry a bond kind."""

    graph: LabeledGraph
    bond_kinds: dict[tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self):
        labels = set(self.graph.node_labels.tolist())
        if not labels <= {H_LABEL, C_LABEL}:
            raise FixtureError(f"unexpected node labels {sorted(labels)}")
        normalized = {}
        for (u, v), kind in self.bond_kinds.items():
            if kind not in (SINGLE, DOUBLE):
                raise FixtureError(f"unexpected bond kind {kind!r}")
            normalized[(min(u, v), max(u, v))] = kind
        for edge in self.graph.edges:
            if edge not in normalized:
                raise FixtureError(f"edge {edge} has no bond kind")
        self.bond_kinds = normalized


def layout_mol(fixture: MoleculeFixture) -> RuleLayout:
    """Six-weight molecular rule: diagonal self-weights per element, plus
    one weight per (element pair, bond kind) combination that occurs:

      0: H self    1: C self    2: H->C single   3: C->H single
      4: C-C single             5: C-C double

    No bias. Cells not matching any case are zero.
    """
    g = fixture.graph
    labels = g.node_labels
    rows, cols, widx = [], [], []
    for i in range(g.node_count):
        rows.append(i)
        cols.append(i)
        widx.append(0 if labels[i] == H_LABEL else 1)
    for u, v in g.edges:
        kind = fixture.bond_kinds[(u, v)]
        for i, j in ((u, v), (v, u)):
            li, lj = labels[i], labels[j]
            if kind == SINGLE and li == H_LABEL and lj == C_LABEL:
                index = 2
            elif kind == SINGLE and li == C_LABEL and lj == H_LABEL:
                index = 3
            elif kind == SINGLE and li == C_LABEL and lj == C_LABEL:
                index = 4
            elif kind == DOUBLE and li == C_LABEL and lj == C_LABEL:
                index = 5
            else:
                continue
            rows.append(i)
            cols.append(j)
            widx.append(index)
    bias_rows, bias_idx = _no_bias()
    return RuleLayout(
        g.node_count,
        g.node_count,
        np.asarray(rows),
        np.asarray(cols),
        np.asarray(widx),
        bias_rows,
        bias_idx,
        weight_pool_size=6,
        bias_pool_size=0,
    )


def ethylene_fixture() -> MoleculeFixture:
    """H H H H C C on six nodes; the carbon pair is bonded to all hydrogens
    pairwise as drawn in the reference layout. The C-C bond is tagged single
    to match the hand-checked weight matrix."""
    g = LabeledGraph(
        6,
        ((0, 4), (1, 4), (2, 5), (3, 5), (4, 5)),
        np.asarray([H_LABEL, H_LABEL, H_LABEL, H_LABEL, C_LABEL, C_LABEL]),
    )
    kinds = {edge: SINGLE for edge in g.edges}
    return MoleculeFixture(g, kinds)


def cyclopropenylidene_fixture() -> MoleculeFixture:
    """H H C C C on five nodes: a carbon triangle with two hydrogens, with
    one double bond inside the triangle."""
    g = LabeledGraph(
        5,
        ((0, 2), (1, 3), (2, 3), (2, 4), (3, 4)),
        np.asarray([H_LABEL, H_LABEL, C_LABEL, C_LABEL, C_LABEL]),
    )
    kinds = {edge: SINGLE for edge in g.edges}
    kinds[(2, 3)] = DOUBLE
    return MoleculeFixture(g, kinds)
