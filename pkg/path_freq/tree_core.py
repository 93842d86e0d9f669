"""Colored rooted trees: parsing, color normalization and the static ancestor index.

Nodes are numbered 1..n with node 1 as the root. Per-node arrays are stored with a
dummy entry at index 0, so ``parent[u]`` is valid for every node and ``parent[1] == 0``.
"""

from typing import List, Optional, Sequence, Tuple

import attrs
import numpy as np

from path_freq.errors import NodeRangeError, TreeFormatError
from path_freq.utils import getLogger

logger = getLogger(__name__)

NO_NODE = 0
MAX_WEIGHT_BUDGET = 2**40


@attrs.define(frozen=True)
class Tree:
    "An uncolored rooted tree given by its parent array."

    n: int
    parent: Tuple[int, ...]

    def children(self) -> List[List[int]]:
        kids: List[List[int]] = [[] for _ in range(self.n + 1)]
        for u in range(2, self.n + 1):
            kids[self.parent[u]].append(u)
        return kids


@attrs.define(frozen=True)
class ColoredTree(Tree):
    """A tree with colors normalized to 1..k and optional signed weights.

    color_labels maps a normalized color id back to the label used in the input.
    """

    color: Tuple[int, ...]
    weight: Optional[Tuple[int, ...]] = None
    color_labels: Tuple[int, ...] = ()

    @property
    def color_count(self) -> int:
        return len(self.color_labels) - 1

    @property
    def has_weights(self) -> bool:
        return self.weight is not None

    def label(self, c: int) -> int:
        return self.color_labels[c]


def _check_is_tree(n: int, parent: Sequence[int]) -> None:
    kids: List[List[int]] = [[] for _ in range(n + 1)]
    for u in range(2, n + 1):
        p = parent[u]
        if not 1 <= p <= n:
            raise TreeFormatError(f"Parent of node {u} is {p}, expected a node in 1..{n}")
        kids[p].append(u)

    seen = 1
    stack = [1]
    while stack:
        u = stack.pop()
        seen += len(kids[u])
        stack += kids[u]
        if seen > n:
            break
    if seen != n:
        raise TreeFormatError("not a tree: some nodes are unreachable from the root (cycle in parent links)")


def normalize_colors(raw: Sequence[int]) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    "Ranks the distinct values of raw (sort-based). Returns (normalized colors, labels by id)."
    labels = sorted(set(raw))
    rank = {c: i + 1 for i, c in enumerate(labels)}
    return tuple(rank[c] for c in raw), (0, *labels)


def make_tree(parents: Sequence[int], colors: Sequence[int], weights: Optional[Sequence[int]] = None) -> ColoredTree:
    """Builds a ColoredTree.

    Parameters:
        parents: parent of nodes 2..n, in order (length n-1).
        colors: color label of nodes 1..n.
        weights: optional signed weight of nodes 1..n.
    """
    n = len(colors)
    if n < 1:
        raise TreeFormatError("A tree needs at least one node")
    if len(parents) != n - 1:
        raise TreeFormatError(f"Expected {n - 1} parents for {n} nodes, got {len(parents)}")
    parent = (NO_NODE, NO_NODE, *map(int, parents))
    _check_is_tree(n, parent)

    color, labels = normalize_colors([int(c) for c in colors])

    weight = None
    if weights is not None:
        if len(weights) != n:
            raise TreeFormatError(f"Expected {n} weights, got {len(weights)}")
        limit = MAX_WEIGHT_BUDGET // n
        for w in weights:
            if abs(int(w)) > limit:
                raise TreeFormatError(f"Weight {w} exceeds the bound {limit} (2^40 / n)")
        weight = (0, *map(int, weights))

    return ColoredTree(n=n, parent=parent, color=(0, *color), weight=weight, color_labels=labels)


def _parse_ints(line: str, what: str, lineno: int) -> List[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise TreeFormatError(f"Line {lineno}: malformed {what}: {line.strip()!r}")


def parse_tree(text: str) -> ColoredTree:
    """Parses the tree file format.

    line 1: n; line 2: parents of nodes 2..n (empty when n=1); line 3: n colors;
    optional line 4: n signed weights.
    """
    lines = text.split("\n")
    while lines and not lines[-1].strip():
        lines.pop()
    if len(lines) < 3:
        raise TreeFormatError(f"Expected at least 3 lines, got {len(lines)}")
    if len(lines) > 4:
        raise TreeFormatError(f"Expected at most 4 lines, got {len(lines)}")

    header = _parse_ints(lines[0], "node count", 1)
    if len(header) != 1 or header[0] < 1:
        raise TreeFormatError(f"Line 1: expected a positive node count, got {lines[0].strip()!r}")
    (n,) = header

    parents = _parse_ints(lines[1], "parent list", 2)
    colors = _parse_ints(lines[2], "color list", 3)
    if len(colors) != n:
        raise TreeFormatError(f"Line 3: expected {n} colors, got {len(colors)}")
    weights = _parse_ints(lines[3], "weight list", 4) if len(lines) == 4 else None
    return make_tree(parents, colors, weights)


def format_tree(tree: ColoredTree) -> str:
    "Inverse of parse_tree, using the original color labels."
    out = [
        str(tree.n),
        " ".join(map(str, tree.parent[2:])),
        " ".join(str(tree.color_labels[c]) for c in tree.color[1:]),
    ]
    if tree.weight is not None:
        out.append(" ".join(map(str, tree.weight[1:])))
    return "\n".join(out) + "\n"


@attrs.define(frozen=True)
class TreeIndex:
    """Depths, pre-order intervals, subtree sizes, LCA and level-ancestor support.

    LCA uses an Euler tour with a sparse table over depths; level ancestors use
    binary lifting.
    """

    tree: Tree
    depth: List[int]
    euler_in: List[int]
    euler_out: List[int]
    size: List[int]
    preorder: List[int]
    children: List[List[int]]
    _first: List[int]
    _tour: np.ndarray
    _sparse: List[np.ndarray]
    _up: List[List[int]]

    @property
    def n(self) -> int:
        return self.tree.n

    @property
    def root(self) -> int:
        return 1

    def check_node(self, u: int) -> None:
        if not 1 <= u <= self.tree.n:
            raise NodeRangeError(f"Node {u} out of range 1..{self.tree.n}")

    def is_ancestor(self, u: int, v: int) -> bool:
        "True when u is an ancestor of v (or u == v)."
        return self.euler_in[u] <= self.euler_in[v] and self.euler_out[v] <= self.euler_out[u]

    def lca(self, u: int, v: int) -> int:
        self.check_node(u)
        self.check_node(v)
        if self.is_ancestor(u, v):
            return u
        if self.is_ancestor(v, u):
            return v
        lo, hi = self._first[u], self._first[v]
        if lo > hi:
            lo, hi = hi, lo
        k = (hi - lo + 1).bit_length() - 1
        row = self._sparse[k]
        x, y = int(self._tour[row[lo]]), int(self._tour[row[hi - (1 << k) + 1]])
        return x if self.depth[x] <= self.depth[y] else y

    def level_ancestor(self, u: int, k: int) -> int:
        "Ancestor of u at depth depth(u) - k."
        self.check_node(u)
        if not 0 <= k <= self.depth[u]:
            raise NodeRangeError(f"Level ancestor offset {k} out of range 0..{self.depth[u]} for node {u}")
        bit = 0
        while k:
            if k & 1:
                u = self._up[bit][u]
            k >>= 1
            bit += 1
        return u

    def path_length(self, u: int, v: int) -> int:
        "Number of nodes on P(u, v)."
        w = self.lca(u, v)
        return self.depth[u] + self.depth[v] - 2 * self.depth[w] + 1


def _euler_sparse_table(tour: np.ndarray, tour_depth: np.ndarray) -> List[np.ndarray]:
    # each row k stores, for every start index, the tour position of the shallowest node in a window of 2**k
    rows = [np.arange(len(tour), dtype=np.int64)]
    span = 1
    while 2 * span <= len(tour):
        prev = rows[-1]
        left, right = prev[: len(prev) - span], prev[span:]
        rows.append(np.where(tour_depth[left] <= tour_depth[right], left, right))
        span *= 2
    return rows


def build_index(tree: Tree) -> TreeIndex:
    n = tree.n
    parent = tree.parent
    children = tree.children()

    depth = [0] * (n + 1)
    size = [1] * (n + 1)
    size[0] = 0
    euler_in = [0] * (n + 1)
    euler_out = [0] * (n + 1)
    first = [0] * (n + 1)
    preorder: List[int] = []
    tour: List[int] = []

    # iterative DFS; an entry (u, i) means "u, about to descend into its i-th child"
    stack = [(1, 0)]
    while stack:
        u, i = stack.pop()
        if i == 0:
            euler_in[u] = len(preorder)
            preorder.append(u)
            first[u] = len(tour)
        tour.append(u)
        if i < len(children[u]):
            stack.append((u, i + 1))
            v = children[u][i]
            depth[v] = depth[u] + 1
            stack.append((v, 0))

    for u in reversed(preorder):
        if u != 1:
            size[parent[u]] += size[u]
    for u in preorder:
        euler_out[u] = euler_in[u] + size[u] - 1

    tour_arr = np.asarray(tour, dtype=np.int64)
    depth_arr = np.asarray(depth, dtype=np.int64)
    sparse = _euler_sparse_table(tour_arr, depth_arr[tour_arr])

    up0 = np.asarray(parent, dtype=np.int64)
    up = [up0.tolist()]
    levels = max(1, max(depth).bit_length())
    for _ in range(1, levels):
        prev = np.asarray(up[-1], dtype=np.int64)
        up.append(prev[prev].tolist())

    logger.debug(f"Indexed tree with {n} nodes, height {max(depth)}, {len(sparse)} sparse-table rows")
    return TreeIndex(
        tree=tree,
        depth=depth,
        euler_in=euler_in,
        euler_out=euler_out,
        size=size,
        preorder=preorder,
        children=children,
        first=first,
        tour=tour_arr,
        sparse=sparse,
        up=up,
    )
