"""Brute-force answers, computed straight from the parent array.

Nothing here uses the fast-path index structures; the path is walked parent by parent.
"""

from collections import Counter
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

import attrs

from path_freq.blocking import BlockHierarchy
from path_freq.errors import MissingWeightsError, NodeRangeError
from path_freq.tree_core import ColoredTree

MODE = "mode"
LFE = "lfe"
SUM = "sum"


def depths(tree: ColoredTree) -> List[int]:
    depth = [-1] * (tree.n + 1)
    depth[1] = 0
    kids: List[List[int]] = [[] for _ in range(tree.n + 1)]
    for u in range(2, tree.n + 1):
        kids[tree.parent[u]].append(u)
    queue = [1]
    for u in queue:
        for v in kids[u]:
            depth[v] = depth[u] + 1
            queue.append(v)
    return depth


@attrs.define(frozen=True)
class PathView:
    nodes: List[int]
    freq: Counter
    sums: Dict[int, int]

    @property
    def length(self) -> int:
        return len(self.nodes)


def path_nodes(tree: ColoredTree, depth: List[int], i: int, j: int) -> PathView:
    "P(i, j) in order from i to j."
    for u in (i, j):
        if not 1 <= u <= tree.n:
            raise NodeRangeError(f"Node {u} out of range 1..{tree.n}")
    left, right = [], []
    a, b = i, j
    while depth[a] > depth[b]:
        left.append(a)
        a = tree.parent[a]
    while depth[b] > depth[a]:
        right.append(b)
        b = tree.parent[b]
    while a != b:
        left.append(a)
        right.append(b)
        a, b = tree.parent[a], tree.parent[b]
    nodes = left + [a] + right[::-1]

    freq = Counter(tree.color[u] for u in nodes)
    sums: Dict[int, int] = {}
    if tree.weight is not None:
        for u in nodes:
            sums[tree.color[u]] = sums.get(tree.color[u], 0) + tree.weight[u]
    return PathView(nodes=nodes, freq=freq, sums=sums)


def _endpoints(tree: ColoredTree, view: PathView, c: int) -> Tuple[int, int]:
    occ = [u for u in view.nodes if tree.color[u] == c]
    return occ[0], occ[-1]


def brute_gmax(tree: ColoredTree, view: PathView, g: str) -> Tuple[int, int, Tuple[int, int]]:
    """(color, value, endpoints) maximizing g over the path colors; ties go to the smallest color."""
    if g == MODE:
        values = dict(view.freq)
    elif g == LFE:
        values = {c: -f for c, f in view.freq.items()}
    elif g == SUM:
        if tree.weight is None:
            raise MissingWeightsError("Maximum sum needs weights")
        values = view.sums
    else:
        raise ValueError(f"Unknown g {g!r}")
    best = min(values, key=lambda c: (-values[c], c))
    return best, values[best], _endpoints(tree, view, best)


def brute_minorities(view: PathView, alpha) -> Set[int]:
    limit = (alpha if isinstance(alpha, Fraction) else Fraction(str(alpha))) * view.length
    return {c for c, f in view.freq.items() if f <= limit}


def brute_decompose(tree: ColoredTree, h: BlockHierarchy, i: int, j: int) -> Dict[int, Set[int]]:
    "The ten color classes of P(i, j), recomputed by scanning every node's block ids."
    view = path_nodes(tree, depths(tree), i, j)

    def colors_of(level: int, u: int) -> Set[int]:
        b = h.block_of(u, level)
        return {tree.color[v] for v in range(1, tree.n + 1) if h.block_of(v, level) == b}

    ci = [None] + [colors_of(k, i) for k in (1, 2, 3)]
    cj = [None] + [colors_of(k, j) for k in (1, 2, 3)]

    def state(c: int, cs) -> Optional[int]:
        if c in cs[1]:
            return None
        if c in cs[2]:
            return 2
        if c in cs[3]:
            return 1
        return 0

    classes: Dict[int, Set[int]] = {k: set() for k in range(1, 11)}
    for c in view.freq:
        si, sj = state(c, ci), state(c, cj)
        classes[10 if si is None or sj is None else 1 + si + 3 * sj].add(c)
    return classes
