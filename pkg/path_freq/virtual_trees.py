"""Per-color virtual trees.

The virtual tree of color c links every c-colored node to its nearest proper c-colored
ancestor. Nodes without one hang below the virtual root r_c, represented by 0.
"""

from bisect import bisect_right
from typing import List, Optional, Tuple

import attrs
import numpy as np

from path_freq.errors import ColorMismatchError, MissingWeightsError, NodeRangeError
from path_freq.tree_core import ColoredTree, TreeIndex
from path_freq.utils import getLogger

logger = getLogger(__name__)

VIRTUAL_ROOT = 0


@attrs.define(frozen=True)
class VirtualForest:
    tree: ColoredTree
    index: TreeIndex
    vparent: List[int]
    vdepth: List[int]
    occ_by_euler: List[List[int]]
    prefix_weight: Optional[List[int]]
    _occ_keys: List[List[int]]
    _vup: List[List[int]]

    def _check_same_color(self, u: int, v: int) -> int:
        self.index.check_node(u)
        self.index.check_node(v)
        c = self.tree.color[u]
        if self.tree.color[v] != c:
            raise ColorMismatchError(f"Nodes {u} and {v} have different colors ({c} != {self.tree.color[v]})")
        return c

    def vlevel_ancestor(self, u: int, k: int) -> int:
        "k-th ancestor of u inside its virtual tree; k == vdepth(u) gives the virtual root."
        self.index.check_node(u)
        if not 0 <= k <= self.vdepth[u]:
            raise NodeRangeError(f"Virtual level offset {k} out of range 0..{self.vdepth[u]} for node {u}")
        bit = 0
        while k and u:
            if k & 1:
                u = self._vup[bit][u]
            k >>= 1
            bit += 1
        return u

    def vlca(self, u: int, v: int) -> int:
        self._check_same_color(u, v)
        if self.vdepth[u] < self.vdepth[v]:
            u, v = v, u
        u = self.vlevel_ancestor(u, self.vdepth[u] - self.vdepth[v])
        if u == v:
            return u
        for row in reversed(self._vup):
            if row[u] != row[v]:
                u, v = row[u], row[v]
        return self.vparent[u]

    def deepest_at_most(self, v: int, d: int) -> Optional[int]:
        "Deepest node among v and its virtual ancestors with tree depth <= d, or None."
        depth = self.index.depth
        if depth[v] <= d:
            return v
        for row in reversed(self._vup):
            x = row[v]
            if x != VIRTUAL_ROOT and depth[x] > d:
                v = x
        p = self.vparent[v]
        return p or None

    def highest_deeper_than(self, v: int, d: int) -> int:
        "Highest node among v and its virtual ancestors with tree depth > d. Requires depth(v) > d."
        depth = self.index.depth
        assert depth[v] > d
        for row in reversed(self._vup):
            x = row[v]
            if x != VIRTUAL_ROOT and depth[x] > d:
                v = x
        return v

    def lowest_colored_ancestor(self, u: int, c: int) -> Optional[int]:
        """Deepest ancestor of u colored c, u included. None when there is none.

        Uses the pre-order predecessor of u among the c-nodes, then climbs its virtual
        tree below lca(predecessor, u).
        """
        idx = self.index
        idx.check_node(u)
        if self.tree.color[u] == c:
            return u
        if not 1 <= c < len(self.occ_by_euler):
            return None
        keys = self._occ_keys[c]
        pos = bisect_right(keys, idx.euler_in[u]) - 1
        if pos < 0:
            return None
        p = self.occ_by_euler[c][pos]
        if idx.is_ancestor(p, u):
            return p
        return self.deepest_at_most(p, idx.depth[idx.lca(p, u)])

    def vertical_count(self, a: int, top: int) -> int:
        "Number of color(a) nodes on the vertical path from a up to its ancestor top."
        d = self.index.depth[top]
        below = self.deepest_at_most(a, d - 1)
        return self.vdepth[a] - (self.vdepth[below] if below else 0)

    def path_color_endpoints(self, i: int, j: int, c: int) -> Optional[Tuple[int, int]]:
        """Occurrences of c on P(i, j) nearest to i and nearest to j, or None when c is absent."""
        idx = self.index
        w = idx.lca(i, j)
        dw = idx.depth[w]
        a_i = self.lowest_colored_ancestor(i, c)
        a_j = self.lowest_colored_ancestor(j, c)
        on_i = a_i is not None and idx.depth[a_i] >= dw
        on_j = a_j is not None and idx.depth[a_j] >= dw
        if not on_i and not on_j:
            return None
        l = a_i if on_i else self.highest_deeper_than(a_j, dw - 1)
        r = a_j if on_j else self.highest_deeper_than(a_i, dw - 1)
        return l, r

    def path_color_frequency(self, l: int, r: int) -> int:
        "Number of color(l) nodes on P(l, r)."
        x = self.vlca(l, r)
        total = self.vdepth[l] + self.vdepth[r]
        if x == VIRTUAL_ROOT:
            return total
        return total - 2 * self.vdepth[x] + (x == self.index.lca(l, r))

    def path_color_sum(self, l: int, r: int) -> int:
        "Sum of weights of color(l) nodes on P(l, r)."
        pw = self.prefix_weight
        if pw is None:
            raise MissingWeightsError("Tree carries no weights")
        x = self.vlca(l, r)
        total = pw[l] + pw[r]
        if x == VIRTUAL_ROOT:
            return total
        total -= 2 * pw[x]
        if x == self.index.lca(l, r):
            total += self.tree.weight[x]
        return total


def build_virtual_forest(tree: ColoredTree, idx: TreeIndex) -> VirtualForest:
    n = tree.n
    color = tree.color
    vparent = [0] * (n + 1)
    vdepth = [0] * (n + 1)
    occ: List[List[int]] = [[] for _ in range(tree.color_count + 1)]
    prefix = [0] * (n + 1) if tree.weight is not None else None

    # per-color stacks of the c-nodes on the current root path
    stacks: List[List[int]] = [[] for _ in range(tree.color_count + 1)]
    stack = [(1, False)]
    while stack:
        u, done = stack.pop()
        c = color[u]
        if done:
            stacks[c].pop()
            continue
        top = stacks[c][-1] if stacks[c] else VIRTUAL_ROOT
        vparent[u] = top
        vdepth[u] = vdepth[top] + 1 if top else 1
        if prefix is not None:
            prefix[u] = (prefix[top] if top else 0) + tree.weight[u]
        occ[c].append(u)
        stacks[c].append(u)
        stack.append((u, True))
        for v in reversed(idx.children[u]):
            stack.append((v, False))

    # the DFS visits children in index order, which is pre-order, so occ is sorted by euler_in
    occ_keys = [[idx.euler_in[u] for u in nodes] for nodes in occ]

    vup = [list(vparent)]
    levels = max(1, max(vdepth).bit_length())
    for _ in range(1, levels):
        prev = np.asarray(vup[-1], dtype=np.int64)
        vup.append(prev[prev].tolist())

    logger.debug(f"Built {tree.color_count} virtual trees, max virtual depth {max(vdepth)}")
    return VirtualForest(
        tree=tree,
        index=idx,
        vparent=vparent,
        vdepth=vdepth,
        occ_by_euler=occ,
        prefix_weight=prefix,
        occ_keys=occ_keys,
        vup=vup,
    )
