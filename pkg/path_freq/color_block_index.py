"""Where colors sit relative to the block hierarchy.

Presence masks say which sub-blocks of a block contain a color. Together with the
topmost and edge-entry dictionaries and the small-tree tables they locate the
occurrence of a color nearest to a query endpoint.
"""

import time
from typing import Dict, FrozenSet, List, Optional, Tuple

import attrs

from path_freq.blocking import BlockHierarchy, BlockTree
from path_freq.errors import NoMarkedNodeError, NodeRangeError, PreconditionError
from path_freq.utils import getLogger
from path_freq.virtual_trees import VirtualForest

logger = getLogger(__name__)

SMALL_TREE_CAP = 16
FIRST_OCCURRENCE_LEVELS = (2, 3, 4)

ColorBlock = Tuple[int, int]


@attrs.define(frozen=False)
class SmallTreeTables:
    """Answers for block trees of at most s_max nodes, memoized by tree shape.

    Rows are keyed by the canonical encoding of the block tree, so trees with the same
    shape share them. Bigger trees are answered directly.
    """

    s_max: int = SMALL_TREE_CAP
    check: bool = False
    _lma_rows: Dict[Tuple[str, int], Tuple[int, ...]] = attrs.field(factory=dict)
    _subset_rows: Dict[Tuple[str, int, int, int], int] = attrs.field(factory=dict)

    @property
    def cached_rows(self) -> int:
        return len(self._lma_rows) + len(self._subset_rows)

    @staticmethod
    def _lma_row(bt: BlockTree, sigma: int) -> Tuple[int, ...]:
        fallback = (sigma & -sigma).bit_length() - 1
        row: List[int] = []
        found: List[bool] = []
        for v, p in enumerate(bt.parent):
            if sigma >> v & 1:
                row.append(v)
                found.append(True)
            elif p >= 0 and found[p]:
                row.append(row[p])
                found.append(True)
            else:
                row.append(fallback)
                found.append(False)
        return tuple(row)

    @staticmethod
    def _lma_direct(bt: BlockTree, sigma: int, u: int) -> int:
        v = u
        while v >= 0:
            if sigma >> v & 1:
                return v
            v = bt.parent[v]
        # no marked ancestor: the first marked node in pre-order has no marked ancestor either
        return (sigma & -sigma).bit_length() - 1

    def lowest_marked_ancestor(self, bt: BlockTree, sigma: int, u: int) -> int:
        """Lowest σ-marked ancestor of position u, or a σ-marked node with no marked ancestor.

        Callers tell the two answers apart with bt.is_ancestor(answer, u).
        """
        if not sigma:
            raise NoMarkedNodeError(f"No marked node in block tree of block {bt.block} (level {bt.level})")
        if len(bt) > self.s_max:
            return self._lma_direct(bt, sigma, u)
        key = (bt.encoding, sigma)
        row = self._lma_rows.get(key)
        if row is None:
            row = self._lma_rows.setdefault(key, self._lma_row(bt, sigma))
            logger.debug(f"Memoized lowest-marked-ancestor row for shape {bt.encoding} sigma={sigma:b}")
            if self.check:
                for v in range(len(bt)):
                    assert row[v] == self._lma_direct(bt, sigma, v), (bt.encoding, sigma, v)
        return row[u]

    @staticmethod
    def _subset_direct(bt: BlockTree, sigma_v: int, sigma_e: int, e: int) -> int:
        # first[v]: the first marked element met walking from v to the root; ("n", v) or ("e", x) for edge x
        first: List[Optional[Tuple[str, int]]] = []
        psi = 0
        for v, p in enumerate(bt.parent):
            if sigma_v >> v & 1:
                f = ("n", v)
            elif p < 0:
                f = None
            elif sigma_e >> v & 1:
                f = ("e", v)
            else:
                f = first[p]
            first.append(f)
            if f == ("e", e):
                psi |= 1 << v
        return psi

    def reachable_subset(self, bt: BlockTree, sigma_v: int, sigma_e: int, e: int) -> int:
        """Bitstring of the σ_V-unmarked positions whose first σ_E-marked element toward the root is edge e.

        Edges are named by their child position: edge x joins x to its parent.
        """
        if not 1 <= e < len(bt) or not sigma_e >> e & 1:
            raise PreconditionError(f"Edge {e} is not marked in sigma_E={sigma_e:b}")
        if len(bt) > self.s_max:
            return self._subset_direct(bt, sigma_v, sigma_e, e)
        key = (bt.encoding, sigma_v, sigma_e, e)
        psi = self._subset_rows.get(key)
        if psi is None:
            psi = self._subset_rows.setdefault(key, self._subset_direct(bt, sigma_v, sigma_e, e))
        return psi


@attrs.define(frozen=True)
class ColorBlockIndex:
    hierarchy: BlockHierarchy
    forest: VirtualForest
    # level -> per-block color set
    block_colors: Dict[int, List[FrozenSet[int]]]
    # high level k -> (color, level-k block) -> bitmask over positions in the block tree
    presence: Dict[int, Dict[ColorBlock, int]]
    # level -> (color, block) -> topmost occurrence
    topmost: Dict[int, Dict[ColorBlock, int]]
    # high level k -> (color, level-(k-1) block) -> lowest occurrence on the way up through the parent sub-block
    edge_entry: Dict[int, Dict[ColorBlock, int]]
    small: SmallTreeTables

    def color_mask(self, c: int, k: int, block: int) -> Optional[int]:
        "Mask of the sub-blocks of a level-k block containing c, or None when c is not in the block."
        return self.presence[k].get((c, block))

    def colors(self, k: int, block: int) -> FrozenSet[int]:
        return self.block_colors[k][block]

    def contains(self, c: int, k: int, u: int) -> bool:
        "True when c occurs in the level-k block of node u."
        return c in self.block_colors[k][self.hierarchy.block_of(u, k)]

    def first_occurrence_on_path(self, i: int, j: int, k: int, c: int) -> Optional[int]:
        """The occurrence of c on P(i, j) nearest to i, or None when c is not on the path.

        Requires c in the level-k block of i and not in its level-(k-1) block.
        """
        if k not in FIRST_OCCURRENCE_LEVELS:
            raise NodeRangeError(f"First-occurrence level {k} out of range 2..4")
        h = self.hierarchy
        idx = h.index
        vf = self.forest
        depth = idx.depth
        parent = idx.tree.parent
        if vf.tree.color[i] == c:
            return i

        hb = h.block_of(i, k)
        mask = self.presence[k].get((c, hb))
        if mask is None:
            raise PreconditionError(f"Color {c} is absent from the level-{k} block of node {i}")
        bt = h.block_tree(k, hb)
        u = h.sub_position[k][h.block_of(i, k - 1)]
        if mask >> u & 1:
            raise PreconditionError(f"Color {c} occurs in the inner level-{k - 1} block of node {i}")

        w = idx.lca(i, j)
        dw = depth[w]
        b = self.small.lowest_marked_ancestor(bt, mask, u)
        if bt.is_ancestor(b, u):
            # Case 2: the nearest marked sub-block above i; enter it through the child on i's side
            beta = bt.nodes[bt.child_toward(b, u)]
            a = self.edge_entry[k].get((c, beta))
            if a is None:
                y = parent[h.top(k - 1, bt.nodes[b])]
                a = vf.lowest_colored_ancestor(y, c) if y else None
        else:
            # Case 1: no c on the way up inside the block; continue above it
            y = parent[h.top(k, hb)]
            a = vf.lowest_colored_ancestor(y, c) if y else None
        if a is not None and depth[a] >= dw:
            return a

        # c is not on P(i, w); look for its highest occurrence below w toward j
        t = self.topmost[k - 1].get((c, bt.nodes[b]))
        if t is not None and depth[t] > dw and idx.is_ancestor(t, j):
            vp = vf.vparent[t]
            if not vp or depth[vp] <= dw:
                return t
        a_j = vf.lowest_colored_ancestor(j, c)
        if a_j is None or depth[a_j] <= dw:
            return None
        return vf.highest_deeper_than(a_j, dw)


def _edge_entries(
    h: BlockHierarchy, color: Tuple[int, ...], block_colors: Dict[int, List[FrozenSet[int]]], k: int
) -> Dict[ColorBlock, int]:
    parent = h.index.tree.parent
    low_of = h.level(k - 1).partition.block_of
    entries: Dict[ColorBlock, int] = {}
    segment_cache: Dict[int, List[Tuple[int, int]]] = {}
    for bt in h.block_trees[k]:
        for pos in range(1, len(bt)):
            beta = bt.nodes[pos]
            pi = bt.nodes[bt.parent[pos]]
            y = parent[h.top(k - 1, beta)]
            seg = segment_cache.get(y)
            if seg is None:
                # lowest occurrence of every color on the climb from y to the top of its sub-block
                seen: Dict[int, int] = {}
                x = y
                while x and low_of[x] == pi:
                    seen.setdefault(color[x], x)
                    x = parent[x]
                seg = segment_cache[y] = list(seen.items())
            inside = block_colors[k - 1][beta]
            for c, x in seg:
                if c not in inside:
                    entries[(c, beta)] = x
    return entries


def build_color_block_index(h: BlockHierarchy, vf: VirtualForest, check: bool = False) -> ColorBlockIndex:
    start = time.monotonic()
    color = vf.tree.color
    n = vf.tree.n
    idx = h.index
    depth = idx.depth

    block_colors: Dict[int, List[FrozenSet[int]]] = {}
    topmost: Dict[int, Dict[ColorBlock, int]] = {}
    for lv in h.levels:
        part = lv.partition
        block_colors[lv.level] = [frozenset(color[u] for u in members) for members in part.blocks]
        if lv.level < 4:
            top: Dict[ColorBlock, int] = {}
            for u in idx.preorder:
                key = (color[u], part.block_of[u])
                old = top.get(key)
                if old is None or depth[u] < depth[old]:
                    top[key] = u
            topmost[lv.level] = top

    presence: Dict[int, Dict[ColorBlock, int]] = {}
    for k in FIRST_OCCURRENCE_LEVELS:
        low_of = h.level(k - 1).partition.block_of
        high_of = h.level(k).partition.block_of
        position = h.sub_position[k]
        masks: Dict[ColorBlock, int] = {}
        for u in range(1, n + 1):
            key = (color[u], high_of[u])
            masks[key] = masks.get(key, 0) | (1 << position[low_of[u]])
        presence[k] = masks

    edge_entry = {k: _edge_entries(h, color, block_colors, k) for k in FIRST_OCCURRENCE_LEVELS}

    logger.info(
        f"Indexed colors per block: masks={[len(presence[k]) for k in FIRST_OCCURRENCE_LEVELS]} "
        f"edge entries={[len(edge_entry[k]) for k in FIRST_OCCURRENCE_LEVELS]} in {time.monotonic() - start:.3f}s"
    )
    return ColorBlockIndex(
        hierarchy=h,
        forest=vf,
        block_colors=block_colors,
        presence=presence,
        topmost=topmost,
        edge_entry=edge_entry,
        small=SmallTreeTables(check=check),
    )

