"""Marked sets, block partitions and the four-level block hierarchy.

A marked set M_t is LCA-closed and leaves no unmarked path longer than t. Removing
the marked nodes splits the tree into unmarked components, which are glued to marked
nodes to form connected blocks. Coarser levels are built by marking again on the
compressed tree of the previous level.
"""

import heapq
import math
import time
from typing import Dict, List, Optional, Sequence, Tuple

import attrs

from path_freq.errors import NodeRangeError
from path_freq.tree_core import Tree, TreeIndex, build_index
from path_freq.utils import ceil_log2, ceil_sqrt, getLogger

logger = getLogger(__name__)

INTERNAL = "internal"
LEAF = "leaf"
LEVELS = (1, 2, 3, 4)


@attrs.define(frozen=True)
class AuxiliaryTree:
    "A node set closed under LCA of pre-order neighbours, with nearest-ancestor edges."

    vertices: List[int]
    parent: Dict[int, int]


@attrs.define(frozen=True)
class MarkedSet:
    t: int
    members: List[int]
    is_marked: List[bool]
    # compressed tree over the members, local ids 1..m in pre-order
    local_of: Dict[int, int]
    compressed: Tree

    def __len__(self) -> int:
        return len(self.members)

    def global_of(self, local: int) -> int:
        return self.members[local - 1]


@attrs.define(frozen=True)
class BlockPartition:
    block_of: List[int]
    blocks: List[List[int]]
    representative: List[int]
    kind: List[str]
    top: List[int]

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def max_block_size(self) -> int:
        return max(map(len, self.blocks))


@attrs.define(frozen=True)
class BlockTree:
    """The sub-blocks of one block, contracted into a tree.

    Positions are pre-order over the sub-blocks' top nodes; position 0 is the root.
    """

    level: int
    block: int
    nodes: List[int]
    parent: List[int]
    depth: List[int]
    end: List[int]
    local_of: Dict[int, int]
    encoding: str

    def __len__(self) -> int:
        return len(self.nodes)

    def is_ancestor(self, a: int, b: int) -> bool:
        return a <= b <= self.end[a]

    def child_toward(self, a: int, b: int) -> int:
        "The child of a on the way down to its proper descendant b."
        while self.parent[b] != a:
            b = self.parent[b]
        return b


@attrs.define(frozen=True)
class BlockLevel:
    level: int
    t: int
    marked: MarkedSet
    partition: BlockPartition


def build_auxiliary_tree(idx: TreeIndex, S: Sequence[int]) -> AuxiliaryTree:
    if not S:
        raise ValueError("Auxiliary tree of an empty node set")
    euler_in = idx.euler_in
    nodes = sorted(set(S), key=euler_in.__getitem__)
    closed = set(nodes)
    for a, b in zip(nodes, nodes[1:]):
        closed.add(idx.lca(a, b))
    vertices = sorted(closed, key=euler_in.__getitem__)

    parent: Dict[int, int] = {}
    stack: List[int] = []
    for v in vertices:
        while stack and not idx.is_ancestor(stack[-1], v):
            stack.pop()
        parent[v] = stack[-1] if stack else 0
        stack.append(v)
    return AuxiliaryTree(vertices, parent)


def _compressed_tree(tree: Tree, idx: TreeIndex, members: List[int]) -> Tuple[Dict[int, int], Tree]:
    local_of = {u: k + 1 for k, u in enumerate(members)}
    parent = [0, 0]
    stack: List[int] = []
    for u in members:
        while stack and not idx.is_ancestor(stack[-1], u):
            stack.pop()
        if stack:
            parent.append(local_of[stack[-1]])
        elif u != members[0]:
            raise AssertionError("Marked set has more than one topmost node")
        stack.append(u)
    return local_of, Tree(n=len(members), parent=tuple(parent))


def make_marked_set(tree: Tree, idx: TreeIndex, t: int, marked: Sequence[int]) -> MarkedSet:
    members = sorted(set(marked), key=idx.euler_in.__getitem__)
    is_marked = [False] * (tree.n + 1)
    for u in members:
        is_marked[u] = True
    local_of, compressed = _compressed_tree(tree, idx, members)
    return MarkedSet(t=t, members=members, is_marked=is_marked, local_of=local_of, compressed=compressed)


def _segment_top(idx: TreeIndex, is_marked: List[bool], u: int) -> Optional[int]:
    "Highest unmarked node of the vertical run directly above u, or None when the run is empty."
    p = idx.tree.parent[u]
    if p == 0 or is_marked[p]:
        return None
    # the nearest marked ancestor bounds the run; without one it reaches the root
    x = p
    while True:
        q = idx.tree.parent[x]
        if q == 0 or is_marked[q]:
            return x
        x = q


def compute_marked(tree: Tree, idx: TreeIndex, t: int) -> MarkedSet:
    n = tree.n
    if not 1 <= t <= n:
        raise ValueError(f"Blocking factor {t} out of range 1..{n}")
    size = idx.size
    parent = tree.parent

    rule1 = [u for u in idx.preorder if size[u] >= t and all(size[v] < t for v in idx.children[u])]
    aux = build_auxiliary_tree(idx, rule1)
    is_marked = [False] * (n + 1)
    for u in aux.vertices:
        is_marked[u] = True

    # segments are keyed by their unmarked weight; a segment above u spans up to its top node
    heap = []
    for u in aux.vertices:
        top = _segment_top(idx, is_marked, u)
        if top is not None:
            heap.append((-(size[top] - size[u]), u, top))
    heapq.heapify(heap)

    added = 0
    while heap and -heap[0][0] >= t:
        _, u, top = heapq.heappop(heap)
        x = parent[u]
        while size[x] - size[u] < t:
            x = parent[x]
        is_marked[x] = True
        added += 1
        if x != top:
            heapq.heappush(heap, (-(size[top] - size[x]), x, top))

    members = [u for u in idx.preorder if is_marked[u]]
    logger.debug(
        f"Marked t={t}: rule1={len(rule1)} closure={len(aux.vertices) - len(rule1)} gaps={added} total={len(members)}"
    )
    return make_marked_set(tree, idx, t, members)


def compute_partition(tree: Tree, idx: TreeIndex, ms: MarkedSet) -> BlockPartition:
    n = tree.n
    parent = tree.parent
    is_marked = ms.is_marked

    comp = [-1] * (n + 1)
    comp_top: List[int] = []
    for u in idx.preorder:
        if is_marked[u]:
            continue
        p = parent[u]
        if p and not is_marked[p]:
            comp[u] = comp[p]
        else:
            comp[u] = len(comp_top)
            comp_top.append(u)

    owner = [0] * len(comp_top)
    for u in ms.members:
        p = parent[u]
        if p and not is_marked[p]:
            c = comp[p]
            if owner[c]:
                raise AssertionError(
                    f"Unmarked component at node {comp_top[c]} sits above marked nodes {owner[c]} and {u}; "
                    "the marked set is not LCA-closed"
                )
            owner[c] = u

    hanging: Dict[int, List[int]] = {}
    for c, top in enumerate(comp_top):
        if not owner[c]:
            w = parent[top]
            assert w and is_marked[w], f"Unowned component at {top} does not hang below a marked node"
            hanging.setdefault(w, []).append(c)

    comp_members: List[List[int]] = [[] for _ in comp_top]
    for u in idx.preorder:
        if comp[u] >= 0:
            comp_members[comp[u]].append(u)

    groups: List[Tuple[int, List[int], int, str]] = []  # (top, members, representative, kind)
    for u in ms.members:
        p = parent[u]
        if p and not is_marked[p]:
            c = comp[p]
            members = comp_members[c] + [u]
            top = comp_top[c]
        else:
            members = [u]
            top = u
        below = hanging.get(u, [])
        if len(below) == 1 and len(members) > 1:
            c = below[0]
            groups.append((comp_top[c], comp_members[c], u, LEAF))
        else:
            for c in below:
                members += comp_members[c]
        groups.append((top, members, u, INTERNAL))

    groups.sort(key=lambda g: idx.euler_in[g[0]])
    block_of = [-1] * (n + 1)
    blocks, reps, kinds, tops = [], [], [], []
    for b, (top, members, rep, kind) in enumerate(groups):
        members.sort(key=idx.euler_in.__getitem__)
        for u in members:
            block_of[u] = b
        blocks.append(members)
        reps.append(rep)
        kinds.append(kind)
        tops.append(top)

    return BlockPartition(block_of=block_of, blocks=blocks, representative=reps, kind=kinds, top=tops)


def unmarked_components(tree: Tree, idx: TreeIndex, is_marked: Sequence[bool]) -> List[List[int]]:
    "Connected components of the unmarked nodes."
    comp: Dict[int, List[int]] = {}
    root_of = [0] * (tree.n + 1)
    for u in idx.preorder:
        if is_marked[u]:
            continue
        p = tree.parent[u]
        root_of[u] = root_of[p] if p and not is_marked[p] else u
        comp.setdefault(root_of[u], []).append(u)
    return list(comp.values())


def longest_unmarked_path(tree: Tree, idx: TreeIndex, is_marked: Sequence[bool]) -> int:
    "Node count of the longest simple path made only of unmarked nodes."
    down = [0] * (tree.n + 1)
    longest = 0
    for u in reversed(idx.preorder):
        if is_marked[u]:
            continue
        top1 = top2 = 0
        for v in idx.children[u]:
            d = down[v]
            if d > top1:
                top1, top2 = d, top1
            elif d > top2:
                top2 = d
        down[u] = 1 + top1
        longest = max(longest, 1 + top1 + top2)
    return longest


def hierarchy_factors(n: int, t1: int) -> Tuple[int, int, Tuple[int, int, int, int]]:
    "Returns (L, LL, (t1, t2, t3, t4)), every factor capped at n."
    L = max(2, ceil_log2(n))
    LL = max(1, ceil_log2(L))
    root_l = ceil_sqrt(L)
    t1 = min(n, t1)
    t2 = min(n, t1 * LL)
    t3 = min(n, t2 * root_l)
    t4 = min(n, t3 * root_l)
    return L, LL, (t1, t2, t3, t4)


def default_t1(n: int, word_size: int = 64) -> int:
    "max(1, ceil(sqrt(n / w) / LL))."
    _, LL, _ = hierarchy_factors(n, 1)
    return max(1, math.ceil(math.sqrt(n / word_size) / LL))


@attrs.define(frozen=True)
class BlockHierarchy:
    tree: Tree
    index: TreeIndex
    L: int
    LL: int
    factors: Tuple[int, int, int, int]
    levels: List[BlockLevel]
    block_trees: Dict[int, List[BlockTree]]
    degenerate: bool
    # position of every level-(k-1) block inside its level-k block tree, keyed by k
    sub_position: Dict[int, List[int]]

    def level(self, k: int) -> BlockLevel:
        if k not in LEVELS:
            raise NodeRangeError(f"Hierarchy level {k} out of range 1..4")
        return self.levels[k - 1]

    def block_of(self, u: int, k: int) -> int:
        return self.level(k).partition.block_of[u]

    def representative(self, k: int, block: int) -> int:
        return self.level(k).partition.representative[block]

    def top(self, k: int, block: int) -> int:
        return self.level(k).partition.top[block]

    def members(self, k: int, block: int) -> List[int]:
        return self.level(k).partition.blocks[block]

    def block_count(self, k: int) -> int:
        return len(self.level(k).partition)

    def block_tree(self, k: int, block: int) -> BlockTree:
        "Block tree of a level-k block, k in 2..4."
        if k not in self.block_trees:
            raise NodeRangeError(f"Block trees exist for levels 2..4, not {k}")
        return self.block_trees[k][block]

    def parent_block(self, k: int, block: int) -> int:
        "The level-(k+1) block containing a level-k block."
        return self.block_of(self.top(k, block), k + 1)

    def marked(self, k: int) -> MarkedSet:
        return self.level(k).marked


def _single_block_level(tree: Tree, idx: TreeIndex, k: int, t: int) -> BlockLevel:
    ms = make_marked_set(tree, idx, t, [1])
    part = BlockPartition(
        block_of=[-1] + [0] * tree.n,
        blocks=[list(idx.preorder)],
        representative=[1],
        kind=[INTERNAL],
        top=[1],
    )
    return BlockLevel(level=k, t=t, marked=ms, partition=part)


def _lift_level(tree: Tree, idx: TreeIndex, prev: BlockLevel, k: int, t: int) -> BlockLevel:
    "Builds level k by blocking the compressed tree of level k-1 with the relative factor."
    ms_prev = prev.marked
    ctree = ms_prev.compressed
    m = ctree.n
    rel = min(m, max(1, math.ceil(t / prev.t)))
    cidx = build_index(ctree)
    ms_rel = compute_marked(ctree, cidx, rel)
    part_rel = compute_partition(ctree, cidx, ms_rel)

    members = [ms_prev.global_of(x) for x in ms_rel.members]
    ms = make_marked_set(tree, idx, t, members)

    prev_part = prev.partition
    rel_block = [part_rel.block_of[ms_prev.local_of[rep]] for rep in prev_part.representative]
    # renumber by the pre-order of each block's top node
    renum: Dict[int, int] = {}
    block_of = [-1] * (tree.n + 1)
    tops: List[int] = []
    blocks: List[List[int]] = []
    for u in idx.preorder:
        r = rel_block[prev_part.block_of[u]]
        b = renum.get(r)
        if b is None:
            b = renum[r] = len(tops)
            tops.append(u)
            blocks.append([])
        block_of[u] = b
        blocks[b].append(u)

    reps = [0] * len(tops)
    kinds = [INTERNAL] * len(tops)
    for r, b in renum.items():
        reps[b] = ms_prev.global_of(part_rel.representative[r])
        kinds[b] = part_rel.kind[r]
    part = BlockPartition(block_of=block_of, blocks=blocks, representative=reps, kind=kinds, top=tops)
    return BlockLevel(level=k, t=t, marked=ms, partition=part)


def _encode(depths: List[int]) -> str:
    out = []
    prev = -1
    for d in depths:
        out.append(")" * (prev - d + 1))
        out.append("(")
        prev = d
    out.append(")" * (prev + 1))
    return "".join(out)


def _build_block_trees(tree: Tree, idx: TreeIndex, low: BlockPartition, high: BlockPartition, k: int):
    sub_parent = [-1] * len(low)
    for v in range(2, tree.n + 1):
        p = tree.parent[v]
        bv, bp = low.block_of[v], low.block_of[p]
        if bv != bp and high.block_of[v] == high.block_of[p]:
            sub_parent[bv] = bp

    subs: List[List[int]] = [[] for _ in range(len(high))]
    for b in sorted(range(len(low)), key=lambda b: idx.euler_in[low.top[b]]):
        subs[high.block_of[low.top[b]]].append(b)

    position = [0] * len(low)
    trees = []
    for hb, nodes in enumerate(subs):
        local_of = {b: i for i, b in enumerate(nodes)}
        parent = [local_of[sub_parent[b]] if sub_parent[b] >= 0 else -1 for b in nodes]
        depth = [0] * len(nodes)
        for i in range(1, len(nodes)):
            depth[i] = depth[parent[i]] + 1
        end = list(range(len(nodes)))
        for i in range(len(nodes) - 1, 0, -1):
            end[parent[i]] = max(end[parent[i]], end[i])
        for b, i in local_of.items():
            position[b] = i
        assert parent[0] == -1 and all(p >= 0 for p in parent[1:])
        trees.append(
            BlockTree(
                level=k,
                block=hb,
                nodes=nodes,
                parent=parent,
                depth=depth,
                end=end,
                local_of=local_of,
                encoding=_encode(depth),
            )
        )
    return trees, position


def compute_hierarchy(tree: Tree, idx: TreeIndex, t1: int) -> BlockHierarchy:
    if t1 < 1:
        raise ValueError(f"t1 must be at least 1, got {t1}")
    n = tree.n
    start = time.monotonic()
    L, LL, factors = hierarchy_factors(n, t1)
    degenerate = t1 >= n

    levels: List[BlockLevel] = []
    if degenerate:
        logger.warning(f"t1={t1} >= n={n}: every level is a single block")
        levels = [_single_block_level(tree, idx, k, t) for k, t in zip(LEVELS, factors)]
    else:
        ms = compute_marked(tree, idx, factors[0])
        levels.append(BlockLevel(level=1, t=factors[0], marked=ms, partition=compute_partition(tree, idx, ms)))
        for k, t in zip(LEVELS[1:], factors[1:]):
            levels.append(_lift_level(tree, idx, levels[-1], k, t))

    block_trees: Dict[int, List[BlockTree]] = {}
    sub_position: Dict[int, List[int]] = {}
    for k in LEVELS[1:]:
        block_trees[k], sub_position[k] = _build_block_trees(
            tree, idx, levels[k - 2].partition, levels[k - 1].partition, k
        )

    for lv in levels:
        logger.info(
            f"Level {lv.level}: t={lv.t} marked={len(lv.marked)} blocks={len(lv.partition)} "
            f"max block={lv.partition.max_block_size}"
        )
    logger.info(f"Built block hierarchy (L={L}, LL={LL}, factors={factors}) in {time.monotonic() - start:.3f}s")
    return BlockHierarchy(
        tree=tree,
        index=idx,
        L=L,
        LL=LL,
        factors=factors,
        levels=levels,
        block_trees=block_trees,
        degenerate=degenerate,
        sub_position=sub_position,
    )
