"""Precomputed answers for the table-driven subtasks.

Every table is filled by outward sweeps: a DFS from one source block over the rest of
the tree that keeps, for each color on the current path, its first occurrence and its
g-value so far. When the DFS enters a target block X, the path from the source block
to X is the part of any query path between the two blocks, so the best color of a
class over that part is the table entry for the pair.
"""

import heapq
import math
import time
from typing import AbstractSet, Callable, Dict, List, Optional, Tuple

import attrs
import numpy as np

from path_freq.abcs import GFunction
from path_freq.blocking import BlockHierarchy
from path_freq.color_block_index import ColorBlockIndex
from path_freq.utils import OpCounter, ceil_log2, getLogger

logger = getLogger(__name__)

NO_INDEX = 255
NO_COLOR = 0
NO_CHUNK = -1

LEFT = "left"
UNION = "union"
INTERSECTION = "intersection"
COMPLEMENT = "complement"

Best = Optional[Tuple[int, int]]  # (value, color)


def _better(a: Best, b: Best) -> Best:
    "Larger value wins, ties go to the smaller color."
    if a is None:
        return b
    if b is None:
        return a
    if b[0] > a[0] or (b[0] == a[0] and b[1] < a[1]):
        return b
    return a


class PathState:
    """Per-color extents along the current DFS path, with undo.

    state[c] = (first occurrence, g-value of c on the path so far).
    """

    def __init__(self, g: GFunction, keep_heap: bool):
        self.g = g
        self.state: Dict[int, Tuple[int, int]] = {}
        self.keep_heap = keep_heap
        self._heap: List[Tuple[int, int, int]] = []
        self._version: Dict[int, int] = {}

    def _touch(self, c: int) -> None:
        if not self.keep_heap:
            return
        v = self._version.get(c, 0) + 1
        self._version[c] = v
        entry = self.state.get(c)
        if entry is not None:
            heapq.heappush(self._heap, (-entry[1], c, v))

    def push(self, c: int, node: int) -> Optional[Tuple[int, int]]:
        old = self.state.get(c)
        if old is None:
            self.state[c] = (node, self.g.eval_contracted(node, node))
        else:
            self.state[c] = (old[0], self.g.extend(old[1], old[0], node))
        self._touch(c)
        return old

    def pop(self, c: int, old: Optional[Tuple[int, int]]) -> None:
        if old is None:
            del self.state[c]
        else:
            self.state[c] = old
        self._touch(c)

    def best_outside(self, excluded: Callable[[int], bool], counter: OpCounter) -> Best:
        "Best color on the path for which excluded(c) is false."
        heap = self._heap
        held = []
        found = None
        while heap:
            negval, c, v = heap[0]
            counter.add(COMPLEMENT)
            if self._version.get(c) != v:
                heapq.heappop(heap)
                continue
            if excluded(c):
                held.append(heapq.heappop(heap))
                continue
            found = (-negval, c)
            break
        for item in held:
            heapq.heappush(heap, item)
        return found


def best_in(
    state: Dict[int, Tuple[int, int]],
    candidates: AbstractSet[int],
    keep: Callable[[int], bool],
    counter: OpCounter,
    phase: str,
) -> Best:
    "Best (value, color) over colors both in state and in candidates that pass keep."
    best: Best = None
    if len(candidates) <= len(state):
        for c in candidates:
            entry = state.get(c)
            if entry is not None and keep(c):
                best = _better(best, (entry[1], c))
        counter.add(phase, len(candidates))
    else:
        for c, entry in state.items():
            if c in candidates and keep(c):
                best = _better(best, (entry[1], c))
        counter.add(phase, len(state))
    return best


def outward_sweep(
    h: BlockHierarchy,
    g: GFunction,
    src_level: int,
    source: int,
    tgt_level: int,
    on_enter: Callable[[int, PathState], None],
    keep_heap: bool = False,
    counter: Optional[OpCounter] = None,
) -> None:
    """DFS over every node outside a source block, calling on_enter(X, state) once per target block X.

    When on_enter runs, state covers the path from the source block to the first node of X.
    """
    idx = h.index
    parent = idx.tree.parent
    children = idx.children
    color = h.tree.color
    src_of = h.level(src_level).partition.block_of
    tgt_of = h.level(tgt_level).partition.block_of
    counter = counter if counter is not None else OpCounter()

    ps = PathState(g, keep_heap)
    stack: List[tuple] = []
    for y in h.members(src_level, source):
        p = parent[y]
        if p and src_of[p] != source:
            stack.append((True, p, y))
        for v in children[y]:
            if src_of[v] != source:
                stack.append((True, v, y))

    visits = 0
    while stack:
        item = stack.pop()
        if not item[0]:
            ps.pop(item[1], item[2])
            continue
        _, x, frm = item
        visits += 1
        c = color[x]
        stack.append((False, c, ps.push(c, x)))
        if tgt_of[x] != tgt_of[frm]:
            on_enter(tgt_of[x], ps)
        p = parent[x]
        if p and p != frm and src_of[p] != source:
            stack.append((True, p, x))
        for v in children[x]:
            if v != frm and src_of[v] != source:
                stack.append((True, v, x))
    counter.add("visits", visits)


def stratification_factors(t2: int, t3: int) -> List[int]:
    """s_0 = t3, s_{k+1} = t2 * ceil(log2(s_k / t2))**2 while it keeps shrinking, ending at t2."""
    out = [t3]
    s = t3
    while s > t2:
        nxt = t2 * ceil_log2(s / t2) ** 2
        if nxt >= s:
            break
        s = max(nxt, t2)
        out.append(s)
    if out[-1] != t2:
        out.append(t2)
    return out


@attrs.define(frozen=True)
class SubtaskTables:
    """Answer tables for one g-function.

    T1[X3, Y3]: color, or 0.
    T2[X2, Y3]: position of a level-1 block inside X3 holding the optimum, or NO_INDEX.
    T3[X1, Y3]: block-tree position of a level-1 block inside X2 holding the optimum, or NO_INDEX.
    T5[X2, Y2]: chunk of the level-3 node list of X3 holding the optimum's first occurrence, or -1.
    """

    g_name: str
    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray
    T5: np.ndarray
    index_none: int
    t5_width: int
    t5_window: int
    strata: List[int]
    # level-1 blocks of each level-3 block, in pre-order of their tops
    t1_in_t3: List[List[int]]
    # node list of each level-3 block, pre-order
    t3_nodes: List[List[int]]
    counter: OpCounter
    build_seconds: float

    @property
    def t5_bits(self) -> int:
        return int(self.T5.size) * max(1, self.t5_width)

    def dimensions(self) -> Dict[str, Tuple[int, ...]]:
        return {"T1": self.T1.shape, "T2": self.T2.shape, "T3": self.T3.shape, "T5": self.T5.shape}

    def window(self, X3: int, chunk: int) -> List[int]:
        nodes = self.t3_nodes[X3]
        return nodes[chunk * self.t5_window : (chunk + 1) * self.t5_window]


def _index_dtype(count: int):
    if count < NO_INDEX:
        return np.uint8
    logger.warning(f"A block holds {count} level-1 blocks; widening index tables to 16 bits")
    return np.uint16


def _t1_block_of_color(cbi: ColorBlockIndex, c: int, X3: int) -> int:
    "A level-1 block inside X3 containing c, found through the lowest set mask bits."
    h = cbi.hierarchy
    mask3 = cbi.presence[3][(c, X3)]
    beta2 = h.block_tree(3, X3).nodes[(mask3 & -mask3).bit_length() - 1]
    mask2 = cbi.presence[2][(c, beta2)]
    return h.block_tree(2, beta2).nodes[(mask2 & -mask2).bit_length() - 1]


def precompute_T1(h: BlockHierarchy, cbi: ColorBlockIndex, g: GFunction, counter: OpCounter) -> np.ndarray:
    """Best color on the connecting path that is absent from both level-3 blocks.

    Split by level-4 membership: colors in either enclosing level-4 block come from
    level-3 sweeps, the rest from level-4 sweeps with a lazy max-heap.
    """
    B3, B4 = h.block_count(3), h.block_count(4)
    colors3, colors4 = cbi.block_colors[3], cbi.block_colors[4]
    up3 = [h.parent_block(3, b) for b in range(B3)]

    union_best: List[Dict[int, Best]] = [dict() for _ in range(B3)]
    for Y in range(B3):
        cy, cy4 = colors3[Y], colors4[up3[Y]]

        def enter(X, ps, Y=Y, cy=cy, cy4=cy4):
            cx, cx4 = colors3[X], colors4[up3[X]]
            keep = lambda c: c not in cx and c not in cy and (c in cx4 or c in cy4)  # noqa: E731
            union_best[Y][X] = best_in(ps.state, cx4 | cy4, keep, counter, UNION)

        outward_sweep(h, g, 3, Y, 3, enter, counter=counter)

    comp_best: List[Dict[int, Best]] = [dict() for _ in range(B4)]
    for Y in range(B4):
        cy4 = colors4[Y]

        def enter4(X, ps, Y=Y, cy4=cy4):
            cx4 = colors4[X]
            comp_best[Y][X] = ps.best_outside(lambda c: c in cx4 or c in cy4, counter)

        outward_sweep(h, g, 4, Y, 4, enter4, keep_heap=True, counter=counter)

    T1 = np.zeros((B3, B3), dtype=np.int32)
    for Y in range(B3):
        for X, best in union_best[Y].items():
            best = _better(best, comp_best[up3[Y]].get(up3[X]))
            if best is not None:
                T1[X, Y] = best[1]
    return T1


def precompute_T2_T3(h: BlockHierarchy, cbi: ColorBlockIndex, g: GFunction, counter: OpCounter):
    B1, B2, B3 = (h.block_count(k) for k in (1, 2, 3))
    colors = cbi.block_colors

    t1_in_t3: List[List[int]] = [[] for _ in range(B3)]
    pos_in_t3 = [0] * B1
    for b in sorted(range(B1), key=lambda b: h.index.euler_in[h.top(1, b)]):
        X3 = h.block_of(h.top(1, b), 3)
        pos_in_t3[b] = len(t1_in_t3[X3])
        t1_in_t3[X3].append(b)
    widest = max(map(len, t1_in_t3))
    dtype = _index_dtype(max(widest, max((len(bt) for bt in h.block_trees[2]), default=1)))
    none = np.iinfo(dtype).max

    T2 = np.full((B2, B3), none, dtype=dtype)
    T3 = np.full((B1, B3), none, dtype=dtype)
    up1 = [h.parent_block(1, b) for b in range(B1)]
    up2 = [h.parent_block(2, b) for b in range(B2)]

    for Y in range(B3):
        cy = colors[3][Y]

        def enter2(X, ps, Y=Y, cy=cy):
            cx, cx3 = colors[2][X], colors[3][up2[X]]
            keep = lambda c: c not in cx and c not in cy  # noqa: E731
            best = best_in(ps.state, cx3, keep, counter, LEFT)
            if best is not None:
                T2[X, Y] = pos_in_t3[_t1_block_of_color(cbi, best[1], up2[X])]

        def enter1(X, ps, Y=Y, cy=cy):
            cx, cx2 = colors[1][X], colors[2][up1[X]]
            keep = lambda c: c not in cx and c not in cy  # noqa: E731
            best = best_in(ps.state, cx2, keep, counter, LEFT)
            if best is not None:
                mask = cbi.presence[2][(best[1], up1[X])]
                T3[X, Y] = (mask & -mask).bit_length() - 1

        outward_sweep(h, g, 3, Y, 2, enter2, counter=counter)
        outward_sweep(h, g, 3, Y, 1, enter1, counter=counter)
    return T2, T3, t1_in_t3, int(none)


def precompute_T5(h: BlockHierarchy, cbi: ColorBlockIndex, g: GFunction, counter: OpCounter):
    t2, t3 = h.factors[1], h.factors[2]
    strata = stratification_factors(t2, t3)
    width = max(0, 2 * ceil_log2(t3 / t2))
    B2, B3 = h.block_count(2), h.block_count(3)
    colors = cbi.block_colors
    t3_nodes = [h.members(3, b) for b in range(B3)]
    first_pos: List[Dict[int, int]] = []
    color = h.tree.color
    for nodes in t3_nodes:
        fp: Dict[int, int] = {}
        for p, u in enumerate(nodes):
            fp.setdefault(color[u], p)
        first_pos.append(fp)
    maxlen = max(map(len, t3_nodes))
    window = max(1, math.ceil(maxlen / (1 << width)))
    up2 = [h.parent_block(2, b) for b in range(B2)]

    T5 = np.full((B2, B2), NO_CHUNK, dtype=np.int32)
    for Y in range(B2):
        cy, cy3 = colors[2][Y], colors[3][up2[Y]]

        def enter(X, ps, Y=Y, cy=cy, cy3=cy3):
            cx, cx3 = colors[2][X], colors[3][up2[X]]
            small, other = (cx3, cy3) if len(cx3) <= len(cy3) else (cy3, cx3)
            keep = lambda c: c in other and c not in cx and c not in cy  # noqa: E731
            best = best_in(ps.state, small, keep, counter, INTERSECTION)
            if best is not None:
                T5[X, Y] = first_pos[up2[X]][best[1]] // window

        outward_sweep(h, g, 2, Y, 2, enter, counter=counter)
    return T5, width, window, strata, t3_nodes


def build_tables(h: BlockHierarchy, cbi: ColorBlockIndex, g: GFunction) -> SubtaskTables:
    start = time.monotonic()
    counter = OpCounter()
    T1 = precompute_T1(h, cbi, g, counter)
    T2, T3, t1_in_t3, index_none = precompute_T2_T3(h, cbi, g, counter)
    T5, width, window, strata, t3_nodes = precompute_T5(h, cbi, g, counter)
    elapsed = time.monotonic() - start
    logger.info(
        f"Precomputed tables for g={g.name}: T1{T1.shape} T2{T2.shape} T3{T3.shape} T5{T5.shape} "
        f"(width {width}, window {window}) ops={counter.total} in {elapsed:.3f}s"
    )
    logger.debug(f"Precompute counters: {counter.counts}")
    return SubtaskTables(
        g_name=g.name,
        T1=T1,
        T2=T2,
        T3=T3,
        T5=T5,
        index_none=index_none,
        t5_width=width,
        t5_window=window,
        strata=strata,
        t1_in_t3=t1_in_t3,
        t3_nodes=t3_nodes,
        counter=counter,
        build_seconds=elapsed,
    )


def class_best(
    h: BlockHierarchy,
    cbi: ColorBlockIndex,
    g: GFunction,
    shape: str,
    X: int,
    Y: int,
    level: Tuple[int, int],
    outer: Tuple[int, int],
) -> Best:
    """Single-pair recomputation of a class optimum, for checks.

    level = (target level, source level); outer = the enclosing levels for X and Y.
    """
    colors = cbi.block_colors
    tl, sl = level
    cx, cy = colors[tl][X], colors[sl][Y]
    hx = colors[outer[0]][h.block_of(h.top(tl, X), outer[0])]
    hy = colors[outer[1]][h.block_of(h.top(sl, Y), outer[1])]
    result: List[Best] = [None]
    counter = OpCounter()

    def enter(Z, ps):
        if Z != X:
            return
        if shape == LEFT:
            keep = lambda c: c in hx and c not in cx and c not in cy  # noqa: E731
        elif shape == UNION:
            keep = lambda c: (c in hx or c in hy) and c not in cx and c not in cy  # noqa: E731
        elif shape == INTERSECTION:
            keep = lambda c: c in hx and c in hy and c not in cx and c not in cy  # noqa: E731
        else:
            keep = lambda c: c not in cx and c not in cy  # noqa: E731
        result[0] = best_in(ps.state, ps.state.keys(), keep, counter, shape)

    outward_sweep(h, g, sl, Y, tl, enter, counter=counter)
    return result[0]
