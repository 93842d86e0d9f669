"""The path maximum g-value query.

The colors of P(i, j) fall into ten classes by where they occur relative to the
blocks around i and j. Table-driven classes contribute whole level-1 blocks of colors
(S1, checked with colored-ancestor lookups). The others contribute (color, l, r)
triples whose endpoints are located through the block index (S2, evaluated directly).
"""

from typing import Dict, List, Set, Tuple

import attrs

from path_freq.abcs import GFunction
from path_freq.blocking import BlockHierarchy
from path_freq.color_block_index import ColorBlockIndex
from path_freq.gvalue import LFE, MODE
from path_freq.subtask_tables import NO_CHUNK, NO_COLOR, SubtaskTables, build_tables
from path_freq.utils import argmax_color, getLogger
from path_freq.virtual_trees import VirtualForest

logger = getLogger(__name__)

STRATIFIED = "stratified"
FALLBACK = "fallback"
SEARCH_MODES = (STRATIFIED, FALLBACK)

LOCAL = -1  # the color occurs in the endpoint's own level-1 block
LOCAL_CLASS = 10
S1_SUBTASKS = (1, 2, 3, 4, 7, 10)
S2_SUBTASKS = (5, 6, 8, 9)


@attrs.define(frozen=True)
class QueryResult:
    color: int
    gvalue: int
    endpoints: Tuple[int, int]
    subtask: int


@attrs.define(frozen=True)
class CandidateSets:
    # color -> subtask that proposed it
    S1: Dict[int, int]
    # (color, l, r, subtask)
    S2: List[Tuple[int, int, int, int]]


def class_of(side_i: int, side_j: int) -> int:
    """Class number from the two endpoint states.

    A state is LOCAL, 2 (in the level-2 block only), 1 (in the level-3 block only) or 0 (in neither).
    """
    if side_i == LOCAL or side_j == LOCAL:
        return LOCAL_CLASS
    return 1 + side_i + 3 * side_j


@attrs.define(frozen=True)
class SubtaskEngine:
    hierarchy: BlockHierarchy
    cbi: ColorBlockIndex
    forest: VirtualForest
    g: GFunction
    tables: SubtaskTables
    mode: str = STRATIFIED

    def __attrs_post_init__(self):
        if self.mode not in SEARCH_MODES:
            raise ValueError(f"Unknown search mode {self.mode!r}, expected one of {SEARCH_MODES}")

    def _blocks(self, u: int) -> Tuple[int, int, int]:
        h = self.hierarchy
        return h.block_of(u, 1), h.block_of(u, 2), h.block_of(u, 3)

    def side_state(self, c: int, blocks: Tuple[int, int, int]) -> int:
        "Where c sits relative to an endpoint, read from the presence masks."
        b1, b2, b3 = blocks
        h = self.hierarchy
        m3 = self.cbi.presence[3].get((c, b3))
        if m3 is None:
            return 0
        if not m3 >> h.sub_position[3][b2] & 1:
            return 1
        m2 = self.cbi.presence[2][(c, b2)]
        if m2 >> h.sub_position[2][b1] & 1:
            return LOCAL
        return 2

    def path_colors(self, i: int, j: int) -> Set[int]:
        idx = self.hierarchy.index
        color = self.forest.tree.color
        parent = idx.tree.parent
        w = idx.lca(i, j)
        out = {color[w]}
        for u in (i, j):
            while u != w:
                out.add(color[u])
                u = parent[u]
        return out

    def decompose_colors(self, i: int, j: int) -> Dict[int, Set[int]]:
        """Reference split of the path colors into classes 1..10 by set algebra over block color sets."""
        bc = self.cbi.block_colors
        bi, bj = self._blocks(i), self._blocks(j)

        def state(c, blocks):
            if c in bc[1][blocks[0]]:
                return LOCAL
            if c in bc[2][blocks[1]]:
                return 2
            if c in bc[3][blocks[2]]:
                return 1
            return 0

        classes: Dict[int, Set[int]] = {k: set() for k in range(1, 11)}
        for c in self.path_colors(i, j):
            classes[class_of(state(c, bi), state(c, bj))].add(c)
        return classes

    def run_subtasks(self, i: int, j: int) -> CandidateSets:
        h = self.hierarchy
        cbi = self.cbi
        tb = self.tables
        bc = cbi.block_colors
        I1, I2, I3 = bi = self._blocks(i)
        J1, J2, J3 = bj = self._blocks(j)
        none = tb.index_none

        S1: Dict[int, int] = {}

        def add_block(b1: int, subtask: int) -> None:
            for c in bc[1][b1]:
                S1.setdefault(c, subtask)

        c = int(tb.T1[I3, J3])
        if c != NO_COLOR:
            S1.setdefault(c, 1)
        x = int(tb.T2[I2, J3])
        if x != none:
            add_block(tb.t1_in_t3[I3][x], 2)
        x = int(tb.T2[J2, I3])
        if x != none:
            add_block(tb.t1_in_t3[J3][x], 4)
        x = int(tb.T3[I1, J3])
        if x != none:
            add_block(h.block_tree(2, I2).nodes[x], 3)
        x = int(tb.T3[J1, I3])
        if x != none:
            add_block(h.block_tree(2, J2).nodes[x], 7)
        add_block(I1, LOCAL_CLASS)
        add_block(J1, LOCAL_CLASS)

        S2: Dict[int, Tuple[int, int, int, int]] = {}

        def emit(c: int, level_i: int, level_j: int, subtask: int) -> None:
            if c in S2:
                return
            l = cbi.first_occurrence_on_path(i, j, level_i, c)
            if l is None:
                return
            r = cbi.first_occurrence_on_path(j, i, level_j, c)
            S2[c] = (c, l, r, subtask)

        for c in bc[2][I2]:
            si = self.side_state(c, bi)
            if si != 2:
                continue
            sj = self.side_state(c, bj)
            if sj == 2:
                emit(c, 2, 2, 9)
            elif sj == 1:
                emit(c, 2, 3, 6)
        for c in bc[2][J2]:
            if self.side_state(c, bj) == 2 and self.side_state(c, bi) == 1:
                emit(c, 3, 2, 8)

        if self.mode == FALLBACK:
            window = bc[3][I3]
        else:
            chunk = int(tb.T5[I2, J2])
            color = self.forest.tree.color
            window = {color[u] for u in tb.window(I3, chunk)} if chunk != NO_CHUNK else ()
        for c in window:
            if self.side_state(c, bi) == 1 and self.side_state(c, bj) == 1:
                emit(c, 3, 3, 5)

        t1, t2 = h.factors[0], h.factors[1]
        if len(S1) > 8 * t1 + 16 or len(S2) > 8 * t2:
            logger.warning(f"Candidate budget exceeded for ({i}, {j}): |S1|={len(S1)} |S2|={len(S2)}")
        logger.debug(f"Query ({i}, {j}): |S1|={len(S1)} |S2|={len(S2)}")
        return CandidateSets(S1=S1, S2=list(S2.values()))

    def query_max_gvalue(self, i: int, j: int) -> QueryResult:
        idx = self.hierarchy.index
        idx.check_node(i)
        idx.check_node(j)
        cs = self.run_subtasks(i, j)
        g = self.g
        cands = []
        for c, subtask in cs.S1.items():
            ends = self.forest.path_color_endpoints(i, j, c)
            if ends is not None:
                cands.append((c, g.eval_contracted(*ends), ends, subtask))
        for c, l, r, subtask in cs.S2:
            cands.append((c, g.eval_contracted(l, r), (l, r), subtask))
        c, value, ends, subtask = argmax_color(cands)
        return QueryResult(color=c, gvalue=value, endpoints=ends, subtask=subtask)


def build_engine(
    h: BlockHierarchy,
    cbi: ColorBlockIndex,
    g: GFunction,
    mode: str = STRATIFIED,
    check: bool = False,
) -> SubtaskEngine:
    tables = build_tables(h, cbi, g)
    if check:
        colors3 = cbi.block_colors[3]
        for X, Y in zip(*tables.T1.nonzero()):
            c = int(tables.T1[X, Y])
            assert c not in colors3[X] and c not in colors3[Y], f"T1[{X}, {Y}] = {c} occurs in an endpoint block"
    return SubtaskEngine(hierarchy=h, cbi=cbi, forest=cbi.forest, g=g, tables=tables, mode=mode)


def _frequency_query(engine: SubtaskEngine, i: int, j: int, expected: str) -> QueryResult:
    if engine.g.name != expected:
        raise ValueError(f"Engine was built for g={engine.g.name}, not {expected}")
    res = engine.query_max_gvalue(i, j)
    return attrs.evolve(res, gvalue=abs(res.gvalue))


def query_mode(engine: SubtaskEngine, i: int, j: int) -> QueryResult:
    "Most frequent color on P(i, j), with its frequency."
    return _frequency_query(engine, i, j, MODE)


def query_least_frequent(engine: SubtaskEngine, i: int, j: int) -> QueryResult:
    "Least frequent color on P(i, j), with its (positive) frequency."
    return _frequency_query(engine, i, j, LFE)

