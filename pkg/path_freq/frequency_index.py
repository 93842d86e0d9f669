import threading
import time
from typing import Dict, Optional, Sequence, Tuple, Union

import attrs
import numpy as np
from typing_extensions import Self

from path_freq.blocking import BlockHierarchy, compute_hierarchy, default_t1
from path_freq.color_block_index import ColorBlockIndex, build_color_block_index
from path_freq.config import DEFAULT_MODE, DEFAULT_WORD_SIZE
from path_freq.errors import MissingWeightsError, QueryScriptError
from path_freq.gvalue import G_NAMES, LFE, MODE, SUM, make_g
from path_freq.minority import LAS_VEGAS, MinorityIndex, MinorityQuery, MinorityResult, build_minority_index
from path_freq.query_script import Query, QueryKind
from path_freq.subtask_engine import QueryResult, SubtaskEngine, build_engine, query_least_frequent, query_mode
from path_freq.tree_core import ColoredTree, TreeIndex, build_index, parse_tree
from path_freq.utils import getLogger
from path_freq.virtual_trees import VirtualForest, build_virtual_forest

logger = getLogger(__name__)


def load_tree(path: str) -> ColoredTree:
    with open(path) as f:
        return parse_tree(f.read())


@attrs.define(frozen=False)
class PathFrequencyIndex:
    """All query structures over one colored tree.

    The hierarchy and color index are built up front; the per-g tables are built on first use.
    Query answers carry normalized color ids; use tree.label() to get the input label back.
    """

    tree: ColoredTree
    index: TreeIndex
    forest: VirtualForest
    hierarchy: BlockHierarchy
    cbi: ColorBlockIndex
    minorities: MinorityIndex
    mode_name: str = DEFAULT_MODE
    check: bool = False
    build_seconds: float = 0.0
    _engines: Dict[str, SubtaskEngine] = attrs.field(factory=dict)
    _lock: threading.Lock = attrs.field(factory=threading.Lock)

    @classmethod
    def build(
        cls,
        tree: ColoredTree,
        t1: Optional[int] = None,
        word_size: int = DEFAULT_WORD_SIZE,
        mode: str = DEFAULT_MODE,
        check: bool = False,
    ) -> Self:
        start = time.monotonic()
        idx = build_index(tree)
        vf = build_virtual_forest(tree, idx)
        if t1 is None:
            t1 = default_t1(tree.n, word_size)
        if t1 < 1:
            raise ValueError(f"t1 must be positive, got {t1}")
        h = compute_hierarchy(tree, idx, t1)
        cbi = build_color_block_index(h, vf, check=check)
        mi = build_minority_index(vf)
        elapsed = time.monotonic() - start
        logger.info(f"Built index for n={tree.n} t1={t1} in {elapsed:.3f}s")
        return cls(tree, idx, vf, h, cbi, mi, mode, check, elapsed)

    @classmethod
    def from_file(cls, path: str, **kw) -> Self:
        return cls.build(load_tree(path), **kw)

    def engine(self, g: str) -> SubtaskEngine:
        if g not in G_NAMES:
            raise ValueError(f"Unknown g-function {g!r}, expected one of {G_NAMES}")
        with self._lock:
            eng = self._engines.get(g)
            if eng is None:
                eng = build_engine(self.hierarchy, self.cbi, make_g(g, self.forest), self.mode_name, self.check)
                self._engines[g] = eng
        return eng

    def prepare(self, names: Sequence[str] = G_NAMES) -> None:
        "Builds the tables of the given g-functions now instead of on first query."
        for g in names:
            if g == SUM and not self.tree.has_weights:
                continue
            self.engine(g)

    @property
    def engines(self) -> Dict[str, SubtaskEngine]:
        return dict(self._engines)

    def max_gvalue(self, g: str, i: int, j: int) -> QueryResult:
        return self.engine(g).query_max_gvalue(i, j)

    def mode(self, i: int, j: int) -> QueryResult:
        return query_mode(self.engine(MODE), i, j)

    def least_frequent(self, i: int, j: int) -> QueryResult:
        return query_least_frequent(self.engine(LFE), i, j)

    def max_sum(self, i: int, j: int) -> QueryResult:
        if not self.tree.has_weights:
            raise MissingWeightsError("Maximum sum queries need a weights line in the tree file")
        return self.max_gvalue(SUM, i, j)

    def minority(
        self,
        i: int,
        j: int,
        alpha: Union[str, float],
        variant: str = LAS_VEGAS,
        rng: Optional[np.random.Generator] = None,
    ) -> MinorityResult:
        self.index.check_node(i)
        self.index.check_node(j)
        if rng is None:
            rng = np.random.default_rng()
        return self.minorities.query(MinorityQuery(i, j, alpha), variant, rng)

    def answer(self, q: Query, rng: np.random.Generator) -> Optional[Tuple[int, int]]:
        """(normalized color, value) for one scripted query, or None when no color qualifies.

        The value is the frequency for MODE, LFE and MINORITY and the weighted sum for MAXSUM.
        """
        if q.kind is QueryKind.MODE:
            res = self.mode(q.i, q.j)
        elif q.kind is QueryKind.LFE:
            res = self.least_frequent(q.i, q.j)
        elif q.kind is QueryKind.MAXSUM:
            res = self.max_sum(q.i, q.j)
        elif q.kind is QueryKind.MINORITY:
            c = self.minority(q.i, q.j, q.alpha, q.variant, rng).color
            if c is None:
                return None
            ends = self.forest.path_color_endpoints(q.i, q.j, c)
            return c, self.forest.path_color_frequency(*ends)
        else:
            raise QueryScriptError(f"Line {q.lineno}: {q.kind.value} is only valid in verify")
        return res.color, res.gvalue
