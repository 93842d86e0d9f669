"""Path α-minority queries.

A color is an α-minority of P(i, j) when it occurs on the path at most α·|P(i, j)|
times. Candidates are the k = ceil(2/α) nearest distinct colors above each endpoint;
majorities among them are pruned, colors seen from both sides are checked exactly,
and the rest are sampled.
"""

import math
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

import attrs
import numpy as np
from pyrsistent import PMap, PList, plist, pmap

from path_freq.tree_core import ColoredTree, TreeIndex
from path_freq.utils import getLogger
from path_freq.virtual_trees import VirtualForest

logger = getLogger(__name__)

MONTE_CARLO = "mc"
LAS_VEGAS = "lv"
VARIANTS = (MONTE_CARLO, LAS_VEGAS)

PHASE_NONE = 0
PHASE_EXACT = 3
PHASE_SAMPLE = 4


@attrs.define(frozen=True)
class DistinctAncestorIndex:
    """For every node, the distinct colors on its root path, nearest first.

    Snapshots are persistent: a child shares everything but the moved entry with its parent.
    """

    tree: ColoredTree
    # per node: nodes nearest-first, one per color; and color -> that node
    order: List[PList]
    nearest: List[PMap]

    def k_nearest(self, u: int, k: int) -> List[Tuple[int, int]]:
        "Up to k (node, color) pairs: the deepest occurrence of each of the k nearest distinct colors."
        if k < 1:
            raise ValueError(f"k must be at least 1, got {k}")
        out = []
        for v in self.order[u]:
            if len(out) == k:
                break
            out.append((v, self.tree.color[v]))
        return out


def build_distinct_ancestors(tree: ColoredTree, idx: TreeIndex) -> DistinctAncestorIndex:
    color = tree.color
    order: List[PList] = [plist()] * (tree.n + 1)
    nearest: List[PMap] = [pmap()] * (tree.n + 1)
    for u in idx.preorder:
        p = tree.parent[u]
        lst, pos = (order[p], nearest[p]) if p else (plist(), pmap())
        c = color[u]
        old = pos.get(c)
        if old is not None:
            lst = lst.remove(old)
        order[u] = lst.cons(u)
        nearest[u] = pos.set(c, u)
    return DistinctAncestorIndex(tree=tree, order=order, nearest=nearest)


def k_nearest_distinct_ancestors(dai: DistinctAncestorIndex, u: int, k: int) -> List[Tuple[int, int]]:
    return dai.k_nearest(u, k)


def _to_alpha(alpha: Union[str, float, Fraction]) -> Fraction:
    return alpha if isinstance(alpha, Fraction) else Fraction(str(alpha))


@attrs.define(frozen=True)
class MinorityQuery:
    i: int
    j: int
    alpha: Fraction = attrs.field(converter=_to_alpha)

    def __attrs_post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def k(self) -> int:
        return math.ceil(2 / self.alpha)


@attrs.define(frozen=True)
class MinorityResult:
    color: Optional[int]
    # phase that produced the answer: 3 exact overlap check, 4 sampling, 0 none found
    phase: int
    verifications: int


@attrs.define(frozen=True)
class MinorityIndex:
    forest: VirtualForest
    ancestors: DistinctAncestorIndex

    @property
    def index(self) -> TreeIndex:
        return self.forest.index

    def _side(self, u: int, w: int, k: int) -> Dict[int, int]:
        "color -> nearest occurrence, for the k nearest distinct colors on P(u, w)."
        depth = self.index.depth
        dw = depth[w]
        side: Dict[int, int] = {}
        for v in self.ancestors.order[u]:
            if depth[v] < dw or len(side) == k:
                break
            side[self.forest.tree.color[v]] = v
        return side

    def _candidates(self, q: MinorityQuery) -> Tuple[Optional[int], List[int], int, int]:
        """Phases 1-3. Returns (exact answer or None, remaining candidates, path length, checks)."""
        idx = self.index
        vf = self.forest
        i, j = q.i, q.j
        w = idx.lca(i, j)
        N = idx.path_length(i, j)
        limit = q.alpha * N
        k = q.k

        S_l = self._side(i, w, k)
        S_r = self._side(j, w, k)

        # a majority of a sub-path is a majority of the whole path
        for side in (S_l, S_r):
            for c, a in list(side.items()):
                if c in side and vf.vertical_count(a, w) > limit:
                    S_l.pop(c, None)
                    S_r.pop(c, None)

        checks = 0
        for c in sorted(S_l.keys() & S_r.keys()):
            checks += 1
            if vf.path_color_frequency(S_l[c], S_r[c]) <= limit:
                return c, [], N, checks
            del S_l[c], S_r[c]

        D = list(S_l)
        D += [c for c in S_r if c not in S_l]
        logger.debug(f"Minority ({i}, {j}, {q.alpha}): N={N} k={k} |D|={len(D)}")
        return None, D, N, checks

    def is_minority(self, q: MinorityQuery, c: int) -> bool:
        ends = self.forest.path_color_endpoints(q.i, q.j, c)
        if ends is None:
            return False
        return self.forest.path_color_frequency(*ends) <= q.alpha * self.index.path_length(q.i, q.j)

    def monte_carlo(self, q: MinorityQuery, rng: np.random.Generator) -> MinorityResult:
        found, D, _, checks = self._candidates(q)
        if found is not None:
            return MinorityResult(found, PHASE_EXACT, checks)
        if not D:
            return MinorityResult(None, PHASE_NONE, checks)
        return MinorityResult(D[int(rng.integers(len(D)))], PHASE_SAMPLE, checks)

    def las_vegas(self, q: MinorityQuery, rng: np.random.Generator) -> MinorityResult:
        found, D, _, checks = self._candidates(q)
        if found is not None:
            return MinorityResult(found, PHASE_EXACT, checks)
        verifications = 0
        for pos in rng.permutation(len(D)):
            c = D[int(pos)]
            verifications += 1
            if self.is_minority(q, c):
                return MinorityResult(c, PHASE_SAMPLE, verifications)
        return MinorityResult(None, PHASE_NONE, verifications)

    def query(self, q: MinorityQuery, variant: str, rng: np.random.Generator) -> MinorityResult:
        if variant == MONTE_CARLO:
            return self.monte_carlo(q, rng)
        if variant == LAS_VEGAS:
            return self.las_vegas(q, rng)
        raise ValueError(f"Unknown minority variant {variant!r}, expected one of {VARIANTS}")


def build_minority_index(vf: VirtualForest) -> MinorityIndex:
    return MinorityIndex(forest=vf, ancestors=build_distinct_ancestors(vf.tree, vf.index))


def minority_monte_carlo(q: MinorityQuery, deps: MinorityIndex, rng: np.random.Generator) -> Optional[int]:
    return deps.monte_carlo(q, rng).color


def minority_las_vegas(q: MinorityQuery, deps: MinorityIndex, rng: np.random.Generator) -> Optional[int]:
    return deps.las_vegas(q, rng).color
