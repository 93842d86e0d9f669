"""The shipped g-functions: mode, least frequent element and maximum weighted sum.

All three are prefix sums over the virtual tree of a color, with unit, negated unit
or per-node weights.
"""

from typing import Optional, Sequence

import attrs

from path_freq.abcs import GFunction
from path_freq.errors import MissingWeightsError
from path_freq.tree_core import ColoredTree
from path_freq.virtual_trees import VirtualForest

MODE = "mode"
LFE = "lfe"
SUM = "sum"
G_NAMES = (MODE, LFE, SUM)


@attrs.define(frozen=True)
class PrefixSumG(GFunction):
    """g(l, r) = sum of V over the color(l) nodes of P(l, r).

    V is 1 for every node (sign=1, no weights), -1 (sign=-1) or the tree weights.
    """

    forest: VirtualForest
    kind: str
    sign: int = 1
    weight: Optional[Sequence[int]] = None

    @property
    def name(self) -> str:
        return self.kind

    def eval_contracted(self, l: int, r: int) -> int:
        if self.weight is None:
            return self.sign * self.forest.path_color_frequency(l, r)
        return self.forest.path_color_sum(l, r)

    def extend(self, prev: int, first: int, node: int) -> int:
        if self.weight is None:
            return prev + self.sign
        return prev + self.weight[node]

    def node_value(self, u: int) -> int:
        "g of a single occurrence."
        return self.sign if self.weight is None else self.weight[u]


def make_mode_g(vf: VirtualForest) -> PrefixSumG:
    return PrefixSumG(vf, MODE, 1)


def make_lfe_g(vf: VirtualForest) -> PrefixSumG:
    return PrefixSumG(vf, LFE, -1)


def make_sum_g(vf: VirtualForest, tree: ColoredTree) -> PrefixSumG:
    if tree.weight is None or vf.prefix_weight is None:
        raise MissingWeightsError("Maximum sum queries need a weights line in the tree file")
    return PrefixSumG(vf, SUM, 1, tree.weight)


def make_g(name: str, vf: VirtualForest) -> PrefixSumG:
    if name == MODE:
        return make_mode_g(vf)
    if name == LFE:
        return make_lfe_g(vf)
    if name == SUM:
        return make_sum_g(vf, vf.tree)
    raise ValueError(f"Unknown g-function {name!r}, expected one of {G_NAMES}")
