from abc import ABC, abstractmethod

import attrs


@attrs.define(frozen=True)
class GFunction(ABC):
    """An integer score g(l, r) of a color on a path, given its contracted endpoints.

    l and r are the occurrences of the color nearest to each end of some path, so the
    value depends only on (l, r). Implementations must answer from static per-node
    data and return a value that fits a signed 64-bit word.

    New instances (a fluctuation measure, say) subclass this and implement
    eval_contracted; the engine needs nothing else.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        ...

    @abstractmethod
    def eval_contracted(self, l: int, r: int) -> int:
        "g of color(l) on P(l, r). Raises ColorMismatchError when the colors differ."

    def extend(self, prev: int, first: int, node: int) -> int:
        """Value after a walk that met the color first at `first` reaches another occurrence `node`.

        prev is the value before `node`. Instances with an additive form override this.
        """
        return self.eval_contracted(first, node)
