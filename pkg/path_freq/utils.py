import logging
import math
from typing import Dict, Sequence

import attrs


def getLogger(name):
    return logging.getLogger(name.rsplit(".", 1)[-1])


def ceil_log2(x: float) -> int:
    "Smallest integer k with 2**k >= x, and 0 for x <= 1."
    if x <= 1:
        return 0
    k = math.ceil(math.log2(x))
    # guard against float rounding on exact powers of two
    while (1 << k) < x:
        k += 1
    while k > 0 and (1 << (k - 1)) >= x:
        k -= 1
    return k


def ceil_sqrt(x: int) -> int:
    if x <= 0:
        return 0
    r = math.isqrt(x)
    return r if r * r == x else r + 1


def number_to_human(n):
    millnames = ["", "k", "m", "b"]
    n = float(n)
    millidx = max(
        0,
        min(len(millnames) - 1, int(math.floor(0 if n == 0 else math.log10(abs(n)) / 3))),
    )

    return "{:.0f}{}".format(n / 10 ** (3 * millidx), millnames[millidx])


def argmax_color(candidates: Sequence[tuple]) -> tuple:
    """Returns the (color, value, ...) tuple with the largest value.

    Ties go to the smallest color id.
    """
    best = None
    for cand in candidates:
        if best is None or cand[1] > best[1] or (cand[1] == best[1] and cand[0] < best[0]):
            best = cand
    return best


@attrs.define(frozen=False)
class OpCounter:
    "Counts elementary operations of the precomputation, per phase."

    counts: Dict[str, int] = attrs.field(factory=dict)

    def add(self, phase: str, amount: int = 1) -> None:
        self.counts[phase] = self.counts.get(phase, 0) + amount

    @property
    def total(self) -> int:
        return sum(self.counts.values())
