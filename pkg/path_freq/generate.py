"""Random tree files for tests and benchmarks."""

from typing import List, Optional

import numpy as np

from path_freq.tree_core import MAX_WEIGHT_BUDGET, ColoredTree, make_tree
from path_freq.utils import ceil_sqrt

RANDOM = "random"
PATH = "path"
STAR = "star"
CATERPILLAR = "caterpillar"
SHAPES = (RANDOM, PATH, STAR, CATERPILLAR)

DEFAULT_MAX_WEIGHT = 1000


def _parents(n: int, shape: str, rng: np.random.Generator) -> List[int]:
    if shape == RANDOM:
        return [int(rng.integers(1, u)) for u in range(2, n + 1)]
    if shape == PATH:
        return list(range(1, n))
    if shape == STAR:
        return [1] * (n - 1)
    if shape == CATERPILLAR:
        spine = (n + 1) // 2
        return list(range(1, spine)) + [int(rng.integers(1, spine + 1)) for _ in range(spine + 1, n + 1)]
    raise ValueError(f"Unknown shape {shape!r}, expected one of {SHAPES}")


def generate_tree(
    n: int,
    seed: int = 0,
    colors: Optional[int] = None,
    shape: str = RANDOM,
    weights: bool = False,
    max_weight: int = DEFAULT_MAX_WEIGHT,
) -> ColoredTree:
    """A tree with n nodes, deterministic for a fixed seed.

    colors defaults to ceil(sqrt(n)); labels are drawn uniformly from 1..colors.
    Weights, when requested, are uniform in [-max_weight, max_weight], clipped to the 2^40/n bound.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if colors is None:
        colors = ceil_sqrt(n)
    if colors < 1:
        raise ValueError(f"Color count must be positive, got {colors}")
    if max_weight < 0:
        raise ValueError(f"max_weight must be non-negative, got {max_weight}")

    rng = np.random.default_rng(seed)
    parents = _parents(n, shape, rng)
    labels = rng.integers(1, colors + 1, size=n).tolist()
    w = None
    if weights:
        bound = min(max_weight, MAX_WEIGHT_BUDGET // n)
        w = rng.integers(-bound, bound + 1, size=n).tolist()
    return make_tree(parents, labels, w)
