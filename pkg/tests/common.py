import logging
import os
import tempfile
import unittest
from typing import List, Tuple

import numpy as np

from path_freq.generate import CATERPILLAR, PATH, RANDOM, STAR, generate_tree
from path_freq.tree_core import ColoredTree, make_tree, parse_tree

DEFAULT_N_SAMPLES = 200
N_SAMPLES = int(os.environ.get("N_SAMPLES", DEFAULT_N_SAMPLES))
# full acceptance grid: n up to 5000 and the large trial counts
ACCEPTANCE = bool(os.environ.get("ACCEPTANCE", False))

level = logging.ERROR
if os.environ.get("LOG_LEVEL", False):
    level = getattr(logging, os.environ["LOG_LEVEL"].upper())

logging.basicConfig(level=level)
for name in ("blocking", "color_block_index", "subtask_tables", "subtask_engine", "minority", "frequency_index"):
    logging.getLogger(name).setLevel(level)


# The 7-node fixture:
#         1
#       /   \
#      2     3
#     / \   / \
#    4   5 6   7
T7_TEXT = "7\n1 1 2 2 3 3\n1 2 1 2 3 1 3\n5 1 2 1 7 3 2\n"
T7_UNWEIGHTED_TEXT = "7\n1 1 2 2 3 3\n1 2 1 2 3 1 3\n"

SHAPES = (RANDOM, PATH, STAR, CATERPILLAR)


def t7(weights: bool = True) -> ColoredTree:
    return parse_tree(T7_TEXT if weights else T7_UNWEIGHTED_TEXT)


def path_tree(n: int, colors=None) -> ColoredTree:
    return make_tree(list(range(1, n)), colors or [1] * n)


def star_tree(leaves: int) -> ColoredTree:
    return make_tree([1] * leaves, [1] * (leaves + 1))


def small_grid() -> List[Tuple[int, str, int]]:
    "(n, shape, colors) configurations for oracle comparisons."
    sizes = (1, 2, 50, 300) if not ACCEPTANCE else (1, 2, 50, 500, 5000)
    out = []
    for n in sizes:
        for shape in SHAPES:
            for colors in sorted({1, 3, max(1, round(n**0.5)), n}):
                out.append((n, shape, colors))
    return out


def grid_tree(n: int, shape: str, colors: int, seed: int = 0) -> ColoredTree:
    return generate_tree(n, seed=seed, colors=colors, shape=shape, weights=True)


def random_pairs(n: int, count: int, seed: int = 0) -> List[Tuple[int, int]]:
    rng = np.random.default_rng(seed)
    return [(int(a), int(b)) for a, b in rng.integers(1, n + 1, size=(count, 2))]


class TempDirTestCase(unittest.TestCase):
    "Gives each test a scratch directory for tree and query files."

    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name

    def tearDown(self) -> None:
        self._tmp.cleanup()

    def write(self, name: str, text: str) -> str:
        path = os.path.join(self.tmp, name)
        with open(path, "w") as f:
            f.write(text)
        return path
