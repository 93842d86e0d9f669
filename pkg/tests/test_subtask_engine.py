import math
import unittest

import attrs
from parameterized import parameterized

from path_freq.frequency_index import PathFrequencyIndex
from path_freq.generate import PATH
from path_freq.gvalue import LFE, MODE, SUM, make_g
from path_freq.oracle import brute_decompose, brute_gmax, depths, path_nodes
from path_freq.subtask_engine import (
    FALLBACK,
    LOCAL,
    LOCAL_CLASS,
    STRATIFIED,
    SubtaskEngine,
    class_of,
    query_least_frequent,
    query_mode,
)
from path_freq.subtask_tables import COMPLEMENT, LEFT, NO_COLOR, best_in, class_best, stratification_factors
from path_freq.utils import OpCounter, ceil_sqrt

from tests.common import ACCEPTANCE, N_SAMPLES, grid_tree, random_pairs, small_grid, t7


def grid_params():
    out = []
    for n, shape, colors in small_grid():
        for t1 in sorted({1, 2}):
            out.append((f"{shape}_{n}_{colors}_{t1}", n, shape, colors, t1))
    return out


class TestClassOf(unittest.TestCase):
    def test_numbering(self):
        self.assertEqual(class_of(0, 0), 1)
        self.assertEqual(class_of(1, 0), 2)
        self.assertEqual(class_of(2, 0), 3)
        self.assertEqual(class_of(0, 1), 4)
        self.assertEqual(class_of(1, 1), 5)
        self.assertEqual(class_of(2, 1), 6)
        self.assertEqual(class_of(0, 2), 7)
        self.assertEqual(class_of(1, 2), 8)
        self.assertEqual(class_of(2, 2), 9)
        self.assertEqual(class_of(LOCAL, 2), LOCAL_CLASS)
        self.assertEqual(class_of(0, LOCAL), LOCAL_CLASS)


class TestT7(unittest.TestCase):
    def setUp(self):
        self.fi = PathFrequencyIndex.build(t7(), t1=1, check=True)

    def test_goldens(self):
        res = self.fi.mode(4, 6)
        self.assertEqual((res.color, res.gvalue), (1, 3))
        res = self.fi.least_frequent(4, 6)
        self.assertEqual((res.color, res.gvalue), (2, 2))
        res = self.fi.max_sum(4, 6)
        self.assertEqual((res.color, res.gvalue), (1, 10))
        self.assertEqual(res.endpoints, (1, 6))
        self.assertIn(res.subtask, range(1, 11))

    def test_singleton_path(self):
        res = self.fi.max_sum(5, 5)
        self.assertEqual((res.color, res.gvalue, res.endpoints), (3, 7, (5, 5)))
        self.assertEqual(self.fi.mode(5, 5).gvalue, 1)

    def test_decompose_local(self):
        # with t1 = 1 every node is its own level-1 block, so the endpoints' colors are local
        classes = self.fi.engine(MODE).decompose_colors(4, 4)
        self.assertEqual(classes[LOCAL_CLASS], {2})
        self.assertEqual(set().union(*classes.values()), {2})

    def test_wrong_engine(self):
        self.assertRaises(ValueError, query_mode, self.fi.engine(LFE), 4, 6)
        self.assertRaises(ValueError, query_least_frequent, self.fi.engine(MODE), 4, 6)

    def test_bad_mode(self):
        eng = self.fi.engine(MODE)
        self.assertRaises(ValueError, attrs.evolve, eng, mode="exhaustive")

    def test_table_dimensions(self):
        h = self.fi.hierarchy
        B1, B2, B3 = (h.block_count(k) for k in (1, 2, 3))
        for g in (MODE, LFE, SUM):
            tb = self.fi.engine(g).tables
            self.assertEqual(tb.T1.shape, (B3, B3))
            self.assertEqual(tb.T2.shape, (B2, B3))
            self.assertEqual(tb.T3.shape, (B1, B3))
            self.assertEqual(tb.T5.shape, (B2, B2))


class TestStratification(unittest.TestCase):
    @parameterized.expand(
        [(2, 4, [4, 2]), (2, 2, [2]), (4, 32, [32, 4]), (1, 64, [64, 36, 1]), (2, 512, [512, 128, 72, 2])]
    )
    def test_factors(self, t2, t3, want):
        self.assertEqual(stratification_factors(t2, t3), want)


class TestBestIn(unittest.TestCase):
    STATE = {1: (10, 1), 2: (11, 5), 3: (12, 1)}

    def test_more_candidates_than_path_colors(self):
        counter = OpCounter()
        best = best_in(self.STATE, frozenset({1, 9, 8, 7}), lambda c: True, counter, LEFT)
        self.assertEqual(best, (1, 1))
        self.assertEqual(counter.counts, {LEFT: 3})

    def test_fewer_candidates_than_path_colors(self):
        counter = OpCounter()
        self.assertEqual(best_in(self.STATE, frozenset({2, 3}), lambda c: True, counter, LEFT), (5, 2))
        self.assertEqual(counter.counts, {LEFT: 2})

    def test_keep_filters_and_ties(self):
        counter = OpCounter()
        for cands in (frozenset({1, 3}), frozenset({1, 2, 3, 9})):
            self.assertEqual(best_in(self.STATE, cands, lambda c: c != 2, counter, LEFT), (1, 1))
        self.assertIsNone(best_in(self.STATE, frozenset({7, 8, 9, 10}), lambda c: True, counter, LEFT))
        self.assertIsNone(best_in({}, frozenset({1}), lambda c: True, counter, LEFT))


class TestAgainstOracle(unittest.TestCase):
    @parameterized.expand(grid_params())
    def test_gmax(self, _, n, shape, colors, t1):
        tree = grid_tree(n, shape, colors, seed=n * 31 + colors)
        fi = PathFrequencyIndex.build(tree, t1=t1)
        depth = depths(tree)
        pairs = random_pairs(n, N_SAMPLES, seed=colors)
        for g in (MODE, LFE, SUM):
            eng = fi.engine(g)
            for i, j in pairs:
                res = eng.query_max_gvalue(i, j)
                view = path_nodes(tree, depth, i, j)
                _, want, _ = brute_gmax(tree, view, g)
                self.assertEqual(res.gvalue, want, (g, i, j))
                if g == SUM:
                    self.assertEqual(view.sums[res.color], res.gvalue)
                else:
                    self.assertEqual(view.freq[res.color], abs(res.gvalue))

    @parameterized.expand([("random", 400, 20, 1), ("caterpillar", 300, 5, 2), ("path", 300, 17, 1)])
    def test_fallback_mode_agrees(self, shape, n, colors, t1):
        tree = grid_tree(n, shape, colors, seed=5)
        strat = PathFrequencyIndex.build(tree, t1=t1, mode=STRATIFIED)
        fall = PathFrequencyIndex.build(tree, t1=t1, mode=FALLBACK)
        for i, j in random_pairs(n, N_SAMPLES, seed=6):
            self.assertEqual(strat.mode(i, j).gvalue, fall.mode(i, j).gvalue)

    @parameterized.expand([("random", 500, 22, 1), ("star", 200, 3, 2), ("caterpillar", 500, 500, 1)])
    def test_decomposition(self, shape, n, colors, t1):
        tree = grid_tree(n, shape, colors, seed=8)
        fi = PathFrequencyIndex.build(tree, t1=t1)
        eng = fi.engine(MODE)
        depth = depths(tree)
        for i, j in random_pairs(n, N_SAMPLES // 4, seed=9):
            classes = eng.decompose_colors(i, j)
            path_colors = set(path_nodes(tree, depth, i, j).freq)
            union = set()
            for k in range(1, 11):
                self.assertFalse(union & classes[k])
                union |= classes[k]
            self.assertEqual(union, path_colors)
            self.assertEqual(classes, brute_decompose(tree, fi.hierarchy, i, j))

    @parameterized.expand([(MODE,), (LFE,)])
    def test_candidates_cover_answer(self, g):
        tree = grid_tree(600, "random", 25, seed=12)
        fi = PathFrequencyIndex.build(tree, t1=1)
        eng: SubtaskEngine = fi.engine(g)
        depth = depths(tree)
        sign = 1 if g == MODE else -1
        for i, j in random_pairs(tree.n, N_SAMPLES, seed=13):
            cs = eng.run_subtasks(i, j)
            view = path_nodes(tree, depth, i, j)
            proposed = (set(cs.S1) | {c for c, _, _, _ in cs.S2}) & set(view.freq)
            _, want, _ = brute_gmax(tree, view, g)
            self.assertEqual(max(sign * view.freq[c] for c in proposed), want, (i, j))
            for c, l, r, _ in cs.S2:
                self.assertEqual((l, r), fi.forest.path_color_endpoints(i, j, c))

    def test_triples_belong_to_their_class(self):
        tree = grid_tree(600, "random", 25, seed=16)
        fi = PathFrequencyIndex.build(tree, t1=1)
        eng = fi.engine(MODE)
        pairs = random_pairs(tree.n, 1000 if ACCEPTANCE else N_SAMPLES, seed=17)
        emitted = 0
        for i, j in pairs:
            classes = eng.decompose_colors(i, j)
            for c, _, _, subtask in eng.run_subtasks(i, j).S2:
                self.assertIn(c, classes[subtask], (i, j, subtask))
                emitted += 1
        self.assertGreater(emitted, 0)

    @parameterized.expand([(1,), (2,), (3,)])
    def test_candidate_budgets_on_paths(self, t1):
        n = 600
        tree = grid_tree(n, PATH, n, seed=18 + t1)
        fi = PathFrequencyIndex.build(tree, t1=t1)
        eng = fi.engine(MODE)
        t1, t2 = fi.hierarchy.factors[:2]
        for i, j in random_pairs(n, N_SAMPLES, seed=19):
            cs = eng.run_subtasks(i, j)
            self.assertLessEqual(len(cs.S1), 8 * t1 + 16, (i, j))
            self.assertLessEqual(len(cs.S2), 8 * t2, (i, j))

    def test_t1_entries_match_recomputation(self):
        tree = grid_tree(400, "random", 20, seed=14)
        fi = PathFrequencyIndex.build(tree, t1=1)
        g = make_g(MODE, fi.forest)
        tb = fi.engine(MODE).tables
        h = fi.hierarchy
        B3 = h.block_count(3)
        for Y in range(0, B3, max(1, B3 // 5)):
            for X in range(0, B3, max(1, B3 // 5)):
                if X == Y:
                    continue
                best = class_best(h, fi.cbi, g, COMPLEMENT, X, Y, (3, 3), (4, 4))
                got = int(tb.T1[X, Y])
                self.assertEqual(got, best[1] if best else NO_COLOR, (X, Y))


class TestTableSpace(unittest.TestCase):
    @parameterized.expand([(1024, 1), (1024, 2), (2000, 2)])
    def test_t5_bits_on_paths(self, n, t1):
        fi = PathFrequencyIndex.build(grid_tree(n, PATH, 30, seed=n), t1=t1)
        t2 = fi.hierarchy.factors[1]
        tb = fi.engine(MODE).tables
        self.assertLessEqual(tb.t5_bits, 16 * math.ceil(n / t2) ** 2)

    @parameterized.expand([(s,) for s in ("random", "caterpillar", "star")])
    def test_t5_bits_follow_marked_count(self, shape):
        n = 1500
        fi = PathFrequencyIndex.build(grid_tree(n, shape, 40, seed=24), t1=2)
        h = fi.hierarchy
        tb = fi.engine(MODE).tables
        B2 = h.block_count(2)
        self.assertEqual(tb.T5.shape, (B2, B2))
        self.assertEqual(tb.t5_bits, B2 * B2 * max(1, tb.t5_width))
        # every marked node owns at most an internal and a leaf block
        self.assertLessEqual(B2, 2 * len(h.level(2).marked) + 1)


class TestBuildCost(unittest.TestCase):
    # precompute operations stay below BUILD_COST_C * n * (n / t2)
    BUILD_COST_C = 256

    def test_ops_bound(self):
        n = 5000 if ACCEPTANCE else 1500
        tree = grid_tree(n, "random", ceil_sqrt(n), seed=15)
        fi = PathFrequencyIndex.build(tree)
        t2 = fi.hierarchy.factors[1]
        for g in (MODE, SUM):
            ops = fi.engine(g).tables.counter.total
            self.assertGreater(ops, 0)
            self.assertLessEqual(ops, self.BUILD_COST_C * n * n / t2, g)
