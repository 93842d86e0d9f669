import unittest
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

import path_freq
from path_freq import LAS_VEGAS, MONTE_CARLO, PathFrequencyIndex, index_tree
from path_freq.errors import MissingWeightsError, NodeRangeError, QueryScriptError
from path_freq.gvalue import LFE, MODE, SUM
from path_freq.oracle import brute_gmax, depths, path_nodes
from path_freq.query_script import Query, QueryKind
from path_freq.stats import structure_stats

from tests.common import N_SAMPLES, T7_TEXT, TempDirTestCase, grid_tree, random_pairs, t7


class TestPathFrequencyIndex(unittest.TestCase):
    def setUp(self):
        self.fi = PathFrequencyIndex.build(t7())

    def test_engines_built_lazily(self):
        self.assertEqual(self.fi.engines, {})
        self.fi.mode(4, 6)
        self.assertEqual(set(self.fi.engines), {MODE})
        self.fi.prepare()
        self.assertEqual(set(self.fi.engines), {MODE, LFE, SUM})

    def test_prepare_skips_sum_without_weights(self):
        fi = PathFrequencyIndex.build(t7(weights=False))
        fi.prepare()
        self.assertEqual(set(fi.engines), {MODE, LFE})
        self.assertRaises(MissingWeightsError, fi.max_sum, 4, 6)

    def test_unknown_g(self):
        self.assertRaises(ValueError, self.fi.engine, "median")

    def test_bad_t1(self):
        self.assertRaises(ValueError, PathFrequencyIndex.build, t7(), t1=0)

    def test_node_range(self):
        self.assertRaises(NodeRangeError, self.fi.mode, 0, 3)
        self.assertRaises(NodeRangeError, self.fi.least_frequent, 1, 8)
        self.assertRaises(NodeRangeError, self.fi.minority, 1, 8, "0.5")

    def test_answer(self):
        rng = np.random.default_rng(0)
        self.assertEqual(self.fi.answer(Query(QueryKind.MODE, 4, 6, 1), rng), (1, 3))
        self.assertEqual(self.fi.answer(Query(QueryKind.LFE, 4, 6, 1), rng), (2, 2))
        self.assertEqual(self.fi.answer(Query(QueryKind.MAXSUM, 4, 6, 1), rng), (1, 10))
        q = Query(QueryKind.MINORITY, 4, 6, 1, Fraction(2, 5), LAS_VEGAS)
        self.assertEqual(self.fi.answer(q, rng), (2, 2))
        q = Query(QueryKind.MINORITY, 4, 6, 1, Fraction(1, 100), MONTE_CARLO)
        self.assertIsNone(self.fi.answer(q, rng))
        self.assertRaises(QueryScriptError, self.fi.answer, Query(QueryKind.GMAXCHECK, 4, 6, 1), rng)

    def test_minority_default_rng(self):
        self.assertEqual(self.fi.minority(4, 6, "0.4").color, 2)

    def test_threaded_queries(self):
        tree = grid_tree(800, "random", 30, seed=17)
        fi = PathFrequencyIndex.build(tree)
        depth = depths(tree)
        pairs = random_pairs(tree.n, N_SAMPLES, seed=18)

        def run(pair):
            i, j = pair
            return fi.mode(i, j).gvalue, fi.max_sum(i, j).gvalue

        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(run, pairs))
        self.assertEqual(set(fi.engines), {MODE, SUM})
        for (i, j), (mode, total) in zip(pairs, results):
            view = path_nodes(tree, depth, i, j)
            self.assertEqual(mode, brute_gmax(tree, view, MODE)[1])
            self.assertEqual(total, brute_gmax(tree, view, SUM)[1])


class TestStructureStats(unittest.TestCase):
    def test_bounds(self):
        tree = grid_tree(1500, "random", 40, seed=23)
        fi = PathFrequencyIndex.build(tree, t1=2)
        fi.prepare([MODE])
        st = structure_stats(fi)
        self.assertEqual(st.n, tree.n)
        self.assertEqual(len(st.levels), 4)
        for lv in st.levels:
            self.assertLessEqual(lv.marked, lv.marked_bound)
            self.assertLessEqual(lv.max_gap, lv.t)
        (tb,) = st.tables
        self.assertEqual(tb.g_name, MODE)
        self.assertEqual(tb.dimensions["T1"], [fi.hierarchy.block_count(3)] * 2)
        self.assertGreater(tb.ops, 0)
        t2, t3 = fi.hierarchy.factors[1:3]
        self.assertEqual((tb.strata[0], tb.strata[-1]), (t3, t2))
        text = st.get_stats_string()
        self.assertIn("Max gap", text)
        self.assertIn("/".join(map(str, tb.strata)), text)
        self.assertEqual(st.get_stats_dict()["levels"][0]["level"], 1)


class TestIndexTree(TempDirTestCase):
    def test_from_path_and_tree(self):
        path = self.write("t7.txt", T7_TEXT)
        for src in (path, t7()):
            fi = index_tree(src, t1=1)
            self.assertEqual(fi.mode(4, 6).gvalue, 3)
        fi = PathFrequencyIndex.from_file(path, t1=2, mode="fallback")
        self.assertEqual(fi.least_frequent(4, 6).gvalue, 2)

    def test_version(self):
        self.assertTrue(path_freq.__version__)
