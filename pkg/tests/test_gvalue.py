import unittest

from parameterized import parameterized

from path_freq.errors import ColorMismatchError, MissingWeightsError
from path_freq.gvalue import LFE, MODE, SUM, make_g, make_lfe_g, make_mode_g, make_sum_g
from path_freq.oracle import depths, path_nodes
from path_freq.tree_core import build_index
from path_freq.virtual_trees import build_virtual_forest

from tests.common import N_SAMPLES, grid_tree, random_pairs, t7


def forest(tree):
    return build_virtual_forest(tree, build_index(tree))


class TestGValues(unittest.TestCase):
    def setUp(self):
        self.vf = forest(t7())

    def test_t7(self):
        self.assertEqual(make_mode_g(self.vf).eval_contracted(1, 6), 3)
        self.assertEqual(make_lfe_g(self.vf).eval_contracted(4, 2), -2)
        self.assertEqual(make_sum_g(self.vf, self.vf.tree).eval_contracted(1, 6), 10)

    def test_single_occurrence(self):
        for g, want in ((MODE, 1), (LFE, -1), (SUM, 7)):
            self.assertEqual(make_g(g, self.vf).eval_contracted(5, 5), want)

    def test_color_mismatch(self):
        self.assertRaises(ColorMismatchError, make_mode_g(self.vf).eval_contracted, 4, 6)

    def test_missing_weights(self):
        vf = forest(t7(weights=False))
        self.assertRaises(MissingWeightsError, make_sum_g, vf, vf.tree)
        self.assertRaises(MissingWeightsError, make_g, SUM, vf)

    def test_unknown(self):
        self.assertRaises(ValueError, make_g, "median", self.vf)

    def test_extend_matches_eval(self):
        g = make_sum_g(self.vf, self.vf.tree)
        # walking 1 -> 3 -> 6 along color 1
        v = g.node_value(1)
        v = g.extend(v, 1, 3)
        self.assertEqual(v, g.eval_contracted(1, 3))
        v = g.extend(v, 1, 6)
        self.assertEqual(v, g.eval_contracted(1, 6))

    @parameterized.expand([("random", 7), ("caterpillar", 30), ("path", 4)])
    def test_prefix_formula(self, shape, colors):
        tree = grid_tree(500, shape, colors, seed=21)
        vf = forest(tree)
        g_sum = make_sum_g(vf, tree)
        g_mode = make_mode_g(vf)
        depth = depths(tree)
        for i, j in random_pairs(tree.n, N_SAMPLES, seed=22):
            view = path_nodes(tree, depth, i, j)
            for c in view.freq:
                l, r = vf.path_color_endpoints(i, j, c)
                self.assertEqual(g_sum.eval_contracted(l, r), view.sums[c])
                self.assertEqual(g_mode.eval_contracted(l, r), view.freq[c])
