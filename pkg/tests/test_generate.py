import unittest

from parameterized import parameterized

from path_freq.generate import CATERPILLAR, PATH, RANDOM, SHAPES, STAR, generate_tree
from path_freq.tree_core import MAX_WEIGHT_BUDGET, format_tree, parse_tree
from path_freq.utils import ceil_sqrt


class TestGenerate(unittest.TestCase):
    @parameterized.expand([(s,) for s in SHAPES])
    def test_deterministic(self, shape):
        a = generate_tree(200, seed=5, shape=shape, weights=True)
        b = generate_tree(200, seed=5, shape=shape, weights=True)
        self.assertEqual(format_tree(a), format_tree(b))
        self.assertNotEqual(format_tree(a), format_tree(generate_tree(200, seed=6, shape=shape, weights=True)))

    def test_single_node(self):
        tree = generate_tree(1, seed=0)
        self.assertEqual(tree.n, 1)
        self.assertEqual(format_tree(tree).split("\n")[1], "")
        self.assertEqual(parse_tree(format_tree(tree)).n, 1)

    def test_default_colors(self):
        tree = generate_tree(100, seed=1)
        self.assertLessEqual(tree.color_count, ceil_sqrt(100))
        self.assertLessEqual(max(tree.color_labels), 10)
        self.assertFalse(tree.has_weights)

    def test_shapes(self):
        n = 9
        self.assertEqual(generate_tree(n, shape=PATH).parent[2:], tuple(range(1, n)))
        self.assertEqual(generate_tree(n, shape=STAR).parent[2:], (1,) * (n - 1))
        cat = generate_tree(n, shape=CATERPILLAR, seed=3)
        spine = (n + 1) // 2
        self.assertEqual(cat.parent[2 : spine + 1], tuple(range(1, spine)))
        self.assertTrue(all(1 <= p <= spine for p in cat.parent[spine + 1 :]))
        rnd = generate_tree(n, shape=RANDOM, seed=3)
        self.assertTrue(all(rnd.parent[u] < u for u in range(2, n + 1)))

    def test_weights_bounded(self):
        n = 4000
        tree = generate_tree(n, seed=2, weights=True, max_weight=10**9)
        bound = MAX_WEIGHT_BUDGET // n
        self.assertTrue(all(abs(w) <= bound for w in tree.weight[1:]))

    def test_bad_arguments(self):
        self.assertRaises(ValueError, generate_tree, 0)
        self.assertRaises(ValueError, generate_tree, 10, colors=0)
        self.assertRaises(ValueError, generate_tree, 10, shape="spiral")
        self.assertRaises(ValueError, generate_tree, 10, weights=True, max_weight=-1)

    def test_color_cap_parses_back(self):
        tree = parse_tree(format_tree(generate_tree(1000, seed=1, colors=10)))
        self.assertEqual(tree.n, 1000)
        self.assertLessEqual(tree.color_count, 10)

    def test_path_regenerates_identically(self):
        a = format_tree(generate_tree(100, seed=7, shape=PATH))
        self.assertEqual(a, format_tree(generate_tree(100, seed=7, shape=PATH)))
        self.assertEqual(parse_tree(a).parent[2:], tuple(range(1, 100)))
