import unittest
from fractions import Fraction

from parameterized import parameterized

from path_freq.errors import QueryScriptError
from path_freq.minority import LAS_VEGAS, MONTE_CARLO
from path_freq.query_script import Query, QueryKind, parse_query_line, parse_query_script

from tests.common import t7


class TestQueryScript(unittest.TestCase):
    def setUp(self):
        self.tree = t7()

    def test_basic(self):
        script = """
            # comment
            MODE 4 6

            LFE 4 6
            MAXSUM 5 5
            MINORITY 4 6 0.4
            MINORITY 4 6 1/3 mc
            GMAXCHECK 1 7
        """
        qs = parse_query_script(script, self.tree)
        self.assertEqual({q.kind for q in qs}, set(QueryKind))
        self.assertEqual(qs[0], Query(QueryKind.MODE, 4, 6, 3))
        self.assertEqual(qs[3].alpha, Fraction(2, 5))
        self.assertEqual(qs[3].variant, LAS_VEGAS)
        self.assertEqual(qs[4].alpha, Fraction(1, 3))
        self.assertEqual(qs[4].variant, MONTE_CARLO)
        self.assertEqual([q.lineno for q in qs], [3, 5, 6, 7, 8, 9])

    def test_str(self):
        self.assertEqual(str(parse_query_line("MODE 4 6", 1, self.tree)), "MODE 4 6")
        self.assertEqual(str(parse_query_line("MINORITY 4 6 0.4", 1, self.tree)), "MINORITY 4 6 2/5 lv")

    def test_empty(self):
        self.assertEqual(parse_query_script("", self.tree), [])
        self.assertEqual(parse_query_script("\n# nothing\n\n", self.tree), [])

    @parameterized.expand(
        [
            ("unknown_kind", "MEDIAN 1 2"),
            ("lowercase", "mode 1 2"),
            ("too_few", "MODE 1"),
            ("too_many", "LFE 1 2 3"),
            ("node_zero", "MODE 0 2"),
            ("node_above_n", "MODE 1 8"),
            ("not_a_node", "MODE a 2"),
            ("alpha_missing", "MINORITY 1 2"),
            ("alpha_zero", "MINORITY 1 2 0"),
            ("alpha_above_one", "MINORITY 1 2 1.5"),
            ("alpha_garbage", "MINORITY 1 2 half"),
            ("bad_variant", "MINORITY 1 2 0.5 exact"),
            ("extra_token", "MINORITY 1 2 0.5 lv x"),
        ]
    )
    def test_malformed(self, _, line):
        self.assertRaises(QueryScriptError, parse_query_line, line, 1, self.tree)

    def test_line_number_in_message(self):
        with self.assertRaises(QueryScriptError) as cm:
            parse_query_script("MODE 1 2\nMODE 1 9\n", self.tree)
        self.assertIn("Line 2", str(cm.exception))

    def test_maxsum_needs_weights(self):
        bare = t7(weights=False)
        self.assertRaises(QueryScriptError, parse_query_line, "MAXSUM 1 2", 1, bare)
        self.assertEqual(parse_query_line("MODE 1 2", 1, bare).kind, QueryKind.MODE)
