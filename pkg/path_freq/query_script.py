"""Query scripts: one query per line.

    MODE i j | LFE i j | MAXSUM i j | MINORITY i j alpha [mc|lv] | GMAXCHECK i j

Blank lines and lines starting with '#' are ignored.
"""

from enum import Enum
from fractions import Fraction
from typing import List, Optional

import attrs

from path_freq.errors import QueryScriptError
from path_freq.minority import LAS_VEGAS, VARIANTS
from path_freq.tree_core import ColoredTree


class QueryKind(Enum):
    MODE = "MODE"
    LFE = "LFE"
    MAXSUM = "MAXSUM"
    MINORITY = "MINORITY"
    GMAXCHECK = "GMAXCHECK"


@attrs.define(frozen=True)
class Query:
    kind: QueryKind
    i: int
    j: int
    lineno: int
    alpha: Optional[Fraction] = None
    variant: Optional[str] = None

    def __str__(self):
        parts = [self.kind.value, str(self.i), str(self.j)]
        if self.kind is QueryKind.MINORITY:
            parts += [str(self.alpha), self.variant]
        return " ".join(parts)


def _parse_alpha(tok: str, lineno: int) -> Fraction:
    try:
        alpha = Fraction(tok)
    except ValueError:
        raise QueryScriptError(f"Line {lineno}: malformed alpha {tok!r}")
    if not 0 < alpha <= 1:
        raise QueryScriptError(f"Line {lineno}: alpha must lie in (0, 1], got {tok}")
    return alpha


def _parse_node(tok: str, lineno: int, n: int) -> int:
    try:
        u = int(tok)
    except ValueError:
        raise QueryScriptError(f"Line {lineno}: malformed node {tok!r}")
    if not 1 <= u <= n:
        raise QueryScriptError(f"Line {lineno}: node {u} out of range 1..{n}")
    return u


def parse_query_line(line: str, lineno: int, tree: ColoredTree) -> Query:
    toks = line.split()
    if not toks:
        raise QueryScriptError(f"Line {lineno}: empty query")
    try:
        kind = QueryKind(toks[0])
    except ValueError:
        raise QueryScriptError(f"Line {lineno}: unknown query {toks[0]!r}")

    if kind is QueryKind.MINORITY:
        if not 4 <= len(toks) <= 5:
            raise QueryScriptError(f"Line {lineno}: MINORITY takes i j alpha [mc|lv]")
    elif len(toks) != 3:
        raise QueryScriptError(f"Line {lineno}: {kind.value} takes i j")

    i = _parse_node(toks[1], lineno, tree.n)
    j = _parse_node(toks[2], lineno, tree.n)

    if kind is QueryKind.MAXSUM and not tree.has_weights:
        raise QueryScriptError(f"Line {lineno}: MAXSUM needs a weights line in the tree file")
    if kind is not QueryKind.MINORITY:
        return Query(kind, i, j, lineno)

    alpha = _parse_alpha(toks[3], lineno)
    variant = toks[4] if len(toks) == 5 else LAS_VEGAS
    if variant not in VARIANTS:
        raise QueryScriptError(f"Line {lineno}: unknown minority variant {variant!r}, expected one of {VARIANTS}")
    return Query(kind, i, j, lineno, alpha, variant)


def parse_query_script(text: str, tree: ColoredTree) -> List[Query]:
    queries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        queries.append(parse_query_line(line, lineno, tree))
    return queries
