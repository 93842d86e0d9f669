from typing import Optional, Union

from path_freq.errors import (
    ColorMismatchError,
    MissingWeightsError,
    NodeRangeError,
    PathFreqError,
    QueryScriptError,
    TreeFormatError,
    VerificationError,
)
from path_freq.frequency_index import PathFrequencyIndex, load_tree
from path_freq.generate import generate_tree
from path_freq.minority import LAS_VEGAS, MONTE_CARLO, MinorityResult
from path_freq.subtask_engine import FALLBACK, STRATIFIED, QueryResult
from path_freq.tree_core import ColoredTree, format_tree, make_tree, parse_tree
from path_freq.version import __version__


def index_tree(
    tree: Union[str, ColoredTree],
    t1: Optional[int] = None,
    word_size: int = 64,
    mode: str = STRATIFIED,
) -> PathFrequencyIndex:
    """Builds the query structures for a tree

    Parameters:
        tree: Either a path to a tree file, or a ColoredTree.
        t1: Smallest blocking factor. Defaults to max(1, ceil(sqrt(n / word_size) / LL)).
        word_size: Word size used for the default t1.
        mode: "stratified" uses the precomputed window tables for the both-sides-level-3 class,
              "fallback" scans the whole level-3 block instead.

    See Also:
        :class:`PathFrequencyIndex`
    """
    if isinstance(tree, str):
        tree = load_tree(tree)
    return PathFrequencyIndex.build(tree, t1=t1, word_size=word_size, mode=mode)
