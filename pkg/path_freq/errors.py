class PathFreqError(Exception):
    "Base class for errors raised by path-freq."


class TreeFormatError(PathFreqError, ValueError):
    "Raised when a tree file is malformed or does not describe a tree rooted at node 1."


class QueryScriptError(PathFreqError, ValueError):
    "Raised when a query script line cannot be parsed or references invalid nodes."


class NodeRangeError(PathFreqError, IndexError):
    "Raised when a node, depth offset or hierarchy level is out of range."


class ColorMismatchError(PathFreqError, ValueError):
    "Raised when two endpoints that must share a color do not."


class MissingWeightsError(PathFreqError):
    "Raised when a weighted g-function is requested for a tree without a weights line."


class PreconditionError(PathFreqError):
    "Raised when a block lookup precondition fails: a color absent from or inside the wrong block, or an unmarked edge."


class NoMarkedNodeError(PathFreqError):
    "Raised when a block-tree lookup receives an all-zero marking."


class VerificationError(PathFreqError):
    "Raised when the engine and the brute-force oracle disagree."
