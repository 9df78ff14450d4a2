"""Exception types raised by the toolkit.

Every data-level failure maps to one of these; the CLI translates them
to exit code 2. Anything else escaping a subcommand is a bug.
"""


class LmError(Exception):
    """Base class for all toolkit errors."""


# -- corpus / vocabulary ------------------------------------------------

class EmptyCorpus(LmError):
    """Input stream yielded no tokens."""


# -- counting -----------------------------------------------------------

class BadOrder(LmError):
    """Requested n-gram order is not a positive integer."""


class OrderMismatch(LmError):
    """Tables of different order cannot be merged."""


class AdjustedMerge(LmError):
    """Continuation-adjusted tables cannot be merged."""


class AlreadyAdjusted(LmError):
    """Table already holds continuation counts."""


# -- estimation / models ------------------------------------------------

class DegenerateDiscounts(LmError):
    """Count-of-count statistics leave a discount undefined.

    Signals the corpus is too small for automatic discount estimation;
    supply explicit discounts instead.
    """


class VocabMismatch(LmError):
    """Operation requires models (or queries) over one shared vocabulary."""


class BadWeights(LmError):
    """Weight vector is invalid for the requested operation."""


class EmptyHeldout(LmError):
    """Held-out stream yielded no scoring events."""


# -- file formats -------------------------------------------------------

class ParseError(LmError):
    """Malformed input file."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class MissingSection(ParseError):
    """A required file section is absent."""


class CountMismatch(ParseError):
    """Header count disagrees with the number of body entries."""


# -- evaluation ---------------------------------------------------------

class ZeroProbability(LmError):
    """Model assigned probability zero to a predicted event."""


class EmptyReference(LmError):
    """Reference word sequence is empty."""


# -- lattices -----------------------------------------------------------

class EmptyLattice(LmError):
    """Lattice has no nodes or no edges."""


class CycleDetected(LmError):
    """Lattice graph is not acyclic."""


class UnreachableNode(LmError):
    """A node lies on no start-to-final path."""


# -- pruning ------------------------------------------------------------

class TargetTooSmall(LmError):
    """Size target is below the unigram floor."""


# -- tuning -------------------------------------------------------------

class EmptyTuneSet(LmError):
    """Tune set has no items."""


class LabelMismatch(LmError):
    """Feature labels disagree between weights, lattices, or tune items."""


# -- serving ------------------------------------------------------------

class ShardUnavailable(LmError):
    """A shard could not be reached or failed mid-request."""


class BindFailure(LmError):
    """Server could not bind its endpoint."""
