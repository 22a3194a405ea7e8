"""Exception hierarchy.

The CLI maps :class:`CorpusError` and :class:`LexiconError` (bad input
files) to exit code 2 and every other :class:`MulerError` (a computation
that cannot proceed) to exit code 3.
"""


class MulerError(Exception):
    """Base class for all errors raised by this package."""


class CorpusError(MulerError):
    """Malformed corpus input (bad schema, invariant violation, collisions)."""


class LexiconError(MulerError):
    """Malformed lexicon input."""


class FeatureError(MulerError):
    """A feature operation cannot proceed (empty vocabulary, |U| < p, ...)."""


class EmptyIndexError(MulerError):
    """The feature is absent from every aligned reference/candidate pair."""


class MetricError(MulerError):
    """A metric was called outside its contract."""
