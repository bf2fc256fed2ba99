"""Errors shared across eqlab modules.

Invalid arguments raise plain ValueError; the classes here mark failure
modes that callers are expected to tell apart.
"""


class ParseError(ValueError):
    """A binary file did not match its documented layout."""


class InsufficientDataError(ValueError):
    """Too few events recorded to form the requested estimate."""


class UndefinedAlignmentError(ValueError):
    """Alignment requested on an all-zero ensemble state."""


class UndefinedRatioError(ValueError):
    """Readout ratio requested on a single-sign readout vector."""
