"""
Exception hierarchy for the Fréchet toolkit.

Obstructions found while morphing are *not* exceptions; they are reported on
the resulting MorphSequence. Exceptions are reserved for broken inputs and
violated preconditions.
"""


class FrechetError(Exception):
    """Base class for every error raised by this package"""


class GeometryError(FrechetError, ValueError):
    """Invalid curve data or an operation outside its domain"""


class DimensionMismatch(GeometryError):
    """Operands live in ambient spaces of different dimension"""

    def __init__(self, left: int, right: int, what: str = "operands"):
        super().__init__(f"dimension mismatch between {what}: {left} vs {right}")
        self.left = left
        self.right = right


class GraphModelError(FrechetError, ValueError):
    """Invalid multigraph or graph-map"""


class EnumerationCapExceeded(GraphModelError):
    """Isomorphism enumeration aborted at the configured cap (undecided at cap)"""

    def __init__(self, needed: int, cap: int):
        super().__init__(f"undecided at cap: {needed} candidate maps exceed cap {cap}")
        self.needed = needed
        self.cap = cap


class DecisionError(FrechetError):
    """A free-space diagram was used in a way its decision does not support"""


class MorphError(FrechetError):
    """A morph operation was called with unmet preconditions"""


class FormatError(FrechetError, ValueError):
    """Malformed JSON input; the message names the offending field"""

    def __init__(self, field: str, problem: str):
        super().__init__(f"{field}: {problem}")
        self.field = field
