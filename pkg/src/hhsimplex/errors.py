"""Exception types shared across the package."""


class HHSimplexError(Exception):
    """Base class for all errors raised by hhsimplex."""


class DimensionMismatchError(HHSimplexError):
    """Vertex, coordinate or function dimensions are inconsistent."""


class DegenerateSimplexError(HHSimplexError):
    """The vertices do not span the ambient space (volume below tolerance)."""


class OrderMismatchError(HHSimplexError):
    """A cyclic permutation was applied to coordinates of the wrong length."""


class ExpressionEvalError(HHSimplexError):
    """An expression is malformed or produced a non-finite value."""


class DegreeOverflowError(HHSimplexError):
    """Total monomial degree exceeds the configured cap."""


class ConvexityViolationError(HHSimplexError):
    """A certified bracket cell has lower bound above its upper bound,
    which cannot happen for convex integrands."""


class InvalidParameterError(HHSimplexError):
    """A parameter is outside its documented range."""


class NegativeWeightError(HHSimplexError):
    """A Fejer weight function was sampled below -1e-9."""


class SearchExhaustedError(HHSimplexError):
    """A parameter search hit its schedule limit without finding a witness."""
