"""Semantic exception hierarchy shared by all sphere_qmc modules."""


class SphereQMCError(Exception):
    """Base class for all library errors."""


class InvalidInputError(SphereQMCError, ValueError):
    """An argument is outside its documented domain."""


class UnsupportedError(SphereQMCError, ValueError):
    """The request is well formed but outside what the built-ins provide
    (e.g. a non-prime base for the built-in generator matrices)."""


class SizeLimitError(SphereQMCError, ValueError):
    """A deliberately capped operation was asked to exceed its cap."""


class SingularDomainError(SphereQMCError, ValueError):
    """Evaluation at a point where the formula is singular (tau in {0, 1})."""


class DegenerateCapError(SphereQMCError, ValueError):
    """The cap degenerates to a point or the whole sphere, or the
    requested construction collapses (v = 1/2 vertical-line case)."""


class NumericalInconsistencyError(SphereQMCError, ArithmeticError):
    """An internal identity failed far beyond rounding noise."""


class InternalError(SphereQMCError, RuntimeError):
    """An invariant the implementation itself guarantees was violated."""
