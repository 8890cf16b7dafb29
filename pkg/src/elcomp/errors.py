"""Exception hierarchy shared by every module."""

from __future__ import annotations


class ElcompError(Exception):
    """Base class for all package errors."""


class ParseError(ElcompError):
    """Bad expression or problem-file syntax.

    Carries the byte offset into the source and the set of token kinds
    that would have been accepted at that point.
    """

    def __init__(self, message, offset=None, expected=(), line=None):
        self.message = message
        self.offset = offset
        self.expected = tuple(sorted(expected))
        self.line = line
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if offset is not None:
            loc.append(f"offset {offset}")
        suffix = f" ({', '.join(loc)})" if loc else ""
        if self.expected:
            suffix += f"; expected one of: {', '.join(self.expected)}"
        super().__init__(message + suffix)


class EvalDomainError(ElcompError):
    """Expression evaluation left the real domain (log/sqrt/pow) or blew up."""

    def __init__(self, message, point=None):
        self.point = point
        if point is not None:
            message += f" at {point}"
        super().__init__(message)


class ValidationError(ElcompError):
    """Structurally valid input with inconsistent content."""


class BadGridSpec(ElcompError):
    """Grid axes are degenerate, too coarse, or dimensionally wrong."""


class EmptySubdomain(ElcompError):
    """A sub-rectangle contains no interior grid node."""


class DimMismatch(ElcompError):
    """Operand shapes do not line up."""


class SingularMatrix(ElcompError):
    """LU met a pivot below the singularity threshold."""


class TooLarge(ElcompError):
    """Dense work refused above the degree-of-freedom budget."""


class NotNonnegative(ElcompError):
    """Power iteration needs an entrywise nonnegative matrix."""


class NoConvergence(ElcompError):
    """Iteration budget exhausted before the enclosure got tight."""

    def __init__(self, message, iterations=None, width=None):
        self.iterations = iterations
        self.width = width
        super().__init__(message)


class NonEllipticCoefficient(ElcompError):
    """Sampled diffusion tensor lost positivity somewhere."""


class NonEllipticLinearization(ElcompError):
    """Flux derivative lost positivity along the linearization segment."""


class NotZMatrix(ElcompError):
    """Assembled matrix has a positive off-diagonal entry."""

    def __init__(self, message, position=None, value=None):
        self.position = position
        self.value = value
        super().__init__(message)


class NotIrreducible(ElcompError):
    """Matrix digraph is not strongly connected."""


class StructureUnsupported(ElcompError):
    """Coupling structure outside the requested certificate family."""


class InfeasibleEpsilon(ElcompError):
    """No positive slack is available for the triangular construction."""
