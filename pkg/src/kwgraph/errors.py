"""Exception hierarchy.

Two families matter to callers: :class:`InputError` means the request itself
is malformed (bad file, invalid graph, wrong domain), while
:class:`SolverError` means the mathematics said no or a numerical method
failed. The CLI maps them to exit codes 2 and 1 respectively.
"""

from __future__ import annotations


class KWError(Exception):
    """Base class for every error raised by this package."""


class InputError(KWError):
    pass


class ParseError(InputError):
    """Malformed input; ``line`` and ``field`` locate the problem when known."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        super().__init__(message)
        self.line = line
        self.field = field


class GraphValidationError(InputError):
    pass


class EmptyGraph(GraphValidationError):
    pass


class DuplicateVertex(GraphValidationError):
    pass


class NonPositiveWeight(GraphValidationError):
    pass


class NonPositiveMeasure(GraphValidationError):
    pass


class SelfLoop(GraphValidationError):
    pass


class UnknownEndpoint(GraphValidationError):
    pass


class DuplicateEdge(GraphValidationError):
    pass


class Disconnected(GraphValidationError):
    pass


class TooLarge(GraphValidationError):
    pass


class DomainMismatch(InputError):
    pass


class InvalidProblem(InputError):
    pass


class SolverError(KWError):
    pass


class NonFinite(SolverError):
    pass


class NonPositiveShift(SolverError):
    pass


class SolveFailed(SolverError):
    pass


class IncompatibleRHS(SolverError):
    pass


class PreconditionFailed(SolverError):
    pass


class BracketingFailed(SolverError):
    pass


class MaxIterations(SolverError):
    pass


class MonotoneStalled(MaxIterations):
    """Iteration stopped moving before the residual reached tolerance."""


class SingularJacobian(SolverError):
    pass


class LineSearchFailed(SolverError):
    pass


class DegenerateLimit(SolverError):
    """Residual is small only because every term of the equation is small."""


class ConstraintDriftExceeded(SolverError):
    pass


class NotUpperSolution(SolverError):
    pass


class NotLowerSolution(SolverError):
    pass


class OrderingViolated(SolverError):
    pass


class Infeasible(SolverError):
    pass


class NoSolutionFound(SolverError):
    pass


class NoUpperSolutionFound(NoSolutionFound):
    pass
