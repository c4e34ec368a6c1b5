"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SemidentError(Exception):
    """Base class for all domain errors raised by this package."""


class GraphParseError(SemidentError):
    """Malformed graph input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SelfLoopError(GraphParseError):
    """An edge joins a node to itself."""


class CyclicDirectedPartError(SemidentError):
    """The directed part of the graph contains a cycle.

    Attributes:
        cycle: one directed cycle as a node sequence (internal labels).
    """

    def __init__(self, cycle: tuple[int, ...]):
        self.cycle = tuple(cycle)
        super().__init__(f"directed part is cyclic: {' -> '.join(map(str, cycle))}")


class EmptySubsetError(SemidentError):
    """A node subset that must be nonempty is empty."""


class SupportViolationError(SemidentError):
    """A parameter matrix has a nonzero entry outside its edge support."""


class SingularIminusLambdaError(SemidentError):
    """I - Lambda is not invertible (only possible for cyclic graphs)."""


class NotPositiveDefiniteError(SemidentError):
    """A matrix required to be positive definite is not."""


class RankDeficientStepError(SemidentError):
    """A step of the stepwise inversion is underdetermined.

    Attributes:
        step: the 1-based step index i at which the rank condition fails.
    """

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"inversion step {step} is rank deficient")


class InconsistentSystemError(SemidentError):
    """The covariance matrix is not in the image of the parametrization."""

    def __init__(self, step: int, residual: float | None = None):
        self.step = step
        self.residual = residual
        msg = f"inversion step {step} is inconsistent"
        if residual is not None:
            msg += f" (residual {residual:.3g})"
        super().__init__(msg)


class UnresolvedFiberError(SemidentError):
    """Fiber tracing hit an unsupported deficiency pattern."""


class NotArborescenceError(SemidentError):
    """The directed part is not an arborescence converging to the sink."""


class NotSpanningTreeError(SemidentError):
    """The bidirected part is not a spanning tree."""


class ZeroCoordinateError(SemidentError):
    """A vector that must have all-nonzero coordinates has a zero entry."""


class PDPerturbationFailedError(SemidentError):
    """Perturbation step size underflowed before reaching the PD region."""


class InvalidCycleParamsError(SemidentError):
    """Cycle parameters with product of lambdas equal to one."""
