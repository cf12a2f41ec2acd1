"""Exception types shared across the package."""


class BertnetError(Exception):
    """Base class."""


class MalformedInput(BertnetError, ValueError):
    pass


class DisconnectedNetwork(BertnetError):
    pass


class UnknownEdge(BertnetError, KeyError):
    pass


class OutOfDomain(BertnetError, ValueError):
    pass


class InvalidCdf(BertnetError, ValueError):
    pass


class EmptySketch(BertnetError, ValueError):
    pass


class InvalidSketch(BertnetError, ValueError):
    pass


class Infeasible(BertnetError):
    """LP1 has no solution; ``violated`` names the constraints that could not be met."""

    def __init__(self, message: str, violated=()):
        super().__init__(message)
        self.violated = list(violated)


class InterpolationNotMonotone(BertnetError):
    pass


class NotATree(BertnetError, ValueError):
    pass


class NotALine(BertnetError, ValueError):
    pass


class MultipleCaptive(BertnetError, ValueError):
    pass


class NonGeneric(BertnetError, ValueError):
    pass


class NonUnitSpokes(BertnetError, ValueError):
    pass


class ConstructionBroken(BertnetError):
    pass


class NoConvergence(BertnetError):
    pass


class StrictViolated(BertnetError):
    """Equality system solved but a strict or off-support condition fails.

    The converged :class:`~bertnet.sketch.SketchSolution` is kept on
    ``solution`` so callers can still inspect it.
    """

    def __init__(self, message: str, solution=None, violations=()):
        super().__init__(message)
        self.solution = solution
        self.violations = list(violations)


class EmptySubset(BertnetError, ValueError):
    pass


class PreconditionViolated(BertnetError, ValueError):
    pass
