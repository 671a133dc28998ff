"""Exception hierarchy.

Errors split into two families that the CLI maps to different exit codes:
``InputError`` (malformed games, strategies, protocols) and ``ResourceError``
(budgets exceeded, iteration limits).
"""


class NonlocalLabError(Exception):
    pass


class InputError(NonlocalLabError, ValueError):
    pass


class ResourceError(NonlocalLabError):
    pass


# game-core
class NonNormalizedDistribution(InputError):
    pass


class NegativeProbability(InputError):
    pass


class IncompletePredicate(InputError):
    pass


class UnknownGame(InputError):
    pass


class InvalidSizeParameter(InputError):
    pass


class SizeBudgetExceeded(ResourceError):
    pass


# classical-values
class EnumerationBudgetExceeded(SizeBudgetExceeded):
    pass


class StrategyShapeMismatch(InputError):
    pass


class NonNormalizedMixture(InputError):
    pass


# quantum-sim / boxes
class DimensionMismatch(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class InvalidMeasurement(InputError):
    pass


class NonUnitary(InputError):
    pass


# linear programming
class LPError(NonlocalLabError):
    pass


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


class IterationLimit(LPError, ResourceError):
    pass


# protocols
class ProtocolError(InputError):
    pass


class BudgetViolation(ProtocolError):
    pass


class UnsupportedSharedState(ProtocolError):
    pass


class AmbiguousMode(NonlocalLabError):
    """Two outcomes of a marginal tie (within tolerance) for the maximum."""
