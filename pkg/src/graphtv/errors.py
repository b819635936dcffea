"""Exception hierarchy.

Data problems derive from ``DataError`` (a ``ValueError``), numerical
breakdowns from ``NumericalError``. The CLI maps the two families to exit
codes 2 and 3.
"""


class GraphTVError(Exception):
    pass


class DataError(GraphTVError, ValueError):
    pass


class NumericalError(GraphTVError, ArithmeticError):
    pass


# graph construction
class NonPositiveLambda(DataError):
    pass


class NegativeWeight(DataError):
    pass


class SelfLoop(DataError):
    pass


class ParallelEdge(DataError):
    pass


class IndexOutOfRange(DataError):
    pass


class LengthMismatch(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class NotAChain(DataError):
    pass


# geometry
class TooFewPoints(DataError):
    pass


class AllCollinear(DataError):
    pass


# active forest
class EdgeNotActive(DataError):
    pass


class WouldCreateCycle(DataError):
    pass


# solver
class NonFiniteData(DataError):
    pass


class IterationLimitExceeded(NumericalError):
    pass


class NoFeasibleEvent(NumericalError):
    pass


class EmptyRegionMean(DataError):
    pass


# parameter selection
class NoEdges(DataError):
    pass


class NonPositiveSigma(DataError):
    pass


class TargetUnreachable(DataError):
    pass


# oracle
class DimensionMismatch(DataError):
    pass


class NotConverged(NumericalError):
    pass


# file formats
class MalformedHeader(DataError):
    pass


class TruncatedData(DataError):
    pass


class ParseError(DataError):
    pass


class DuplicateX(DataError):
    pass
