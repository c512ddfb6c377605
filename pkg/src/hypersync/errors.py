"""Exception hierarchy.

Every error carries a short machine-readable ``code`` (used by the CLI JSON
diagnostics) and an ``exit_code`` bucket: 2 for input/structure problems,
3 for numeric failures, 4 for theorem hypotheses that do not hold.
"""


class HypersyncError(Exception):
    code = "Error"
    exit_code = 2

    def __init__(self, message="", **details):
        super().__init__(message or self.code)
        self.details = details


# -- input / structure (exit 2) ---------------------------------------------

class StructureError(HypersyncError):
    exit_code = 2


class LoopEdgeError(StructureError):
    code = "LoopEdge"


class DisconnectedError(StructureError):
    code = "Disconnected"


class DuplicateEdgeError(StructureError):
    code = "DuplicateEdge"


class EmptyVertexSetError(StructureError):
    code = "EmptyVertexSet"


class NonPositiveWeightError(StructureError):
    code = "NonPositiveWeight"


class UnknownVertexInEdgeError(StructureError):
    code = "UnknownVertexInEdge"


class IsolatedVertexError(StructureError):
    code = "IsolatedVertex"


class UnknownVertexError(StructureError):
    code = "UnknownVertex"


class ParseError(StructureError):
    code = "ParseError"


class IoError(StructureError):
    code = "IoError"


class DomainMismatchError(StructureError):
    code = "DomainMismatch"


class ClusterTooSmallError(StructureError):
    code = "ClusterTooSmall"


class TimeGridMismatchError(StructureError):
    code = "TimeGridMismatch"


# -- numeric failures (exit 3) -----------------------------------------------

class NumericError(HypersyncError):
    exit_code = 3


class EigensolverFailureError(NumericError):
    code = "EigensolverFailure"


class NumericOverflowError(NumericError):
    code = "NumericOverflow"


class StateOutOfIntervalError(NumericError):
    code = "StateOutOfInterval"


class NotSynchronizedError(NumericError):
    code = "NotSynchronized"


class SpectrumMismatchError(NumericError):
    # Assembled partial spectrum disagrees with the direct one even though
    # the structural hypotheses were verified: always a bug, never swallowed.
    code = "SpectrumMismatch"


# -- theorem hypotheses not met (exit 4) --------------------------------------

class HypothesisError(HypersyncError):
    exit_code = 4


class NoCanonicalBijectionError(HypothesisError):
    code = "NoCanonicalBijection"


class NonTransitiveTwinRelationError(HypothesisError):
    code = "NonTransitiveTwinRelation"


class InconsistentVertexWeightError(HypothesisError):
    code = "InconsistentVertexWeight"


class SingletonUnitError(HypothesisError):
    code = "SingletonUnit"


class NonConstantVertexWeightError(HypothesisError):
    code = "NonConstantVertexWeight"


class NotSigmaPreservingError(HypothesisError):
    code = "NotSigmaPreserving"


class NonConstantSigmaError(HypothesisError):
    code = "NonConstantSigma"


class HypothesisViolatedError(HypothesisError):
    code = "HypothesisViolated"


class HypothesesNotMetError(HypothesisError):
    code = "HypothesesNotMet"


# -- usage (exit 64) ----------------------------------------------------------

class UsageError(HypersyncError):
    code = "Usage"
    exit_code = 64
