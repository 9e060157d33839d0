"""Exception hierarchy.

Every error raised by the library derives from :class:`CoherenceError`, which
is itself a :class:`ValueError` so callers that only care about bad input can
catch the builtin.
"""


class CoherenceError(ValueError):
    """Base class for all library errors."""


class NotSquareError(CoherenceError):
    pass


class NotHermitianError(CoherenceError):
    pass


class NotStateError(CoherenceError):
    """Input is not a density matrix (wrong trace, negative eigenvalue...)."""


class NotPSDError(NotStateError):
    pass


class TraceNotOneError(NotStateError):
    pass


class NotDistributionError(CoherenceError):
    pass


class BadExponentError(CoherenceError):
    pass


class DimensionMismatchError(CoherenceError):
    pass


class LengthMismatchError(CoherenceError):
    pass


class OutOfRangeError(CoherenceError):
    pass


class BadRankError(CoherenceError):
    pass


class WrongDimError(CoherenceError):
    pass


class BadPartitionError(CoherenceError):
    pass


class DegenerateInputError(CoherenceError):
    pass


class NotIncoherentError(CoherenceError):
    def __init__(self, index, column, count):
        self.index = index
        self.column = column
        self.count = count
        super().__init__(
            f"Kraus operator {index}: column {column} has {count} non-zero entries"
        )


class NotCompleteError(CoherenceError):
    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"sum K^dag K differs from identity by {residual:.3e}")


class MixedOutputDimsError(CoherenceError):
    pass


class InfeasibleShapeError(CoherenceError):
    pass


class NotCoherentError(CoherenceError):
    pass


class UnknownExperimentError(CoherenceError):
    pass


class NoConvergenceError(RuntimeError):
    """An iterative solver failed to certify its answer."""

    def __init__(self, message, value=None, gap=None):
        self.value = value
        self.gap = gap
        super().__init__(message)
