"""Exception hierarchy shared by all modules."""


class MarkovTreeError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(MarkovTreeError, ValueError):
    pass


class NonSquareError(ValidationError):
    def __init__(self, shape):
        self.shape = shape
        super().__init__(f"matrix is not square: shape {shape}")


class MixedModeError(ValidationError):
    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(
            f"entry ({i}, {j}) mixes float and exact rational arithmetic; "
            "a matrix must be uniformly one mode"
        )


class RowSumViolation(ValidationError):
    def __init__(self, row, actual, expected=1):
        self.row = row
        self.actual = actual
        self.expected = expected
        super().__init__(f"row {row} sums to {actual}, expected {expected}")


class NegativeEntry(ValidationError):
    def __init__(self, i, j, value):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"entry ({i}, {j}) is negative: {value}")


class PositiveDiagonal(ValidationError):
    def __init__(self, i, value):
        self.i, self.value = i, value
        super().__init__(f"generator diagonal entry ({i}, {i}) is positive: {value}")


class AlphaTooLarge(ValidationError):
    def __init__(self, alpha, bound):
        self.alpha, self.bound = alpha, bound
        super().__init__(
            f"alpha={alpha} exceeds 1/max|a_ii| = {bound}; the diagonal would turn negative"
        )


class DimensionMismatch(MarkovTreeError, ValueError):
    pass


class VertexOutOfRange(MarkovTreeError, IndexError):
    def __init__(self, vertex, n):
        self.vertex, self.n = vertex, n
        super().__init__(f"vertex {vertex} out of range for {n} states")


class EnumerationCapExceeded(MarkovTreeError):
    def __init__(self, count, cap):
        self.count, self.cap = count, cap
        super().__init__(f"{count} trees exceed the enumeration cap of {cap}")


class InstanceTooLarge(MarkovTreeError):
    pass


class EmptyMarkedSet(MarkovTreeError, ValueError):
    pass


class TreeNotSpanning(MarkovTreeError, ValueError):
    pass


class TreeEdgeNotInGraph(MarkovTreeError, ValueError):
    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(f"tree edge {{{i}, {j}}} needs m_ij > 0 and m_ji > 0")


class DetailedBalanceViolation(MarkovTreeError):
    """Raised when a detailed-balance computation is requested on a chain that fails the check."""

    def __init__(self, report):
        self.report = report
        if not report.weakly_reversible:
            msg = f"not weakly reversible: witness pair {report.witness}"
        else:
            msg = f"cycle condition fails on cycle {list(report.worst_cycle)}"
        super().__init__(msg)
