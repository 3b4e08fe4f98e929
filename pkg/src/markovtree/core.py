"""Matrix domain types, validation and generator/stochastic conversion.

Every matrix carries one arithmetic mode for all of its entries: exact
(``fractions.Fraction``) or binary64 floats.  Exact mode lets the
combinatorial identities be checked as equalities; floats are the default
for user data.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import (
    AlphaTooLarge,
    MixedModeError,
    NegativeEntry,
    NonSquareError,
    PositiveDiagonal,
    RowSumViolation,
    ValidationError,
)

Scalar = Union[Fraction, float]

STRICT = "strict"
GENERALIZED = "generalized"
MODES = (STRICT, GENERALIZED)

#: absolute tolerance on float row sums
ROW_SUM_TOL = 1e-12


def _is_float(x) -> bool:
    return isinstance(x, (float, np.floating))


def _is_exact(x) -> bool:
    return isinstance(x, (numbers.Rational, np.integer)) and not isinstance(x, bool)


def _shape_check(entries) -> list[list]:
    rows = [list(r) for r in entries]
    n = len(rows)
    if n == 0:
        raise NonSquareError((0, 0))
    for r in rows:
        if len(r) != n:
            raise NonSquareError((n, len(r)))
    return rows


def infer_exact(entries) -> bool:
    """Exact mode iff no entry is a float.  Raises on a float/Fraction mix."""
    seen_float = seen_fraction = None
    for i, row in enumerate(entries):
        for j, x in enumerate(row):
            if _is_float(x):
                seen_float = seen_float or (i, j)
            elif isinstance(x, Fraction):
                seen_fraction = seen_fraction or (i, j)
            elif not _is_exact(x):
                raise ValidationError(f"entry ({i}, {j}) is not a number: {x!r}")
    if seen_float and seen_fraction:
        raise MixedModeError(*max(seen_float, seen_fraction))
    return seen_float is None


def coerce_entries(entries, exact: bool | None = None) -> tuple[tuple[Scalar, ...], ...]:
    """Convert a nested sequence to a tuple-of-tuples of one scalar type."""
    rows = _shape_check(entries)
    if exact is None:
        exact = infer_exact(rows)
    out = []
    for i, row in enumerate(rows):
        conv = []
        for j, x in enumerate(row):
            if exact:
                if _is_float(x):
                    raise MixedModeError(i, j)
                conv.append(Fraction(int(x)) if isinstance(x, np.integer) else Fraction(x))
            else:
                if isinstance(x, Fraction):
                    raise MixedModeError(i, j)
                conv.append(float(x))
        out.append(tuple(conv))
    return tuple(out)


def _row_sum(row, exact):
    return sum(row, Fraction(0)) if exact else math.fsum(row)


@dataclass(frozen=True)
class StochasticMatrix:
    """Validated row-stochastic matrix; build it with :func:`validate_stochastic`.

    ``entries[i][j]`` is the transition weight from state ``i`` to ``j``.
    States are indexed from 0.
    """

    entries: tuple[tuple[Scalar, ...], ...]
    mode: str = STRICT
    exact: bool = False

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def zero(self) -> Scalar:
        return Fraction(0) if self.exact else 0.0

    @property
    def one(self) -> Scalar:
        return Fraction(1) if self.exact else 1.0

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries], dtype=float)

    def to_float(self) -> StochasticMatrix:
        if not self.exact:
            return self
        rows = tuple(tuple(float(x) for x in row) for row in self.entries)
        return StochasticMatrix(rows, self.mode, False)

    def submatrix(self, states: Sequence[int]) -> tuple[tuple[Scalar, ...], ...]:
        """Rows and columns restricted to ``states``, without renormalisation."""
        return tuple(tuple(self.entries[i][j] for j in states) for i in states)


@dataclass(frozen=True)
class MarkovGenerator:
    """Validated generator matrix: zero row sums, nonnegative off-diagonal."""

    entries: tuple[tuple[Scalar, ...], ...]
    exact: bool = False

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]


def validate_stochastic(entries, mode: str = STRICT, exact: bool | None = None) -> StochasticMatrix:
    """Validate a square array as a stochastic matrix.

    Rows are checked in order; within a row, negative entries (strict mode)
    are reported before the row sum.  Exact rows must sum to exactly 1,
    float rows to within ``ROW_SUM_TOL``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(entries, StochasticMatrix):
        entries = entries.entries
    rows = coerce_entries(entries, exact)
    exact = isinstance(rows[0][0], Fraction)
    for i, row in enumerate(rows):
        if mode == STRICT:
            for j, x in enumerate(row):
                if x < 0:
                    raise NegativeEntry(i, j, x)
        s = _row_sum(row, exact)
        if (s != 1) if exact else (abs(s - 1.0) > ROW_SUM_TOL):
            raise RowSumViolation(i, s)
    return StochasticMatrix(rows, mode, exact)


def validate_generator(entries, exact: bool | None = None) -> MarkovGenerator:
    rows = coerce_entries(entries, exact)
    exact = isinstance(rows[0][0], Fraction)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            if i != j and x < 0:
                raise NegativeEntry(i, j, x)
        if row[i] > 0:
            raise PositiveDiagonal(i, row[i])
        s = _row_sum(row, exact)
        if (s != 0) if exact else (abs(s) > ROW_SUM_TOL):
            raise RowSumViolation(i, s, expected=0)
    return MarkovGenerator(rows, exact)


def generator_to_stochastic(A: MarkovGenerator, alpha: Scalar | None = None) -> StochasticMatrix:
    """Return ``alpha * A + I`` as a strict stochastic matrix.

    With ``alpha=None`` the largest admissible step ``1 / max|a_ii|`` is
    used (``alpha = 1`` for the zero generator).
    """
    one = Fraction(1) if A.exact else 1.0
    max_diag = max(abs(A.entries[i][i]) for i in range(A.n))
    if alpha is None:
        alpha = one if max_diag == 0 else one / max_diag
    else:
        alpha = Fraction(alpha) if A.exact else float(alpha)
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        if alpha * max_diag > 1:
            raise AlphaTooLarge(alpha, one / max_diag)
    rows = [
        [alpha * x + (one if i == j else 0) for j, x in enumerate(row)]
        for i, row in enumerate(A.entries)
    ]
    if not A.exact:
        # alpha * a_ii + 1 may round to a tiny negative number at the boundary
        for i in range(A.n):
            if -ROW_SUM_TOL < rows[i][i] < 0:
                rows[i][i] = 0.0
    return validate_stochastic(rows, STRICT, A.exact)


def stochastic_to_generator(M: StochasticMatrix) -> MarkovGenerator:
    """Return ``A = M - I``."""
    if M.mode != STRICT:
        raise ValidationError("generator conversion needs a strict stochastic matrix")
    one = M.one
    rows = [
        [x - (one if i == j else 0) for j, x in enumerate(row)]
        for i, row in enumerate(M.entries)
    ]
    return validate_generator(rows, M.exact)


def identity(n: int, exact: bool = True) -> StochasticMatrix:
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    return validate_stochastic([[one if i == j else zero for j in range(n)] for i in range(n)])
