"""Small exact determinant helpers."""

from __future__ import annotations

import math
from fractions import Fraction


def bareiss_det(a: list[list[int]]) -> int:
    """Fraction-free determinant of an integer matrix (1 for the empty matrix)."""
    n = len(a)
    if n == 0:
        return 1
    a = [row[:] for row in a]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def integer_rows(rows) -> tuple[list[list[int]], list[int]]:
    """Scale each row of a rational matrix by the lcm of its denominators.

    Returns ``(numerators, scales)`` with ``rows[i][j] == numerators[i][j] / scales[i]``.
    """
    nums, scales = [], []
    for row in rows:
        d = 1
        for x in row:
            d = math.lcm(d, Fraction(x).denominator)
        nums.append([int(Fraction(x) * d) for x in row])
        scales.append(d)
    return nums, scales
