"""Exact rational linear algebra for the small hopping systems."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


class SingularSystemError(ValueError):
    """Raised when a design system has no unique solution."""


def inverse(matrix: Sequence[Sequence[Fraction | int]]) -> list[list[Fraction]]:
    """Gauss-Jordan inverse over the rationals.

    Pivots on the first nonzero entry; exact arithmetic makes partial
    pivoting for stability unnecessary.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix must be square")
    aug = [
        [Fraction(x) for x in row] + [Fraction(int(i == r)) for i in range(n)]
        for r, row in enumerate(matrix)
    ]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise SingularSystemError(f"singular system (no pivot in column {col})")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def solve(matrix, rhs) -> list[Fraction]:
    inv = inverse(matrix)
    b = [Fraction(x) for x in rhs]
    return [sum((a * x for a, x in zip(row, b)), Fraction(0)) for row in inv]
