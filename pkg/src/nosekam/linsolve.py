"""Exact linear solving over the rationals.

The normal-form matching systems have exact-rational coefficient matrices,
while the right-hand sides may be rational numbers or parametric jets.  The
solver does plain Gaussian elimination with exact pivots, reports free
unknowns (the caller zeroes them), and raises on any inconsistent row rather
than least-squaring it away.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence


class LinearSolveError(Exception):
    pass


class InconsistentSystemError(LinearSolveError):
    """A row reduced to 0 = nonzero; carries the offending row labels."""

    def __init__(self, labels):
        self.labels = list(labels)
        super().__init__(f"inconsistent equations at {self.labels}")


@dataclass
class ExactSolveResult:
    solution: dict
    free: list
    pivots: list = field(default_factory=list)  # (row_label, unknown) pairs

    def __getitem__(self, unknown):
        return self.solution[unknown]


def _is_zero(x) -> bool:
    if isinstance(x, Fraction):
        return x == 0
    if isinstance(x, int):
        return x == 0
    return x.is_zero()


def solve_exact(matrix: Sequence[Sequence[Fraction]], rhs: Sequence,
                unknowns: Sequence, row_labels: Sequence | None = None,
                zero_rhs=None) -> ExactSolveResult:
    """Solve matrix @ x = rhs exactly.

    matrix entries are Fractions; rhs entries are Fractions or any ring
    elements supporting +, -, scalar multiplication by Fraction and
    ``is_zero``/`== 0`.  Unknowns without a pivot are free and set to
    ``zero_rhs`` (default Fraction(0)).
    """
    m = [list(map(Fraction, row)) for row in matrix]
    b = list(rhs)
    n_rows = len(m)
    n_cols = len(unknowns)
    labels = list(row_labels) if row_labels is not None else list(range(n_rows))
    if any(len(row) != n_cols for row in m):
        raise LinearSolveError("ragged matrix")
    if len(b) != n_rows:
        raise LinearSolveError("rhs length mismatch")

    zero = Fraction(0) if zero_rhs is None else zero_rhs
    pivot_of_col: dict[int, int] = {}
    row = 0
    for col in range(n_cols):
        pivot = None
        for r in range(row, n_rows):
            if m[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        b[row], b[pivot] = b[pivot], b[row]
        labels[row], labels[pivot] = labels[pivot], labels[row]
        inv = Fraction(1) / m[row][col]
        m[row] = [inv * x for x in m[row]]
        b[row] = b[row] * inv
        for r in range(n_rows):
            if r != row and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[row])]
                b[r] = b[r] - b[row] * factor
        pivot_of_col[col] = row
        row += 1
        if row == n_rows:
            break

    bad = []
    pivot_rows = set(pivot_of_col.values())
    for r in range(n_rows):
        if r in pivot_rows:
            continue
        if any(x != 0 for x in m[r]):
            raise LinearSolveError("internal elimination error")
        if not _is_zero(b[r]):
            bad.append(labels[r])
    if bad:
        raise InconsistentSystemError(bad)

    # after Gauss-Jordan the matrix is in RREF: pivot rows may carry nonzero
    # entries only in free columns, and free unknowns are set to zero, so each
    # pivot unknown equals its reduced rhs directly.
    solution = {}
    free = []
    for col, unknown in enumerate(unknowns):
        if col in pivot_of_col:
            solution[unknown] = b[pivot_of_col[col]]
        else:
            free.append(unknown)
            solution[unknown] = zero
    pivots = [(labels[r], unknowns[c]) for c, r in sorted(pivot_of_col.items(), key=lambda kv: kv[1])]
    return ExactSolveResult(solution, free, pivots)


def invert_matrix(matrix: Sequence[Sequence[Fraction]]) -> list:
    """Exact inverse of a small square rational matrix."""
    n = len(matrix)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise LinearSolveError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [inv * x for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]
