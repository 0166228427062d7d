"""Exact linear algebra over Q.

Matrices are lists of rows of Fractions.  Elimination runs fraction-free on
integer-scaled rows (cross-multiplication followed by gcd normalization), so
intermediate entries stay integral; results are reduced back to Fractions.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

Row = List[Fraction]
Matrix = List[Row]


def _int_rows(rows: Sequence[Sequence[Fraction]]) -> List[List[int]]:
    out = []
    for row in rows:
        row = [Fraction(x) for x in row]
        scale = 1
        for x in row:
            scale = scale * x.denominator // gcd(scale, x.denominator)
        out.append([int(x * scale) for x in row])
    return out


def _normalize_int_row(row: List[int]) -> List[int]:
    g = 0
    for x in row:
        g = gcd(g, abs(x))
        if g == 1:
            break
    if g > 1:
        row = [x // g for x in row]
    return row


def rref(rows: Sequence[Sequence[Fraction]]) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form; returns (rows, pivot column indices)."""
    work = [_normalize_int_row(r) for r in _int_rows(rows) if any(r)]
    ncols = len(work[0]) if work else (len(rows[0]) if rows else 0)
    pivots: List[int] = []
    echelon: List[List[int]] = []
    col = 0
    while work and col < ncols:
        pivot_idx = None
        best = None
        for i, row in enumerate(work):
            if row[col]:
                mag = abs(row[col])
                if best is None or mag < best:
                    best = mag
                    pivot_idx = i
                if mag == 1:
                    break
        if pivot_idx is None:
            col += 1
            continue
        pivot = work.pop(pivot_idx)
        pv = pivot[col]
        remaining = []
        for row in work:
            if row[col]:
                # integer cross-elimination keeps everything fraction-free
                rv = row[col]
                row = [rv_ * pv - pv_ * rv for rv_, pv_ in zip(row, pivot)]
                row = _normalize_int_row(row)
            if any(row):
                remaining.append(row)
        work = remaining
        echelon.append(pivot)
        pivots.append(col)
        col += 1
    # back-substitute to full reduced form, over Fractions
    reduced: Matrix = [[Fraction(x) for x in row] for row in echelon]
    for i in range(len(reduced) - 1, -1, -1):
        pc = pivots[i]
        pv = reduced[i][pc]
        reduced[i] = [x / pv for x in reduced[i]]
        for j in range(i):
            factor = reduced[j][pc]
            if factor:
                reduced[j] = [
                    a - factor * b for a, b in zip(reduced[j], reduced[i])
                ]
    return reduced, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(rows)[1])


def kernel_basis(rows: Sequence[Sequence[Fraction]], ncols: int) -> Matrix:
    """Basis of {x in Q^ncols : A x = 0}, integer-normalized vectors."""
    if not rows:
        basis = []
        for j in range(ncols):
            v = [Fraction(0)] * ncols
            v[j] = Fraction(1)
            basis.append(v)
        return basis
    reduced, pivots = rref(rows)
    pivot_set = set(pivots)
    free_cols = [j for j in range(ncols) if j not in pivot_set]
    basis = []
    for free in free_cols:
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -reduced[i][free]
        # clear denominators for a stable integral representative
        scale = 1
        for x in v:
            scale = scale * x.denominator // gcd(scale, x.denominator)
        v = [x * scale for x in v]
        basis.append(v)
    return basis


def solve(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> Optional[Row]:
    """One exact solution of A x = b, or None if inconsistent."""
    if not rows:
        return None if any(Fraction(b) != 0 for b in rhs) else []
    ncols = len(rows[0])
    augmented = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(rows, rhs)]
    reduced, pivots = rref(augmented)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for i, pc in enumerate(pivots):
        x[pc] = reduced[i][ncols]
    return x


def same_row_space(a: Matrix, b: Matrix) -> bool:
    ra, rb = rank(a), rank(b)
    return ra == rb == rank(list(a) + list(b))


def row_space_contains(a: Matrix, vector: Sequence[Fraction]) -> bool:
    return rank(list(a) + [list(map(Fraction, vector))]) == rank(a)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    return [
        [sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in zip(*b)]
        for row in a
    ]


def matvec(a: Matrix, v: Sequence[Fraction]) -> Row:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def identity(n: int) -> Matrix:
    return [
        [Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)
    ]


def det2(a: Matrix) -> Fraction:
    return a[0][0] * a[1][1] - a[0][1] * a[1][0]
