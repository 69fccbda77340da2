"""Small exact linear algebra over fractions.Fraction.

Matrices are tuples of tuples of Fraction (immutable, hashable); vectors are
tuples of Fraction.  Everything here is O(n^3) dense and meant for the tiny
dimensions of this package (n <= ~10).  Float mirrors convert explicitly via
``to_float`` -- conversion is never silent.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

Mat = tuple[tuple[Fraction, ...], ...]
Vec = tuple[Fraction, ...]


class SingularMatrixError(ValueError):
    pass


def fr(x) -> Fraction:
    """Exact conversion of int / Fraction / 'p/q' or decimal string to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"no exact conversion for {type(x).__name__}: {x!r}")


def mat(rows: Sequence[Sequence]) -> Mat:
    return tuple(tuple(fr(x) for x in row) for row in rows)


def vec(entries: Sequence) -> Vec:
    return tuple(fr(x) for x in entries)


def identity(n: int) -> Mat:
    one, zero = Fraction(1), Fraction(0)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def zeros_vec(n: int) -> Vec:
    return (Fraction(0),) * n


def transpose(a: Mat) -> Mat:
    return tuple(zip(*a))


def matmul(a: Mat, b: Mat) -> Mat:
    n, k, m = len(a), len(b), len(b[0])
    assert all(len(row) == k for row in a)
    return tuple(
        tuple(sum(a[i][l] * b[l][j] for l in range(k)) for j in range(m))
        for i in range(n)
    )


def matvec(a: Mat, v: Vec) -> Vec:
    return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in a)


def vdot(u: Vec, v: Vec) -> Fraction:
    return sum((ui * vi for ui, vi in zip(u, v)), Fraction(0))


def vadd(u: Vec, v: Vec) -> Vec:
    return tuple(ui + vi for ui, vi in zip(u, v))


def vsub(u: Vec, v: Vec) -> Vec:
    return tuple(ui - vi for ui, vi in zip(u, v))


def vscale(c: Fraction, v: Vec) -> Vec:
    return tuple(c * vi for vi in v)


def gram(a: Mat) -> Mat:
    """A^T A (symmetric, PSD for invertible A)."""
    return matmul(transpose(a), a)


def det(a: Mat) -> Fraction:
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    n = len(a)
    m = [list(row) for row in a]
    d = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            d = -d
        d *= m[col][col]
        inv_p = 1 / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv_p
            if f:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return d


def solve(a: Mat, b: Vec) -> Vec:
    """Exact solution of a x = b; raises SingularMatrixError if det = 0."""
    n = len(a)
    m = [list(row) + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise SingularMatrixError("singular matrix in solve")
        m[col], m[piv] = m[piv], m[col]
        inv_p = 1 / m[col][col]
        for c in range(col, n + 1):
            m[col][c] *= inv_p
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                for c in range(col, n + 1):
                    m[r][c] -= f * m[col][c]
    return tuple(m[i][n] for i in range(n))


def inv(a: Mat) -> Mat:
    n = len(a)
    cols = [solve(a, tuple(Fraction(1 if i == j else 0) for i in range(n))) for j in range(n)]
    return transpose(tuple(cols))


def is_integral(a: Mat) -> bool:
    return all(x.denominator == 1 for row in a for x in row)


def denominator_lcm(a: Mat) -> int:
    l = 1
    for row in a:
        for x in row:
            l = l * x.denominator // math.gcd(l, x.denominator)
    return l


def scaled_int(a: Mat, scale: int) -> list[list[int]]:
    """scale * a as exact ints; scale must clear all denominators."""
    out = []
    for row in a:
        r = []
        for x in row:
            y = x * scale
            if y.denominator != 1:
                raise ValueError("scale does not clear denominators")
            r.append(int(y))
        out.append(r)
    return out


def to_float(a) -> np.ndarray:
    """Explicit Fraction -> float64 conversion (matrix or vector)."""
    return np.asarray(a, dtype=np.float64)


def entry_gcd(a: Mat) -> int:
    """gcd of all numerators of an integral matrix (0 entries ignored)."""
    g = 0
    for row in a:
        for x in row:
            if x.denominator != 1:
                raise ValueError("entry_gcd needs an integral matrix")
            g = math.gcd(g, abs(int(x)))
    return g
