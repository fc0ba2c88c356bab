"""Rational parsing/formatting and a small exact linear solver."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def q(x) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction (floats rejected)."""
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a 'p/q' string")
    return Fraction(x)


def qstr(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction]:
    """Solve the square system ``a x = b`` exactly by Gauss-Jordan elimination."""
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(bi)] for row, bi in zip(a, b)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        m[c], m[piv] = m[piv], m[c]
        pr = m[c]
        inv = 1 / pr[c]
        if inv != 1:
            for j in range(c, n + 1):
                pr[j] *= inv
        for i in range(n):
            if i != c:
                row = m[i]
                f = row[c]
                if f:
                    for j in range(c, n + 1):
                        if pr[j]:
                            row[j] -= f * pr[j]
    return [m[i][n] for i in range(n)]
