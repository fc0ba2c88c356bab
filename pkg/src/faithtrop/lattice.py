"""Integer lattice queries: primitive vectors, saturation and saturated-rank subsets."""
from __future__ import annotations

from functools import reduce
from itertools import combinations
from math import gcd
from typing import Sequence

IntVector = tuple[int, ...]

MAX_SUBSET_SEARCH = 16


def _gcd_all(values) -> int:
    return reduce(gcd, values, 0)


def primitive_part(v: Sequence[int]) -> IntVector:
    """Divide ``v`` by the gcd of its entries."""
    d = _gcd_all(abs(int(x)) for x in v)
    if d == 0:
        raise ValueError("zero direction")
    return tuple(int(x) // d for x in v)


def _det(rows: list[list[int]]) -> int:
    # Bareiss fraction-free elimination, exact over Z
    m = [list(r) for r in rows]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def rank(vs: Sequence[Sequence[int]]) -> int:
    """Linear rank over Q."""
    from fractions import Fraction

    rows = [[Fraction(x) for x in v] for v in vs]
    if not rows:
        return 0
    r = 0
    ncols = len(rows[0])
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


def minor_gcd(vs: Sequence[Sequence[int]], k: int) -> int:
    """gcd of all k x k minors of the matrix whose rows are ``vs``."""
    if k == 0:
        return 1
    rows = [list(map(int, v)) for v in vs]
    dim = len(rows[0])
    g = 0
    for ri in combinations(range(len(rows)), k):
        for ci in combinations(range(dim), k):
            g = gcd(g, _det([[rows[i][j] for j in ci] for i in ri]))
            if g == 1:
                return 1
    return g


def _check_dims(vs) -> None:
    dims = {len(v) for v in vs}
    if len(dims) > 1:
        raise ValueError(f"vectors of mixed dimension {sorted(dims)}")


def is_saturated(vs: Sequence[Sequence[int]]) -> bool:
    """True iff the Z-span of ``vs`` is a saturated sublattice.

    The span has rank r = linear rank of ``vs``; it is saturated iff the gcd
    of the r x r minors is 1.
    """
    if not vs:
        return True
    _check_dims(vs)
    r = rank(vs)
    if r == 0:
        return True
    return minor_gcd(vs, r) == 1


def maximal_saturated_subset(vs: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Indices of a largest family spanning a saturated lattice of full rank.

    Ties are broken lexicographically on the index tuple.
    """
    if len(vs) > MAX_SUBSET_SEARCH:
        raise ValueError("degree cap exceeded")
    if not vs:
        return ()
    _check_dims(vs)
    top = min(len(vs), len(vs[0]), rank(vs))
    for k in range(top, 0, -1):
        for sub in combinations(range(len(vs)), k):
            rows = [vs[i] for i in sub]
            if rank(rows) == k and minor_gcd(rows, k) == 1:
                return sub
    return ()


def max_saturated_rank_subset(vs: Sequence[Sequence[int]]) -> int:
    """Largest k such that some k of the vectors span a saturated lattice of rank k."""
    return len(maximal_saturated_subset(vs))
