"""Exact integer combinatorics: Stirling numbers of the second kind and friends.

Everything here works on Python ints, so values never overflow and no
floating point is involved anywhere.
"""

from __future__ import annotations

import math
import threading
from typing import List

__all__ = [
    "StirlingTable",
    "stirling2",
    "binomial",
    "factorial",
    "falling_factorial",
    "base_identity_residual",
    "bell_triangle",
    "BASE_IDENTITIES",
]

BASE_IDENTITIES = ("recurrence", "binomial_sum", "diagonal", "power")


def _stirling2_explicit(a: int, b: int) -> int:
    # inclusion-exclusion, used past the memo cap
    if b > a:
        return 0
    if b == 0:
        return 1 if a == 0 else 0
    total = sum((-1) ** (b - j) * math.comb(b, j) * j**a for j in range(b + 1))
    return total // math.factorial(b)


class StirlingTable:
    """Dense triangular memo of S(a, b) for 0 <= b <= a <= max_a.

    Rows are appended on demand using S(a,b) = S(a-1,b-1) + b S(a-1,b).
    Requests with a > max_a are answered by the explicit alternating sum
    and are not cached.
    """

    def __init__(self, max_a: int = 64):
        if max_a < 0:
            raise ValueError("max_a must be non-negative")
        self.max_a = max_a
        self._rows: List[List[int]] = [[1]]
        self._lock = threading.Lock()

    @property
    def built_rows(self) -> int:
        return len(self._rows)

    def _grow(self, a: int) -> None:
        with self._lock:
            rows = self._rows
            while len(rows) <= a:
                prev = rows[-1]
                m = len(rows)
                row = [0] * (m + 1)
                for b in range(1, m + 1):
                    left = prev[b - 1]
                    right = prev[b] if b < m else 0
                    row[b] = left + b * right
                rows.append(row)

    def __call__(self, a: int, b: int) -> int:
        if a < 0 or b < 0:
            raise ValueError(f"Stirling indices must be non-negative, got ({a}, {b})")
        if b > a:
            return 0
        if a > self.max_a:
            return _stirling2_explicit(a, b)
        if a >= len(self._rows):
            self._grow(a)
        return self._rows[a][b]

    def row(self, a: int) -> List[int]:
        return [self(a, b) for b in range(a + 1)]


_DEFAULT_TABLE = StirlingTable()


def stirling2(a: int, b: int) -> int:
    """Number of partitions of an a-set into b non-empty blocks."""
    return _DEFAULT_TABLE(a, b)


def binomial(n: int, k: int) -> int:
    if n < 0:
        raise ValueError("binomial needs n >= 0")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def factorial(n: int) -> int:
    return math.factorial(n)


def falling_factorial(a: int, l: int) -> int:
    """a (a-1) ... (a-l+1); 1 for l = 0 and 0 once l exceeds a."""
    if a < 0 or l < 0:
        raise ValueError("falling_factorial needs non-negative arguments")
    if l > a:
        return 0
    return math.perm(a, l)


def base_identity_residual(which: str, a: int, b: int) -> int:
    """Signed LHS - RHS of one of the four classical Stirling identities.

    ``recurrence``   S(a,b) = S(a-1,b-1) + b S(a-1,b)         (needs a >= 1)
    ``binomial_sum`` S(a+1,b+1) = sum_l C(a,l) S(l,b)
    ``diagonal``     S(a+b+1,b) = sum_{l<=b} l S(a+l,l)
    ``power``        a^b = sum_{l<=b} S(b,l) a(a-1)...(a-l+1)
    """
    if a < 0 or b < 0:
        raise ValueError("identity parameters must be non-negative")
    S = stirling2
    if which == "recurrence":
        if a == 0:
            raise ValueError("recurrence needs a >= 1")
        lhs = S(a, b)
        rhs = (S(a - 1, b - 1) if b >= 1 else 0) + b * S(a - 1, b)
    elif which == "binomial_sum":
        lhs = S(a + 1, b + 1)
        rhs = sum(binomial(a, l) * S(l, b) for l in range(a + 1))
    elif which == "diagonal":
        lhs = S(a + b + 1, b)
        rhs = sum(l * S(a + l, l) for l in range(b + 1))
    elif which == "power":
        lhs = a**b
        rhs = sum(S(b, l) * falling_factorial(a, l) for l in range(b + 1))
    else:
        raise ValueError(f"unknown identity {which!r}; expected one of {BASE_IDENTITIES}")
    return lhs - rhs


def bell_triangle(rows: int) -> List[int]:
    """Bell numbers B_0..B_{rows-1} via the Aitken/Peirce triangle."""
    if rows <= 0:
        return []
    bells = [1]
    row = [1]
    while len(bells) < rows:
        new = [row[-1]]
        for value in row:
            new.append(new[-1] + value)
        row = new
        bells.append(row[0])
    return bells
