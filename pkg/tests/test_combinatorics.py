import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charex.combinatorics import (
    BASE_IDENTITIES,
    StirlingTable,
    base_identity_residual,
    bell_triangle,
    binomial,
    factorial,
    falling_factorial,
    stirling2,
)


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def pascal(n):
    row = [1]
    for _ in range(n):
        row = [a + b for a, b in zip([0] + row, row + [0])]
    return row


@pytest.mark.parametrize("a", range(0, 12))
def test_diagonal_is_one(a):
    assert stirling2(a, a) == 1


def test_four_two_by_enumeration():
    brute = sum(1 for p in set_partitions(list(range(4))) if len(p) == 2)
    assert brute == 7
    assert stirling2(4, 2) == 7


@pytest.mark.parametrize("a", range(0, 8))
def test_table_matches_partition_enumeration(a):
    counts = [0] * (a + 1)
    for p in set_partitions(list(range(a))):
        counts[len(p)] += 1
    assert [stirling2(a, b) for b in range(a + 1)] == counts


def test_five_four_is_triangular_number():
    assert stirling2(5, 4) == 10 == 4 * 5 // 2


def test_boundary_values():
    assert stirling2(0, 0) == 1
    assert all(stirling2(a, 0) == 0 for a in range(1, 10))
    assert stirling2(3, 7) == 0


def test_large_values_exceed_machine_words():
    assert stirling2(30, 10) == 173373343599189364594756
    assert stirling2(30, 10) > 2**64


def test_past_memo_cap_uses_explicit_formula():
    small = StirlingTable(max_a=10)
    big = StirlingTable(max_a=64)
    for a in (11, 20, 33):
        for b in range(a + 1):
            assert small(a, b) == big(a, b)
    assert small.built_rows <= 11


def test_negative_indices_rejected():
    with pytest.raises(ValueError):
        stirling2(-1, 0)


@pytest.mark.parametrize("n,k,want", [(5, 0, 1), (0, 0, 1), (6, 3, 20), (3, 5, 0), (4, -1, 0)])
def test_binomial(n, k, want):
    assert binomial(n, k) == want


@pytest.mark.parametrize("n", range(0, 15))
def test_binomial_against_pascal(n):
    assert [binomial(n, k) for k in range(n + 1)] == pascal(n)


def test_factorials():
    assert factorial(0) == 1
    assert falling_factorial(5, 2) == 20
    assert falling_factorial(3, 4) == 0
    assert falling_factorial(7, 0) == 1
    assert falling_factorial(6, 6) == math.factorial(6)


def test_residual_examples():
    assert base_identity_residual("recurrence", 5, 2) == 0
    assert stirling2(5, 2) == 15 == stirling2(4, 1) + 2 * stirling2(4, 2)
    assert base_identity_residual("power", 3, 2) == 0
    for a in range(1, 10):
        assert base_identity_residual("power", a, 0) == 0


def test_residual_is_signed():
    # the Stirling side of the power identity with a=0,b=1 vs 0^1: both vanish
    assert base_identity_residual("power", 0, 1) == 0
    with pytest.raises(ValueError):
        base_identity_residual("nonsense", 1, 1)


def test_recurrence_residual_grid():
    for a in range(1, 31):
        for b in range(1, a + 1):
            assert base_identity_residual("recurrence", a, b) == 0


def test_all_base_identities_small_sum():
    for a in range(0, 26):
        for b in range(0, 26 - a):
            for which in BASE_IDENTITIES:
                if which == "recurrence" and a == 0:
                    continue
                assert base_identity_residual(which, a, b) == 0, (which, a, b)


def bell_by_recurrence(count):
    bells = [1]
    for n in range(count - 1):
        bells.append(sum(math.comb(n, k) * bells[k] for k in range(n + 1)))
    return bells


def test_bell_triangle_cross_check():
    bells = bell_triangle(21)
    assert bells == bell_by_recurrence(21)
    for a in range(21):
        assert sum(stirling2(a, b) for b in range(a + 1)) == bells[a]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 40), st.integers(0, 40))
def test_stirling_is_pure(a, b):
    assert stirling2(a, b) == stirling2(a, b)
    if 1 <= b <= a:
        assert stirling2(a, b) == stirling2(a - 1, b - 1) + b * stirling2(a - 1, b)
