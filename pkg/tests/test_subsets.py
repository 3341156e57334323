"""Mask canonicalization and 4-block partition enumeration."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fnef import (
    FCurve,
    canonical_generator,
    count_fcurves,
    enumerate_fcurves,
    fcurve_block_arrays,
    parse_fcurve,
    stirling2,
)
from fnef.errors import InvalidInputError
from fnef.subsets import (
    elements_from_mask,
    format_subset,
    full_mask,
    mask_from_elements,
    parse_subset,
)


def brute_force_partitions(n, k):
    """Oracle: distinct partitions of {1..n} into k nonempty blocks, found by
    trying every labeling of elements with k labels."""
    seen = set()
    for code in range(k ** n):
        labels = []
        c = code
        for _ in range(n):
            labels.append(c % k)
            c //= k
        blocks = [frozenset(i + 1 for i, l in enumerate(labels) if l == b) for b in range(k)]
        if all(blocks):
            seen.add(frozenset(blocks))
    return seen


def test_canonical_examples():
    assert canonical_generator(mask_from_elements([1, 2], 12), 12) == 0b11
    assert canonical_generator(mask_from_elements(range(3, 13), 12), 12) == 0b11
    assert canonical_generator(mask_from_elements([12], 12), 12) == full_mask(11)


def test_canonical_rejects_empty_and_full():
    with pytest.raises(InvalidInputError):
        canonical_generator(0, 6)
    with pytest.raises(InvalidInputError):
        canonical_generator(full_mask(6), 6)
    with pytest.raises(InvalidInputError):
        canonical_generator(1 << 7, 6)  # bit outside 1..6


@given(st.integers(min_value=4, max_value=16), st.data())
def test_canonical_collapses_complements(n, data):
    mask = data.draw(st.integers(min_value=1, max_value=full_mask(n) - 1))
    key = canonical_generator(mask, n)
    assert key == canonical_generator(mask ^ full_mask(n), n)
    assert key == canonical_generator(key, n)  # idempotent
    assert not (key >> (n - 1)) and key != 0


@pytest.mark.parametrize("n", range(4, 9))
def test_canonical_collapse_exhaustive(n):
    full = full_mask(n)
    for mask in range(1, full):
        assert canonical_generator(mask, n) == canonical_generator(mask ^ full, n)


def test_n4_single_curve():
    curves = list(enumerate_fcurves(4))
    assert len(curves) == 1
    assert curves[0].blocks == (0b0001, 0b0010, 0b0100, 0b1000)


def test_n5_against_brute_force():
    oracle = brute_force_partitions(5, 4)
    assert len(oracle) == 10
    got = {frozenset(frozenset(elements_from_mask(b)) for b in c.blocks)
           for c in enumerate_fcurves(5)}
    assert got == oracle
    assert count_fcurves(5) == 10


def test_n5_restricted_growth_order():
    # lexicographic restricted-growth strings with 4 classes, as blocks
    expected = [
        ({1, 2}, {3}, {4}, {5}),
        ({1, 3}, {2}, {4}, {5}),
        ({1}, {2, 3}, {4}, {5}),
        ({1, 4}, {2}, {3}, {5}),
        ({1}, {2, 4}, {3}, {5}),
        ({1}, {2}, {3, 4}, {5}),
        ({1, 5}, {2}, {3}, {4}),
        ({1}, {2, 5}, {3}, {4}),
        ({1}, {2}, {3, 5}, {4}),
        ({1}, {2}, {3}, {4, 5}),
    ]
    got = [tuple(set(elements_from_mask(b)) for b in c.blocks) for c in enumerate_fcurves(5)]
    assert got == expected


@pytest.mark.parametrize("n", range(4, 11))
def test_count_matches_enumeration_and_no_duplicates(n):
    arr = fcurve_block_arrays(n)
    assert len(arr) == count_fcurves(n)
    packed = (
        arr[:, 0].astype(np.int64)
        | arr[:, 1].astype(np.int64) << 16
        | arr[:, 2].astype(np.int64) << 32
        | arr[:, 3].astype(np.int64) << 48
    )
    assert len(np.unique(packed)) == len(arr)


@pytest.mark.parametrize("n", range(4, 11))
def test_every_curve_partitions_markings(n):
    full = full_mask(n)
    for c in enumerate_fcurves(n):
        union = 0
        total = 0
        for b in c.blocks:
            assert b != 0
            union |= b
            total += bin(b).count("1")
        assert union == full and total == n


def test_stirling_recurrence_values():
    assert stirling2(4, 4) == 1
    assert stirling2(12, 4) == 611501
    assert count_fcurves(12) == 611501
    # recurrence identity spot check
    assert stirling2(13, 4) == stirling2(12, 3) + 4 * stirling2(12, 4)


def test_count_rejects_small_n():
    with pytest.raises(InvalidInputError):
        count_fcurves(3)
    with pytest.raises(InvalidInputError):
        list(enumerate_fcurves(3))


def test_fcurve_validation():
    with pytest.raises(InvalidInputError):
        FCurve(5, (0b00011, 0b00100, 0b01000, 0b01000))  # repeated block
    with pytest.raises(InvalidInputError):
        FCurve(5, (0b00011, 0b00100, 0b01000, 0))  # empty block
    with pytest.raises(InvalidInputError):
        FCurve(5, (0b00011, 0b00111, 0b01000, 0b10000))  # overlap


def test_fcurve_canonical_block_order():
    c = FCurve(5, (0b10000, 0b01000, 0b00100, 0b00011))
    assert c.blocks == (0b00011, 0b00100, 0b01000, 0b10000)
    assert str(c) == "1,2|3|4|5"


def test_fcurve_string_round_trip():
    text = "1|2|3|4,5,6,7,8,9,10,11,12"
    c = parse_fcurve(text, 12)
    assert str(c) == text
    with pytest.raises(InvalidInputError):
        parse_fcurve("1|2|3", 12)
    with pytest.raises(InvalidInputError):
        parse_fcurve("1|2|3|4,4", 5)


def test_subset_round_trip():
    assert format_subset(parse_subset("1,3,4,5,9", 11)) == "1,3,4,5,9"
    with pytest.raises(InvalidInputError):
        parse_subset("0,1", 11)
    with pytest.raises(InvalidInputError):
        parse_subset("", 11)


@given(st.integers(min_value=4, max_value=9))
@settings(max_examples=20, deadline=None)
def test_stream_is_restartable(n):
    first = [c.blocks for c in enumerate_fcurves(n)]
    second = [c.blocks for c in enumerate_fcurves(n)]
    assert first == second
