"""Divisor classes, pair relations, canonical reduction, named divisors."""

import json
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fnef import (
    DivisorClass,
    biplane_block_star_divisor,
    biplane_divisor,
    canonical_divisor,
    divisor_from_json_dict,
    divisor_from_text,
    divisor_to_json_dict,
    divisor_to_text,
    eliminate_psi,
    enumerate_fcurves,
    load_divisor,
    pair_divisor_fcurve,
    pairing_values,
    pullback_forgetful,
    reduce_canonical,
    relation_row,
    relation_system,
    symmetric_divisor,
)
from fnef.errors import BoundaryFormError, InvalidInputError, MalformedInputError
from fnef.subsets import canonical_generator, full_mask, mask_from_elements


def add_reduced(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, Fraction(0)) + v
        if not out[k]:
            del out[k]
    return out


def random_divisor(n, rng, terms=10, bound=5):
    coeffs = {}
    for _ in range(terms):
        mask = rng.randrange(1, full_mask(n))
        key = canonical_generator(mask, n)
        coeffs[key] = coeffs.get(key, 0) + rng.randrange(-bound, bound + 1)
    return DivisorClass(n, {k: v for k, v in coeffs.items() if v})


def test_relation_row_term_count():
    # oracle: sides containing 1 and omitting 2 inside {1..5} are {1} union
    # any subset of {3,4,5}
    row = relation_row(1, 2, 5)
    assert row.support_size() == 8
    assert all(c == 1 for c in row.coeffs.values())
    expected = set()
    for sub in range(8):
        side = {1} | {e for i, e in enumerate([3, 4, 5]) if sub >> i & 1}
        expected.add(canonical_generator(mask_from_elements(side, 5), 5))
    assert set(row.coeffs) == expected


def test_relation_row_rejects_bad_pairs():
    with pytest.raises(InvalidInputError):
        relation_row(2, 2, 6)
    with pytest.raises(InvalidInputError):
        relation_row(3, 1, 6)
    with pytest.raises(InvalidInputError):
        relation_row(1, 7, 6)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_relation_rank_is_pair_count(n):
    rs = relation_system(n)
    assert rs.rank == n * (n - 1) // 2
    assert rs.ambient_dim == (1 << (n - 1)) - 1 - rs.rank


def test_dimension_at_five_and_twelve():
    assert relation_system(5).ambient_dim == 5
    assert relation_system(12).rank == 66
    assert relation_system(12).ambient_dim == 1981


@pytest.mark.parametrize("n", [5, 6])
def test_every_relation_row_reduces_to_zero(n):
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            assert reduce_canonical(relation_row(i, j, n)) == {}


def test_reduce_is_linear_and_relation_invariant():
    rng = random.Random(11)
    for _ in range(15):
        a = random_divisor(6, rng)
        b = random_divisor(6, rng)
        assert reduce_canonical(a + b) == add_reduced(reduce_canonical(a), reduce_canonical(b))
        assert reduce_canonical(a + 3 * relation_row(2, 5, 6)) == reduce_canonical(a)


@given(st.integers(min_value=0, max_value=2**60))
@settings(max_examples=30, deadline=None)
def test_reduce_invariance_under_random_relation_combos(seed):
    rng = random.Random(seed)
    n = 5
    d = random_divisor(n, rng)
    shifted = d
    for _ in range(3):
        i = rng.randrange(1, n)
        j = rng.randrange(i + 1, n + 1)
        shifted = shifted + rng.randrange(-4, 5) * relation_row(i, j, n)
    assert reduce_canonical(shifted) == reduce_canonical(d)


def test_canonical_divisor_coefficients():
    k = canonical_divisor(12)
    assert k.coeff(mask_from_elements([1], 12)) == -1
    assert k.coeff(mask_from_elements([1, 2], 12)) == -2
    assert k.coeff(full_mask(11)) == -1  # the psi key of marking 12
    assert k.support_size() == 2047


def test_symmetric_divisor_coefficients():
    d0 = symmetric_divisor(12)
    assert d0.coeff(full_mask(11)) == -5
    assert d0.coeff(mask_from_elements(range(1, 11), 12)) == -4
    assert d0.coeff(mask_from_elements([1, 2], 12)) == 0
    assert d0.support_size() == 562  # sizes 7..11 over an 11-point set
    with pytest.raises(InvalidInputError):
        symmetric_divisor(11)


def test_block_star_divisor(qr_biplane):
    star = biplane_block_star_divisor(qr_biplane)
    assert star.coeff(mask_from_elements([1, 3, 4, 5, 9], 12)) == 1
    assert star.support_size() == 88
    assert star.coeff(mask_from_elements([1, 2], 12)) == 0
    assert all(c == 1 for c in star.coeffs.values())


def test_biplane_divisor_coefficients(qr_biplane):
    div = biplane_divisor(qr_biplane)
    assert div.coeff(full_mask(11)) == -5
    # a block key arises from the size-6 complement subset, disjoint from the block
    assert div.coeff(mask_from_elements([1, 3, 4, 5, 9], 12)) == -1
    assert div.support_size() == 650


def test_decomposition_identity(qr_biplane):
    div = biplane_divisor(qr_biplane)
    other = symmetric_divisor(12) - biplane_block_star_divisor(qr_biplane)
    assert div == other
    assert reduce_canonical(div) == reduce_canonical(other)


def test_eliminate_psi_leaves_boundary_classes_alone():
    d = DivisorClass(6, {mask_from_elements([1, 2], 6): 3, mask_from_elements([2, 4], 6): -1})
    assert eliminate_psi(d) is d


def test_eliminate_psi_preserves_class_of_symmetric_divisor():
    d0 = symmetric_divisor(12)
    flat = eliminate_psi(d0)
    assert flat.is_boundary_only()
    assert reduce_canonical(flat) == reduce_canonical(d0)


def test_eliminate_psi_pairing_invariance_full_scan(qr_divisor):
    import numpy as np
    from fnef import pairing_values

    flat = eliminate_psi(qr_divisor)
    assert flat.is_boundary_only()
    assert np.array_equal(pairing_values(flat), pairing_values(qr_divisor))


def test_eliminate_psi_pairing_invariance_exhaustive_n6():
    d = DivisorClass(6, {mask_from_elements([1], 6): 1})
    flat = eliminate_psi(d)
    assert flat.is_boundary_only()
    for c in enumerate_fcurves(6):
        assert pair_divisor_fcurve(flat, c) == pair_divisor_fcurve(d, c)


@given(st.integers(min_value=0, max_value=2**60))
@settings(max_examples=25, deadline=None)
def test_eliminate_psi_random_classes(seed):
    rng = random.Random(seed)
    d = random_divisor(6, rng, terms=8)
    flat = eliminate_psi(d)
    assert flat.is_boundary_only()
    assert reduce_canonical(flat) == reduce_canonical(d)


def test_pullback_of_single_boundary_term():
    d = DivisorClass(12, {mask_from_elements([1, 2], 12): 1})
    lifted = pullback_forgetful(d)
    assert lifted.n == 13
    assert lifted.coeff(mask_from_elements([1, 2], 13)) == 1
    # the side {1,2,13} is keyed by its complement {3..12}
    assert lifted.coeff(mask_from_elements(range(3, 13), 13)) == 1
    assert lifted.support_size() == 2


def test_pullback_zero_and_psi_rejection():
    assert pullback_forgetful(DivisorClass.zero(6)).coeffs == {}
    with pytest.raises(BoundaryFormError):
        pullback_forgetful(DivisorClass(6, {mask_from_elements([1], 6): 1}))


def test_pullback_pairs_zero_with_contracted_curves():
    rng = random.Random(5)
    d = eliminate_psi(random_divisor(6, rng))
    lifted = pullback_forgetful(d)
    for c in enumerate_fcurves(7):
        if (1 << 6) in c.blocks:  # marking 7 alone in a block
            assert pair_divisor_fcurve(lifted, c) == 0


def test_text_round_trip_and_canonicalization():
    text = "2 3,4,5,6,7,8,9,10,11,12\n-1 1,2\n3 1,2\n"
    d = divisor_from_text(text, 12)
    # both lines name the same generator: the complement side of {1,2} and {1,2} itself
    assert d.coeff(mask_from_elements([1, 2], 12)) == 4
    assert d.support_size() == 1
    again = divisor_from_text(divisor_to_text(d), 12)
    assert again == d


def test_json_round_trip(qr_biplane):
    div = biplane_divisor(qr_biplane)
    obj = divisor_to_json_dict(div)
    assert obj["n"] == 12
    assert divisor_from_json_dict(json.loads(json.dumps(obj))) == div


def test_load_divisor_formats(tmp_path, qr_biplane):
    div = biplane_divisor(qr_biplane)
    jpath = tmp_path / "d.json"
    jpath.write_text(json.dumps(divisor_to_json_dict(div)))
    assert load_divisor(str(jpath)) == div
    tpath = tmp_path / "d.txt"
    tpath.write_text(divisor_to_text(div))
    assert load_divisor(str(tpath), n=12) == div
    with pytest.raises(MalformedInputError):
        load_divisor(str(tpath))  # text needs the marking count
    with pytest.raises(MalformedInputError):
        load_divisor(str(jpath), n=11)


def test_malformed_divisor_text():
    with pytest.raises(MalformedInputError):
        divisor_from_text("1\n", 12)
    with pytest.raises(MalformedInputError):
        divisor_from_text("x 1,2\n", 12)
    with pytest.raises(MalformedInputError):
        divisor_from_text("1 0,2\n", 12)


def test_divisor_arithmetic_and_validation():
    a = DivisorClass(6, {0b00011: 2})
    b = DivisorClass(6, {0b00011: -2, 0b00101: 1})
    assert (a + b).coeffs == {0b00101: 1}
    assert (a - a).coeffs == {}
    assert (3 * b).coeff(0b00101) == 3
    with pytest.raises(InvalidInputError):
        DivisorClass(6, {0: 1})
    with pytest.raises(InvalidInputError):
        DivisorClass(6, {1 << 5: 1})  # side containing marking 6 is not canonical
    with pytest.raises(InvalidInputError):
        a + DivisorClass(5, {0b00011: 1})
