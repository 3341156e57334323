"""Subset masks, canonical generator keys, and 4-block partition enumeration.

Markings are named 1..n and stored as bits 0..n-1 of an integer mask.
A generator key is the side of a marking partition that does not contain
marking n; singleton keys stand for the negated cotangent classes.
All higher modules iterate partitions in the fixed order produced here.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from .errors import InvalidInputError

MIN_MARKINGS = 4
MAX_MARKINGS = 16  # subsets must fit a 16-bit mask


def validate_n(n: int) -> int:
    if not isinstance(n, int) or not MIN_MARKINGS <= n <= MAX_MARKINGS:
        raise InvalidInputError(
            f"marking count must be an integer in [{MIN_MARKINGS}, {MAX_MARKINGS}], got {n!r}"
        )
    return n


def full_mask(n: int) -> int:
    """Mask of the whole marking set {1..n}."""
    return (1 << n) - 1


def mask_from_elements(elements: Iterable[int], n: int) -> int:
    m = 0
    for e in elements:
        if not 1 <= e <= n:
            raise InvalidInputError(f"marking {e} out of range 1..{n}")
        m |= 1 << (e - 1)
    return m


def elements_from_mask(mask: int) -> tuple[int, ...]:
    """Ascending marking numbers of a mask."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length())
        mask ^= low
    return tuple(out)


def format_subset(mask: int) -> str:
    """Serialize a subset as comma-separated ascending integers."""
    return ",".join(str(e) for e in elements_from_mask(mask))


def parse_subset(text: str, n: int) -> int:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if not parts:
        raise InvalidInputError(f"empty subset in {text!r}")
    try:
        elems = [int(p) for p in parts]
    except ValueError as exc:
        raise InvalidInputError(f"bad subset {text!r}: {exc}") from None
    mask = mask_from_elements(elems, n)
    if mask.bit_count() != len(elems):
        raise InvalidInputError(f"repeated marking in subset {text!r}")
    return mask


def canonical_generator(mask: int, n: int) -> int:
    """Canonical key of the generator with side `mask`: the side omitting n.

    Idempotent, and identical on a subset and its complement.  Empty and
    full subsets do not name a generator.
    """
    validate_n(n)
    full = full_mask(n)
    if mask & ~full:
        raise InvalidInputError(f"mask {mask:#x} has bits outside 1..{n}")
    if mask == 0 or mask == full:
        raise InvalidInputError("empty or full subset does not define a generator")
    if mask >> (n - 1):
        return mask ^ full
    return mask


def is_psi_key(mask: int, n: int) -> bool:
    """True for the n canonical keys that stand for -psi classes."""
    return mask.bit_count() == 1 or mask == full_mask(n - 1)


def psi_marking(mask: int, n: int) -> int:
    """Marking number of a psi-type key ({i} -> i, {1..n-1} -> n)."""
    if mask == full_mask(n - 1):
        return n
    if mask.bit_count() == 1:
        return mask.bit_length()
    raise InvalidInputError(f"{format_subset(mask)} is not a psi-type key")


def is_boundary_key(mask: int, n: int) -> bool:
    return 2 <= mask.bit_count() <= n - 2


def all_generator_keys(n: int) -> range:
    """All canonical key masks for n markings: the nonzero masks on bits 0..n-2."""
    validate_n(n)
    return range(1, 1 << (n - 1))


@lru_cache(maxsize=None)
def stirling2(m: int, k: int) -> int:
    """Number of partitions of an m-set into k nonempty blocks."""
    if k == 0:
        return 1 if m == 0 else 0
    if m < k:
        return 0
    if m == k:
        return 1
    return stirling2(m - 1, k - 1) + k * stirling2(m - 1, k)


def count_fcurves(n: int) -> int:
    """Number of 4-block partitions of {1..n}, via the Stirling recurrence."""
    validate_n(n)
    return stirling2(n, 4)


@dataclass(frozen=True)
class FCurve:
    """A partition of {1..n} into 4 nonempty blocks, as bit masks.

    Blocks are kept in canonical order, sorted by smallest element, so the
    value depends only on the underlying partition.
    """

    n: int
    blocks: tuple[int, int, int, int]

    def __post_init__(self):
        validate_n(self.n)
        blocks = self.blocks
        if len(blocks) != 4:
            raise InvalidInputError("an F-curve needs exactly 4 blocks")
        union = 0
        size = 0
        for b in blocks:
            if b == 0:
                raise InvalidInputError("F-curve blocks must be nonempty")
            union |= b
            size += b.bit_count()
        if union != full_mask(self.n) or size != self.n:
            raise InvalidInputError(
                f"blocks must partition 1..{self.n} (disjoint, covering)"
            )
        ordered = tuple(sorted(blocks, key=lambda b: b & -b))
        if ordered != blocks:
            object.__setattr__(self, "blocks", ordered)

    @classmethod
    def from_blocks(cls, n: int, blocks: Iterable[Iterable[int]]) -> "FCurve":
        masks = tuple(mask_from_elements(b, n) for b in blocks)
        if len(masks) != 4:
            raise InvalidInputError("an F-curve needs exactly 4 blocks")
        return cls(n, masks)  # type: ignore[arg-type]

    def block_sizes(self) -> tuple[int, int, int, int]:
        b = self.blocks
        return (b[0].bit_count(), b[1].bit_count(), b[2].bit_count(), b[3].bit_count())

    def __str__(self) -> str:
        return "|".join(format_subset(b) for b in self.blocks)


def parse_fcurve(text: str, n: int) -> FCurve:
    parts = text.split("|")
    if len(parts) != 4:
        raise InvalidInputError(f"an F-curve has 4 blocks, got {len(parts)} in {text!r}")
    return FCurve(n, tuple(parse_subset(p, n) for p in parts))  # type: ignore[arg-type]


_BLOCK_CACHE: dict[int, np.ndarray] = {}


def fcurve_block_arrays(n: int) -> np.ndarray:
    """All 4-block partitions of {1..n} as an (S(n,4), 4) int32 mask array.

    Row order is restricted-growth-string lexicographic: markings are
    assigned in increasing order, trying existing blocks by index before
    opening a new one.  Blocks within a row are ordered by smallest element.
    The array is cached per n and must not be mutated by callers.
    """
    validate_n(n)
    cached = _BLOCK_CACHE.get(n)
    if cached is not None:
        return cached

    flat = array("i")
    append = flat.extend
    blocks = [1, 0, 0, 0]  # marking 1 always opens block 0

    def rec(i: int, used: int) -> None:
        if i == n:
            if used == 4:
                append(blocks)
            return
        remaining = n - i
        need = 4 - used
        if remaining < need:
            return
        bit = 1 << i
        if remaining > need:
            for t in range(used):
                blocks[t] |= bit
                rec(i + 1, used)
                blocks[t] ^= bit
        if used < 4:
            blocks[used] = bit
            rec(i + 1, used + 1)
            blocks[used] = 0

    rec(1, 1)
    arr = np.frombuffer(flat, dtype=np.int32).reshape(-1, 4)
    arr.setflags(write=False)
    _BLOCK_CACHE[n] = arr
    return arr


def enumerate_fcurves(n: int) -> Iterator[FCurve]:
    """Yield every 4-block partition of {1..n} exactly once, in the fixed order.

    A pure, restartable stream; the length equals count_fcurves(n).
    """
    arr = fcurve_block_arrays(n)
    for row in arr:
        yield FCurve(n, (int(row[0]), int(row[1]), int(row[2]), int(row[3])))
