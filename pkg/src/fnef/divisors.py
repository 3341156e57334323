"""Divisor classes on the moduli space of stable n-pointed rational curves.

A divisor class is a sparse integer combination of the canonical generator
keys from :mod:`fnef.subsets`.  The pair relations (one per marking pair)
span the kernel of the map to numerical classes; reduction against their
row-reduced form yields canonical coordinates, so two classes are
numerically equivalent iff their reductions agree.  All arithmetic is
exact: integer rows with per-row denominators, rational reductions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import gcd
from typing import Iterable, Mapping

import numpy as np

from .biplane import Biplane
from .errors import (
    BoundaryFormError,
    InvalidInputError,
    MalformedInputError,
)
from .subsets import (
    MAX_MARKINGS,
    all_generator_keys,
    canonical_generator,
    format_subset,
    full_mask,
    is_psi_key,
    parse_subset,
    psi_marking,
    validate_n,
)


@dataclass(frozen=True)
class DivisorClass:
    """Sparse integer coefficients over canonical generator keys."""

    n: int
    coeffs: Mapping[int, int]

    def __post_init__(self):
        validate_n(self.n)
        clean = {}
        limit = 1 << (self.n - 1)
        for mask, c in self.coeffs.items():
            if not 1 <= mask < limit:
                raise InvalidInputError(
                    f"mask {mask:#x} is not a canonical key for n={self.n}"
                )
            if c:
                clean[mask] = c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def zero(cls, n: int) -> "DivisorClass":
        return cls(n, {})

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[tuple[int, int]]) -> "DivisorClass":
        """Build from (side mask, coefficient) pairs, canonicalizing sides."""
        acc: dict[int, int] = {}
        for mask, c in terms:
            key = canonical_generator(mask, n)
            acc[key] = acc.get(key, 0) + c
        return cls(n, acc)

    def coeff(self, mask: int) -> int:
        return self.coeffs.get(mask, 0)

    def support_size(self) -> int:
        return len(self.coeffs)

    def psi_part(self) -> dict[int, int]:
        """Coefficients on psi-type keys, indexed by marking number."""
        return {
            psi_marking(m, self.n): c
            for m, c in self.coeffs.items()
            if is_psi_key(m, self.n)
        }

    def is_boundary_only(self) -> bool:
        return not any(is_psi_key(m, self.n) for m in self.coeffs)

    def dense_table(self) -> np.ndarray:
        """Coefficients as an int64 array indexed by canonical key mask."""
        table = np.zeros(1 << (self.n - 1), dtype=np.int64)
        for mask, c in self.coeffs.items():
            table[mask] = c
        return table

    def _check_same_n(self, other: "DivisorClass") -> None:
        if self.n != other.n:
            raise InvalidInputError(f"marking counts differ: {self.n} vs {other.n}")

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        self._check_same_n(other)
        acc = dict(self.coeffs)
        for mask, c in other.coeffs.items():
            acc[mask] = acc.get(mask, 0) + c
        return DivisorClass(self.n, acc)

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return self + (-other)

    def __neg__(self) -> "DivisorClass":
        return DivisorClass(self.n, {m: -c for m, c in self.coeffs.items()})

    def __rmul__(self, scalar: int) -> "DivisorClass":
        if not isinstance(scalar, int):
            return NotImplemented
        return DivisorClass(self.n, {m: scalar * c for m, c in self.coeffs.items()})

    __mul__ = __rmul__


def relation_row(i: int, j: int, n: int) -> DivisorClass:
    """The pair relation for markings i < j: the sum of all generators whose
    key side contains i and omits j (each with coefficient +1)."""
    validate_n(n)
    if i == j:
        raise InvalidInputError("relation needs two distinct markings")
    if not (1 <= i < j <= n):
        raise InvalidInputError(f"need 1 <= i < j <= n, got i={i}, j={j}, n={n}")
    bi = 1 << (i - 1)
    bj = 1 << (j - 1)
    rest = full_mask(n) & ~bi & ~bj
    coeffs: dict[int, int] = {}
    sub = rest
    while True:
        key = canonical_generator(sub | bi, n)
        coeffs[key] = coeffs.get(key, 0) + 1
        if sub == 0:
            break
        sub = (sub - 1) & rest
    return DivisorClass(n, coeffs)


def _normalize_row(row: list[int]) -> None:
    """Divide by the gcd and make the first nonzero entry positive."""
    g = 0
    for x in row:
        if x:
            g = gcd(g, x)
    if g == 0:
        return
    lead = next(x for x in row if x)
    if lead < 0:
        g = -g
    if g != 1:
        for c, x in enumerate(row):
            row[c] = x // g


class RelationSystem:
    """Row-reduced form of the pair relations for a fixed marking count.

    Columns are canonical key masks in ascending order, pivots chosen
    left to right.  Rows are kept as integers with a per-row pivot value,
    so all reductions are exact.
    """

    def __init__(self, n: int):
        validate_n(n)
        self.n = n
        ncols = (1 << (n - 1)) - 1  # column c <-> mask c+1
        rows: list[list[int]] = []
        for i, j in combinations(range(1, n + 1), 2):
            dense = [0] * ncols
            for mask, c in relation_row(i, j, n).coeffs.items():
                dense[mask - 1] = c
            rows.append(dense)

        nrows = len(rows)
        pivot_cols: list[int] = []
        r = 0
        for c in range(ncols):
            pr = next((k for k in range(r, nrows) if rows[k][c]), None)
            if pr is None:
                continue
            rows[r], rows[pr] = rows[pr], rows[r]
            _normalize_row(rows[r])
            piv = rows[r][c]
            for k in range(nrows):
                if k == r or not rows[k][c]:
                    continue
                a = rows[k][c]
                g = gcd(piv, a)
                ms, mo = piv // g, a // g
                rk, rr = rows[k], rows[r]
                rows[k] = [x * ms - y * mo for x, y in zip(rk, rr)]
                _normalize_row(rows[k])
            pivot_cols.append(c)
            r += 1
            if r == nrows:
                break

        self.rank = r
        self.pivot_masks = [c + 1 for c in pivot_cols]
        pivot_set = set(self.pivot_masks)
        self.free_masks = [m for m in all_generator_keys(n) if m not in pivot_set]
        # free_index[mask] = position among free columns, -1 on pivots
        free_index = np.full(1 << (n - 1), -1, dtype=np.int64)
        for pos, m in enumerate(self.free_masks):
            free_index[m] = pos
        self.free_index = free_index
        self.pivot_vals = [rows[k][pivot_cols[k]] for k in range(r)]
        # per pivot row, the sparse (free mask, value) tail
        self.free_entries: list[list[tuple[int, int]]] = []
        for k in range(r):
            row = rows[k]
            pc = pivot_cols[k]
            self.free_entries.append(
                [(c + 1, v) for c, v in enumerate(row) if v and c != pc]
            )

    @property
    def ambient_dim(self) -> int:
        """Dimension of the quotient: generators minus independent relations."""
        return len(self.free_masks)


@lru_cache(maxsize=None)
def relation_system(n: int) -> RelationSystem:
    return RelationSystem(n)


def reduce_canonical(d: DivisorClass) -> dict[int, Fraction]:
    """Canonical coordinates of the class modulo the pair relations.

    Eliminates every pivot key against the row-reduced relations; the
    result maps non-pivot key masks to exact rational coordinates (zeros
    dropped).  Two classes are numerically equivalent iff their reductions
    are equal.
    """
    rs = relation_system(d.n)
    out: dict[int, Fraction] = {}
    for mask, c in d.coeffs.items():
        if rs.free_index[mask] >= 0:
            out[mask] = out.get(mask, Fraction(0)) + Fraction(c)
    for k, pmask in enumerate(rs.pivot_masks):
        delta = d.coeffs.get(pmask, 0)
        if not delta:
            continue
        lam = Fraction(delta, rs.pivot_vals[k])
        for fmask, v in rs.free_entries[k]:
            out[fmask] = out.get(fmask, Fraction(0)) - lam * v
    return {m: v for m, v in out.items() if v}


def canonical_divisor(n: int) -> DivisorClass:
    """The canonical class: -1 on every psi-type key, -2 on every boundary key."""
    validate_n(n)
    return DivisorClass(
        n, {m: (-1 if is_psi_key(m, n) else -2) for m in all_generator_keys(n)}
    )


def _exceptional_key(s_mask: int, n: int = 12) -> int:
    """Canonical key of the blown-up class indexed by a subset of {1..n-1}:
    the partition side s together with the last marking."""
    return canonical_generator(s_mask | (1 << (n - 1)), n)


def symmetric_divisor(n: int = 12) -> DivisorClass:
    """The fully symmetric nef divisor on the 12-marking space.

    Exceptional classes indexed by subsets of {1..11} of size k <= 4 enter
    with coefficient k-5; its degree on an F-curve with block sizes s_i is
    min(min s_i, 6 - max s_i), cut off at 0 once a block has 6 or more
    markings.
    """
    if n != 12:
        raise InvalidInputError("the symmetric divisor is only defined at n=12")
    coeffs: dict[int, int] = {}
    points = range(11)
    for size in range(5):
        for combo in combinations(points, size):
            s_mask = 0
            for p in combo:
                s_mask |= 1 << p
            coeffs[_exceptional_key(s_mask)] = size - 5
    return DivisorClass(12, coeffs)


def biplane_block_star_divisor(bp: Biplane) -> DivisorClass:
    """Sum over biplane blocks of the block divisor plus all of its
    one-marking enlargements (the added marking running over 1..12)."""
    coeffs: dict[int, int] = {}
    for b in bp.blocks:
        coeffs[b] = coeffs.get(b, 0) + 1
        for i in range(12):
            bit = 1 << i
            if b & bit:
                continue
            key = canonical_generator(b | bit, 12)
            coeffs[key] = coeffs.get(key, 0) + 1
    return DivisorClass(12, coeffs)


def biplane_divisor(bp: Biplane) -> DivisorClass:
    """The biplane divisor: the symmetric divisor minus one exceptional
    class for each subset of {1..11} of size 5 or 6 that equals or is
    disjoint from some block."""
    coeffs = dict(symmetric_divisor(12).coeffs)
    blocks = bp.blocks
    points = range(11)
    for size in (5, 6):
        for combo in combinations(points, size):
            s_mask = 0
            for p in combo:
                s_mask |= 1 << p
            if any(s_mask == b or s_mask & b == 0 for b in blocks):
                key = _exceptional_key(s_mask)
                coeffs[key] = coeffs.get(key, 0) - 1
    return DivisorClass(12, coeffs)


def eliminate_psi(d: DivisorClass) -> DivisorClass:
    """A numerically equivalent class supported on boundary keys only.

    Adds rational multiples of the pair relations.  The multiples are
    half-integers z_e = y_e/2 on the edges of the complete marking graph,
    where y is an integer weighting whose degree at marking m is minus
    twice the psi coefficient there; every degree of y is even, so every
    cut sum - the amount added to a key - is an integer and the output
    stays integral.
    """
    n = d.n
    psi = d.psi_part()
    if not psi:
        return d

    target = {m: -2 * psi.get(m, 0) for m in range(1, n + 1)}
    y: dict[tuple[int, int], int] = {}
    for m in range(2, n + 1):
        if target[m]:
            y[(1, m)] = target[m]
    delta = sum(target[m] for m in range(2, n + 1)) - target[1]
    if delta:
        half = delta // 2
        y[(1, 2)] = y.get((1, 2), 0) - half
        y[(1, 3)] = y.get((1, 3), 0) - half
        y[(2, 3)] = y.get((2, 3), 0) + half

    acc: dict[int, Fraction] = {m: Fraction(c) for m, c in d.coeffs.items()}
    full = full_mask(n)
    for (i, j), w in y.items():
        if not w:
            continue
        z = Fraction(w, 2)
        bi, bj = 1 << (i - 1), 1 << (j - 1)
        rest = full & ~bi & ~bj
        sub = rest
        while True:
            key = canonical_generator(sub | bi, n)
            acc[key] = acc.get(key, Fraction(0)) + z
            if sub == 0:
                break
            sub = (sub - 1) & rest

    coeffs: dict[int, int] = {}
    for mask, v in acc.items():
        if not v:
            continue
        if v.denominator != 1:
            raise AssertionError(f"non-integral coefficient {v} at {format_subset(mask)}")
        if is_psi_key(mask, n):
            raise AssertionError(f"psi key {format_subset(mask)} survived elimination")
        coeffs[mask] = int(v)
    return DivisorClass(n, coeffs)


def pullback_forgetful(d: DivisorClass) -> DivisorClass:
    """Pull a boundary-only class back along the map forgetting a new last
    marking: each term splits into the two lifts of its partition, with the
    same coefficient."""
    n = d.n
    if n + 1 > MAX_MARKINGS:
        raise InvalidInputError(f"pullback target {n + 1} exceeds {MAX_MARKINGS} markings")
    if not d.is_boundary_only():
        raise BoundaryFormError(
            "pullback needs boundary form; run eliminate_psi on the class first"
        )
    new_bit = 1 << n
    coeffs: dict[int, int] = {}
    for mask, c in d.coeffs.items():
        coeffs[mask] = coeffs.get(mask, 0) + c
        key2 = canonical_generator(mask | new_bit, n + 1)
        coeffs[key2] = coeffs.get(key2, 0) + c
    return DivisorClass(n + 1, coeffs)


def divisor_to_text(d: DivisorClass) -> str:
    lines = [
        f"{d.coeffs[mask]} {format_subset(mask)}" for mask in sorted(d.coeffs)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def divisor_from_text(text: str, n: int) -> DivisorClass:
    validate_n(n)
    terms: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise MalformedInputError(f"line {lineno}: expected '<coeff> <subset>'")
        try:
            coeff = int(parts[0])
            mask = parse_subset(parts[1], n)
        except InvalidInputError as exc:
            raise MalformedInputError(f"line {lineno}: {exc}") from None
        except ValueError as exc:
            raise MalformedInputError(f"line {lineno}: {exc}") from None
        terms.append((mask, coeff))
    try:
        return DivisorClass.from_terms(n, terms)
    except InvalidInputError as exc:
        raise MalformedInputError(str(exc)) from None


def divisor_to_json_dict(d: DivisorClass) -> dict:
    return {
        "n": d.n,
        "terms": [
            {"coeff": d.coeffs[mask], "subset": format_subset(mask)}
            for mask in sorted(d.coeffs)
        ],
    }


def divisor_from_json_dict(obj: dict) -> DivisorClass:
    try:
        n = int(obj["n"])
        items = obj["terms"]
        terms = [(parse_subset(t["subset"], n), int(t["coeff"])) for t in items]
        return DivisorClass.from_terms(n, terms)
    except InvalidInputError as exc:
        raise MalformedInputError(str(exc)) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError(f"bad divisor object: {exc!r}") from None


def load_divisor(path: str, n: int | None = None) -> DivisorClass:
    """Load a divisor from a JSON or text file (sniffed by leading '{')."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedInputError(f"bad JSON in {path}: {exc}") from None
        d = divisor_from_json_dict(obj)
        if n is not None and d.n != n:
            raise MalformedInputError(
                f"{path} declares n={d.n}, expected n={n}"
            )
        return d
    if n is None:
        raise MalformedInputError(
            f"{path} is in text format, which carries no marking count; pass n"
        )
    return divisor_from_text(text, n)
