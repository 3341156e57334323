"""Intersection pairing between divisor classes and F-curves.

The pairing of a generator with a 4-block partition is +1 when either side
of the generator is a union of two blocks, -1 when either side is a single
block, and 0 otherwise; psi-type keys inherit the singleton case.  A curve
functional assigns a pairing value to every generator and is admissible
when those values vanish on all pair relations.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .biplane import Biplane
from .divisors import DivisorClass
from .errors import InvalidInputError, MalformedInputError
from .subsets import (
    FCurve,
    canonical_generator,
    fcurve_block_arrays,
    format_subset,
    full_mask,
    is_psi_key,
    parse_subset,
    psi_marking,
    validate_n,
)


@dataclass(frozen=True)
class CurveFunctional:
    """Integer pairing values on all generators of a fixed marking count.

    psi[i-1] is the value on the psi-type key of marking i; boundary maps
    boundary key masks to values (absent means 0).
    """

    n: int
    psi: tuple[int, ...]
    boundary: Mapping[int, int]

    def __post_init__(self):
        validate_n(self.n)
        if len(self.psi) != self.n:
            raise InvalidInputError(f"need {self.n} psi values, got {len(self.psi)}")
        clean = {}
        for mask, v in self.boundary.items():
            if is_psi_key(mask, self.n) or not 1 <= mask < (1 << (self.n - 1)):
                raise InvalidInputError(
                    f"{format_subset(mask)} is not a boundary key for n={self.n}"
                )
            if v:
                clean[mask] = v
        object.__setattr__(self, "boundary", clean)

    def value(self, mask: int) -> int:
        """Value on the generator with canonical key `mask`."""
        if is_psi_key(mask, self.n):
            return self.psi[psi_marking(mask, self.n) - 1]
        return self.boundary.get(mask, 0)

    def boundary_min(self) -> int:
        """Minimum value over all boundary keys (absent keys count as 0)."""
        n_boundary = (1 << (self.n - 1)) - 1 - self.n
        lowest = min(self.boundary.values(), default=0)
        if len(self.boundary) < n_boundary:
            lowest = min(lowest, 0)
        return lowest

    def dense_table(self) -> np.ndarray:
        table = np.zeros(1 << (self.n - 1), dtype=np.int64)
        for mask, v in self.boundary.items():
            table[mask] = v
        for i in range(1, self.n):
            table[1 << (i - 1)] = self.psi[i - 1]
        table[full_mask(self.n - 1)] = self.psi[self.n - 1]
        return table


def pair_generator_fcurve(mask: int, curve: FCurve) -> int:
    """Pairing of a single generator with an F-curve: one of -1, 0, +1."""
    n = curve.n
    key = canonical_generator(mask, n)
    other = key ^ full_mask(n)
    b0, b1, b2, b3 = curve.blocks
    if key in (b0, b1, b2, b3) or other in (b0, b1, b2, b3):
        return -1
    unions = (b0 | b1, b0 | b2, b0 | b3)
    if key in unions or other in unions:
        return 1
    return 0


def pair_divisor_fcurve(d: DivisorClass, curve: FCurve) -> int:
    """Pairing of a divisor class with an F-curve, in 7 key lookups:
    the three two-block unions count positively, the four blocks negatively."""
    if d.n != curve.n:
        raise InvalidInputError(f"marking counts differ: {d.n} vs {curve.n}")
    half = 1 << (d.n - 1)
    full = full_mask(d.n)
    coeffs = d.coeffs
    b0, b1, b2, b3 = curve.blocks

    def at(m: int) -> int:
        return coeffs.get(m if m < half else m ^ full, 0)

    return (
        at(b0 | b1) + at(b0 | b2) + at(b0 | b3) - at(b0) - at(b1) - at(b2) - at(b3)
    )


def pair_divisor_functional(d: DivisorClass, f: CurveFunctional) -> int:
    """Sum of divisor coefficients times functional values over all keys."""
    if d.n != f.n:
        raise InvalidInputError(f"marking counts differ: {d.n} vs {f.n}")
    return sum(c * f.value(mask) for mask, c in d.coeffs.items())


def biplane_curve_functional(bp: Biplane) -> CurveFunctional:
    """The curve functional attached to the biplane at 12 markings: value 1
    on the eleven block keys, 0 on other boundary keys, -3 on the psi keys
    of markings 1..11 and -2 at marking 12."""
    psi = tuple([-3] * 11 + [-2])
    return CurveFunctional(12, psi, {b: 1 for b in bp.blocks})


def fcurve_functional(curve: FCurve) -> CurveFunctional:
    """The pairing row of a single F-curve, as a curve functional."""
    n = curve.n
    psi = [0] * n
    boundary: dict[int, int] = {}
    half = 1 << (n - 1)
    full = full_mask(n)
    b0, b1, b2, b3 = curve.blocks
    for b in curve.blocks:
        key = b if b < half else b ^ full
        if is_psi_key(key, n):
            psi[psi_marking(key, n) - 1] -= 1
        else:
            boundary[key] = boundary.get(key, 0) - 1
    for u in (b0 | b1, b0 | b2, b0 | b3):
        key = u if u < half else u ^ full
        boundary[key] = boundary.get(key, 0) + 1
    return CurveFunctional(n, tuple(psi), boundary)


@dataclass(frozen=True)
class RelationCheck:
    """Outcome of testing a functional against every pair relation."""

    ok: bool
    first_violation: Optional[tuple[int, int]] = None
    violation_value: Optional[int] = None


def check_relations(f: CurveFunctional) -> RelationCheck:
    """Sum the functional over each pair relation; all sums must vanish."""
    n = f.n
    full = full_mask(n)
    table = f.dense_table()
    half = 1 << (n - 1)
    for i in range(1, n + 1):
        bi = 1 << (i - 1)
        for j in range(i + 1, n + 1):
            bj = 1 << (j - 1)
            rest = full & ~bi & ~bj
            total = 0
            sub = rest
            while True:
                s = sub | bi
                total += table[s if s < half else s ^ full]
                if sub == 0:
                    break
                sub = (sub - 1) & rest
            if total != 0:
                return RelationCheck(False, (i, j), int(total))
    return RelationCheck(True)


def pushforward_fcurve(curve: FCurve) -> Optional[FCurve]:
    """Push an F-curve down along the map forgetting the last marking.

    Returns None when the last marking forms its own block (the curve is
    contracted); otherwise drops that marking from its block.
    """
    n = curve.n
    last = 1 << (n - 1)
    if last in curve.blocks:
        return None
    blocks = tuple(b & ~last for b in curve.blocks)
    return FCurve(n - 1, blocks)  # type: ignore[arg-type]


def _canon_cols(masks: np.ndarray, half: int, full: int) -> np.ndarray:
    return np.where(masks < half, masks, masks ^ full)


def _pair_chunk(table: np.ndarray, chunk: np.ndarray, half: int, full: int) -> np.ndarray:
    b0, b1, b2, b3 = chunk[:, 0], chunk[:, 1], chunk[:, 2], chunk[:, 3]
    return (
        table[_canon_cols(b0 | b1, half, full)]
        + table[_canon_cols(b0 | b2, half, full)]
        + table[_canon_cols(b0 | b3, half, full)]
        - table[_canon_cols(b0, half, full)]
        - table[_canon_cols(b1, half, full)]
        - table[_canon_cols(b2, half, full)]
        - table[_canon_cols(b3, half, full)]
    )


def pairing_values(
    d: DivisorClass,
    blocks: Optional[np.ndarray] = None,
    threads: int = 1,
) -> np.ndarray:
    """Pairings of a divisor with every F-curve, in enumeration order.

    The scan partitions the curve stream into fixed chunks and combines
    them in order, so the result is independent of the thread count.
    """
    if blocks is None:
        blocks = fcurve_block_arrays(d.n)
    table = d.dense_table()
    half = 1 << (d.n - 1)
    full = full_mask(d.n)
    if threads <= 1 or len(blocks) < 2 * threads:
        return _pair_chunk(table, blocks, half, full)
    chunks = np.array_split(blocks, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda ch: _pair_chunk(table, ch, half, full), chunks))
    return np.concatenate(parts)


def functional_to_json_dict(f: CurveFunctional) -> dict:
    return {
        "n": f.n,
        "psi": list(f.psi),
        "boundary": [
            {"subset": format_subset(mask), "value": f.boundary[mask]}
            for mask in sorted(f.boundary)
        ],
    }


def functional_from_json_dict(obj: dict) -> CurveFunctional:
    try:
        n = int(obj["n"])
        psi = tuple(int(v) for v in obj["psi"])
        boundary = {
            parse_subset(t["subset"], n): int(t["value"]) for t in obj["boundary"]
        }
        return CurveFunctional(n, psi, boundary)
    except InvalidInputError as exc:
        raise MalformedInputError(str(exc)) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError(f"bad functional object: {exc!r}") from None


def load_functional(path: str) -> CurveFunctional:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedInputError(f"bad JSON in {path}: {exc}") from None
    return functional_from_json_dict(obj)
