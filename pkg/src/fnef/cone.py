"""F-nefness scans, the counterexample verification, and extremality rank.

A divisor is F-nef when it pairs nonnegatively with every 4-block
partition class.  Extremality of an F-nef divisor inside the F-nef cone
is certified by the rank of its zero-pairing curves in reduced
coordinates: modular rank never exceeds rational rank, and the rational
rank is at most ambient-1 because the divisor itself annihilates every
row, so hitting ambient-1 modulo a single prime is already a proof.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .biplane import Biplane
from .divisors import (
    DivisorClass,
    canonical_divisor,
    biplane_divisor,
    pullback_forgetful,
    reduce_canonical,
    relation_system,
)
from .errors import InvalidInputError
from .pairing import (
    CurveFunctional,
    biplane_curve_functional,
    pair_divisor_functional,
    pairing_values,
    _canon_cols,
    _pair_chunk,
)
from .subsets import FCurve, fcurve_block_arrays, full_mask

#: Fixed moduli for extremality certification, both just below 2^31 so all
#: intermediate products fit in int64.
DEFAULT_PRIMES = (2147483629, 2147483647)

_ROW_PATTERN = np.array([1, 1, 1, -1, -1, -1, -1], dtype=np.int64)


@dataclass(frozen=True)
class FNefReport:
    n: int
    min_value: int
    argmin: FCurve
    zero_count: int
    nonnegative: bool


@dataclass(frozen=True)
class CounterexampleReport:
    """The four checks: the divisor is F-nef, the witness functional is
    nonnegative on boundary keys and on the canonical class, and pairs
    negatively with the divisor."""

    fnef: FNefReport
    functional_boundary_min: int
    canonical_pairing: int
    divisor_pairing: int
    verdict: bool


@dataclass(frozen=True)
class BoundaryCertificate:
    """Witness-functional certificate that a divisor class is not an
    effective boundary sum (and, in the stronger variant, not a nonnegative
    multiple of the canonical class plus effective boundary)."""

    boundary_min: int
    pairing: int
    canonical_pairing: int
    certified: bool
    certified_with_canonical: bool


@dataclass(frozen=True)
class ExtremalityReport:
    ambient_dim: int
    zero_set_size: int
    rank_mod_p: dict[int, int]
    certified_extremal: bool


@dataclass(frozen=True)
class ProjectionFormulaReport:
    total: int
    contracted: int
    mismatches: int

    @property
    def ok(self) -> bool:
        return self.mismatches == 0


def _argmin_curve(n: int, blocks: np.ndarray, idx: int) -> FCurve:
    row = blocks[idx]
    return FCurve(n, (int(row[0]), int(row[1]), int(row[2]), int(row[3])))


def fnef_check(d: DivisorClass, threads: int = 1) -> FNefReport:
    """Scan every F-curve once; report the exact minimum pairing, the first
    curve attaining it, and the number of zero pairings."""
    blocks = fcurve_block_arrays(d.n)
    values = pairing_values(d, blocks, threads=threads)
    idx = int(values.argmin())
    mn = int(values[idx])
    return FNefReport(
        n=d.n,
        min_value=mn,
        argmin=_argmin_curve(d.n, blocks, idx),
        zero_count=int(np.count_nonzero(values == 0)),
        nonnegative=mn >= 0,
    )


def verify_counterexample(bp: Biplane, threads: int = 1) -> CounterexampleReport:
    """Run the four-part check on the biplane divisor and its witness
    functional; the verdict requires F-nefness, nonnegative boundary
    values, nonnegative canonical pairing, and a negative divisor pairing."""
    div = biplane_divisor(bp)
    wit = biplane_curve_functional(bp)
    fnef = fnef_check(div, threads=threads)
    boundary_min = wit.boundary_min()
    canonical_pairing = pair_divisor_functional(canonical_divisor(12), wit)
    divisor_pairing = pair_divisor_functional(div, wit)
    verdict = (
        fnef.nonnegative
        and boundary_min >= 0
        and canonical_pairing >= 0
        and divisor_pairing < 0
    )
    return CounterexampleReport(
        fnef=fnef,
        functional_boundary_min=boundary_min,
        canonical_pairing=canonical_pairing,
        divisor_pairing=divisor_pairing,
        verdict=verdict,
    )


def certify_not_boundary(d: DivisorClass, f: CurveFunctional) -> BoundaryCertificate:
    """Certified when f is nonnegative on every boundary key yet pairs
    negatively with d; the stronger variant additionally needs f to pair
    nonnegatively with the canonical class."""
    boundary_min = f.boundary_min()
    pairing = pair_divisor_functional(d, f)
    canonical_pairing = pair_divisor_functional(canonical_divisor(d.n), f)
    certified = boundary_min >= 0 and pairing < 0
    return BoundaryCertificate(
        boundary_min=boundary_min,
        pairing=pairing,
        canonical_pairing=canonical_pairing,
        certified=certified,
        certified_with_canonical=certified and canonical_pairing >= 0,
    )


def _is_probable_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if p % q == 0:
            return p == q
    d = p - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


class ModpEliminator:
    """Incremental Gaussian elimination over a prime field.

    Pivot rows are kept fully reduced (1 at the own pivot, 0 at every other
    pivot column), so clearing an incoming row of all pivot columns is a
    single pass: the subtractions cannot reintroduce a pivot column.  All
    arithmetic stays within int64; the modulus is capped so products fit.
    """

    MAX_MODULUS = 1 << 31

    def __init__(self, ncols: int, p: int):
        if not _is_probable_prime(p):
            raise InvalidInputError(f"modulus {p} is not prime")
        if p > self.MAX_MODULUS:
            raise InvalidInputError(f"modulus {p} exceeds the int64-safe cap 2^31")
        self.ncols = ncols
        self.p = p
        self.rank = 0
        self.rows_seen = 0
        self._rows = np.zeros((ncols, ncols), dtype=np.int64)
        self._pivot_row_of_col = np.full(ncols, -1, dtype=np.int64)
        self._buf = np.zeros(ncols, dtype=np.int64)

    def _insert(self, vec: np.ndarray) -> bool:
        """Store a pivot-cleared row in [0, p); True iff it was nonzero."""
        p = self.p
        nz = np.flatnonzero(vec)
        if nz.size == 0:
            return False
        j = int(nz[0])
        inv = pow(int(vec[j]), -1, p)
        vec *= inv
        vec %= p
        rows = self._rows
        rank = self.rank
        if rank:
            colvals = rows[:rank, j]
            if colvals.any():
                block = rows[:rank]
                block -= np.outer(colvals, vec)
                block %= p
        rows[rank] = vec
        self._pivot_row_of_col[j] = rank
        self.rank = rank + 1
        return True

    def _add_sparse(self, cols, vals) -> bool:
        p = self.p
        buf = self._buf
        buf[:] = 0
        cols = np.asarray(cols, dtype=np.int64)
        buf[cols] = np.asarray(vals, dtype=np.int64) % p
        pivot_of = self._pivot_row_of_col
        rows = self._rows
        for c in cols:
            r = pivot_of[c]
            if r >= 0:
                f = buf[c]
                if f:
                    buf -= f * rows[r]
                    buf %= p
        return self._insert(buf)

    def add_row(self, cols: Sequence[int], vals: Sequence[int]) -> bool:
        """Reduce one sparse row (distinct columns); True iff rank grew."""
        self.rows_seen += 1
        return self._add_sparse(cols, vals)

    def add_pattern_rows(
        self,
        col_rows: np.ndarray,
        pattern: np.ndarray,
        batch: int = 2048,
        stop_rank: Optional[int] = None,
    ) -> int:
        """Feed many sparse rows sharing one value pattern.

        Each batch is cleared against the pivots known at its start in a few
        vectorized gathers; rows that reduce to zero there are dependent and
        dropped, the rest are re-fed through the sparse single-row path
        (which also accounts for pivots added mid-batch).  The resulting
        rank is exactly that of the full row set whenever `stop_rank` is a
        proven upper bound for it (the column count always is).
        """
        p = self.p
        ncols = self.ncols
        cap = ncols if stop_rank is None else min(stop_rank, ncols)
        if self.rank >= cap:
            return self.rank
        rows = self._rows
        pivot_of = self._pivot_row_of_col
        width = col_rows.shape[1]
        dense = np.zeros((min(batch, len(col_rows)), ncols), dtype=np.int64)
        for start in range(0, len(col_rows), batch):
            chunk = np.asarray(col_rows[start : start + batch], dtype=np.int64)
            m = len(chunk)
            self.rows_seen += m
            dense[:m] = 0
            row_idx = np.arange(m)
            for k in range(width):
                cols_k = chunk[:, k]
                valid = np.flatnonzero(cols_k >= 0)
                dense[row_idx[valid], cols_k[valid]] += pattern[k]
            if self.rank:
                # raw entries are tiny, so |entry| <= 1 + width*(p-1) fits int64
                for k in range(width):
                    cols_k = chunk[:, k]
                    valid = np.flatnonzero(cols_k >= 0)
                    pr = pivot_of[cols_k[valid]]
                    hit = pr >= 0
                    targets = valid[hit]
                    if targets.size:
                        dense[targets] -= pattern[k] * rows[pr[hit]]
                dense[:m] %= p
            for i in np.flatnonzero(dense[:m].any(axis=1)):
                row = chunk[i]
                sel = row >= 0
                self._add_sparse(row[sel], pattern[sel])
                if self.rank >= cap:
                    return self.rank
        return self.rank


def _free_col_rows(blocks: np.ndarray, free_index: np.ndarray, n: int) -> np.ndarray:
    """Per curve, the reduced-coordinate column of each of its 7 pairing
    keys (-1 where the key is a pivot and the entry is dropped)."""
    half = 1 << (n - 1)
    full = full_mask(n)
    b0, b1, b2, b3 = blocks[:, 0], blocks[:, 1], blocks[:, 2], blocks[:, 3]
    keys = [
        _canon_cols(b0 | b1, half, full),
        _canon_cols(b0 | b2, half, full),
        _canon_cols(b0 | b3, half, full),
        _canon_cols(b0, half, full),
        _canon_cols(b1, half, full),
        _canon_cols(b2, half, full),
        _canon_cols(b3, half, full),
    ]
    return np.stack([free_index[k] for k in keys], axis=1)


#: Fixed seed for the row feed order.  Rank does not depend on row order,
#: but a decorrelated order saturates the pivot basis far sooner than the
#: enumeration order, whose neighboring partitions share most blocks.
_FEED_SEED = 0x5E7C0DE


def _feed_order(nrows: int) -> np.ndarray:
    return np.random.default_rng(_FEED_SEED).permutation(nrows)


def _feed_rows(
    elim: ModpEliminator, col_rows: np.ndarray, stop_rank: Optional[int] = None
) -> int:
    """Feed curve rows into the eliminator in the fixed decorrelated order;
    stops once the rank hits its proven cap."""
    return elim.add_pattern_rows(
        col_rows[_feed_order(len(col_rows))], _ROW_PATTERN, stop_rank=stop_rank
    )


def extremality_rank(
    d: DivisorClass,
    primes: Iterable[int] = DEFAULT_PRIMES,
    threads: int = 1,
) -> ExtremalityReport:
    """Rank certificate for extremality of an F-nef divisor.

    Collects every curve pairing to zero, maps each to its reduced
    coordinate row, and computes the modular rank per prime; reaching
    ambient-1 for any prime certifies the extremal ray.
    """
    blocks = fcurve_block_arrays(d.n)
    values = pairing_values(d, blocks, threads=threads)
    if int(values.min()) < 0:
        raise InvalidInputError(
            "divisor is not F-nef; extremality needs a member of the cone"
        )
    rs = relation_system(d.n)
    zero_blocks = blocks[values == 0]
    col_rows = _free_col_rows(zero_blocks, rs.free_index, d.n)

    # Every zero row is an integer vector orthogonal to the reduced
    # coordinates of d, so when those are nonzero the rational rank is at
    # most ambient-1 and the modular rank (never larger) may stop there
    # exactly.  Assert the orthogonality on a sample of rows.
    reduced = reduce_canonical(d)
    stop_rank = None
    if reduced:
        by_pos = {int(rs.free_index[m]): v for m, v in reduced.items()}
        for row in col_rows[:: max(1, len(col_rows) // 8)]:
            dot = sum(
                int(v) * by_pos.get(int(c), 0)
                for c, v in zip(row, _ROW_PATTERN)
                if c >= 0
            )
            if dot != 0:
                raise AssertionError("zero-pairing row not orthogonal to the class")
        stop_rank = rs.ambient_dim - 1

    ranks: dict[int, int] = {}
    for p in primes:
        elim = ModpEliminator(rs.ambient_dim, p)
        ranks[int(p)] = _feed_rows(elim, col_rows, stop_rank=stop_rank)
    certified = any(r == rs.ambient_dim - 1 for r in ranks.values())
    return ExtremalityReport(
        ambient_dim=rs.ambient_dim,
        zero_set_size=int(len(zero_blocks)),
        rank_mod_p=ranks,
        certified_extremal=certified,
    )


def fcurve_matrix_rank_modp(n: int, p: int) -> int:
    """Rank over F_p of the full pairing matrix (all curves x free keys)."""
    rs = relation_system(n)
    blocks = fcurve_block_arrays(n)
    col_rows = _free_col_rows(blocks, rs.free_index, n)
    elim = ModpEliminator(rs.ambient_dim, p)
    return _feed_rows(elim, col_rows)


def rank_exact(rows: Iterable[Sequence], ncols: int) -> int:
    """Rank over the rationals by dense fraction-valued elimination.

    Intended for small cross-check instances; rows are any integer or
    Fraction sequences of length ncols.
    """
    mat = [[Fraction(x) for x in row] for row in rows]
    rank = 0
    for c in range(ncols):
        pr = next((r for r in range(rank, len(mat)) if mat[r][c]), None)
        if pr is None:
            continue
        mat[rank], mat[pr] = mat[pr], mat[rank]
        piv = mat[rank][c]
        prow = [x / piv for x in mat[rank]]
        mat[rank] = prow
        for r in range(len(mat)):
            if r != rank and mat[r][c]:
                f = mat[r][c]
                mat[r] = [x - f * y for x, y in zip(mat[r], prow)]
        rank += 1
        if rank == len(mat):
            break
    return rank


def fcurve_matrix_rank_exact(n: int) -> int:
    """Exact rational rank of the full pairing matrix; small n only."""
    if n > 7:
        raise InvalidInputError("exact rank oracle is limited to n <= 7")
    rs = relation_system(n)
    blocks = fcurve_block_arrays(n)
    col_rows = _free_col_rows(blocks, rs.free_index, n)
    dense = []
    for row in col_rows:
        vec = [0] * rs.ambient_dim
        for c, v in zip(row, _ROW_PATTERN):
            if c >= 0:
                vec[int(c)] += int(v)
        dense.append(vec)
    return rank_exact(dense, rs.ambient_dim)


def zero_set_dense_rows(d: DivisorClass) -> list[list[int]]:
    """Reduced-coordinate rows of all zero-pairing curves, densely; the
    exact-arithmetic counterpart of the modular path, for small n."""
    if d.n > 7:
        raise InvalidInputError("dense zero-set rows are limited to n <= 7")
    rs = relation_system(d.n)
    blocks = fcurve_block_arrays(d.n)
    values = pairing_values(d, blocks)
    col_rows = _free_col_rows(blocks[values == 0], rs.free_index, d.n)
    dense = []
    for row in col_rows:
        vec = [0] * rs.ambient_dim
        for c, v in zip(row, _ROW_PATTERN):
            if c >= 0:
                vec[int(c)] += int(v)
        dense.append(vec)
    return dense


def projection_formula_report(
    d: DivisorClass,
    samples: Optional[int] = None,
    seed: int = 20260810,
) -> ProjectionFormulaReport:
    """Compare pairings of the pulled-back class at n+1 with pairings of the
    class against pushed-forward curves (contracted curves must pair 0).

    With samples=None the check is exhaustive over all curves at n+1;
    otherwise that many random 4-block partitions are drawn.
    """
    n = d.n
    lifted = pullback_forgetful(d)
    m = n + 1
    if samples is None:
        up_blocks = np.asarray(fcurve_block_arrays(m), dtype=np.int64)
    else:
        rng = np.random.default_rng(seed)
        need = samples
        rows = []
        bits = (1 << np.arange(m, dtype=np.int64))[None, :]
        while need > 0:
            labels = rng.integers(0, 4, size=(int(need * 1.25) + 16, m))
            masks = np.stack(
                [((labels == k) * bits).sum(axis=1) for k in range(4)], axis=1
            )
            good = masks.all(axis=1)
            rows.append(masks[good])
            need = samples - sum(len(r) for r in rows)
        up_blocks = np.concatenate(rows)[:samples]

    half_m, full_m = 1 << (m - 1), full_mask(m)
    lhs = _pair_chunk(lifted.dense_table(), up_blocks, half_m, full_m)

    last = 1 << n
    contracted = (up_blocks == last).any(axis=1)
    down_blocks = (up_blocks & ~last)[~contracted]
    half_n, full_n = 1 << (n - 1), full_mask(n)
    rhs = _pair_chunk(d.dense_table(), down_blocks, half_n, full_n)

    mismatches = int(np.count_nonzero(lhs[contracted] != 0)) + int(
        np.count_nonzero(lhs[~contracted] != rhs)
    )
    return ProjectionFormulaReport(
        total=int(len(up_blocks)),
        contracted=int(np.count_nonzero(contracted)),
        mismatches=mismatches,
    )
