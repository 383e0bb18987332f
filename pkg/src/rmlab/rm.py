"""Reed-Muller generator matrices built from disjunctive normal forms.

The order-r length-2^m construction concatenates one block per size-r
subset S = {s_1 < ... < s_r} of the m Boolean variables; a block's 2^r
columns are the indicator vectors of the conjunctions picking each of the
2^r sign patterns on S.  Conventions, fixed once here and relied on
everywhere else:

- row index i in [0, 2^m) encodes the evaluation point (v_1, ..., v_m)
  with v_1 the most significant bit of i;
- blocks appear in lexicographic subset order;
- within a block, column j in [0, 2^r) is a literal mask with s_1 on the
  most significant bit; mask bit 1 selects the bare literal v, bit 0 the
  complemented literal 1 + v.

Columns of a block have disjoint supports of size 2^(m-r) and sum to the
all-ones vector; the matrix of all t = C(m, r) blocks has rank
sum_{i<=r} C(m, i).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import _kernels, gf2
from .errors import ConfigError, GuardExceeded

__all__ = [
    "RmParams",
    "DnfSpec",
    "RmMatrix",
    "Prop1Row",
    "eval_dnf",
    "build_full_rm_matrix",
    "trim_to_full_rank",
    "minimal_order_for_rate",
    "proposition1_table",
    "monomial_generator_matrix",
    "weight_enumerator",
    "macwilliams_transform",
    "null_space_weight_enumerator",
]

# Row-space enumerations beyond this dimension refuse to run; see
# weight_enumerator for the alternatives suggested in the error.
ENUM_GUARD_BITS = 24


@dataclass(frozen=True)
class RmParams:
    """Order/length parameters of a Reed-Muller code."""

    m: int
    r: int

    def __post_init__(self) -> None:
        if not 0 <= self.r <= self.m:
            raise ConfigError(f"order r={self.r} outside [0, m={self.m}]")

    @property
    def n(self) -> int:
        return 1 << self.m

    @property
    def t(self) -> int:
        return math.comb(self.m, self.r)

    @property
    def dim(self) -> int:
        return sum(math.comb(self.m, i) for i in range(self.r + 1))

    @property
    def d_min(self) -> int:
        return 1 << (self.m - self.r)


@dataclass(frozen=True)
class DnfSpec:
    """One conjunction column: variable subset (1-based, ascending) plus a
    literal mask whose most significant bit belongs to the smallest
    variable; mask bit 1 means the bare literal, 0 the complemented one."""

    subset: tuple[int, ...]
    mask: int

    def __post_init__(self) -> None:
        if list(self.subset) != sorted(set(self.subset)):
            raise ConfigError(f"subset {self.subset} not strictly ascending")
        if not 0 <= self.mask < (1 << len(self.subset)):
            raise ConfigError(f"mask {self.mask} too wide for subset {self.subset}")


@dataclass(frozen=True)
class RmMatrix:
    """A block generator matrix together with its construction metadata.

    block_sizes holds the realized number of columns per subset block (all
    2^r for the full construction, possibly smaller after trimming);
    column_specs gives each column's conjunction in column order.
    """

    params: RmParams
    matrix: gf2.BitMatrix
    block_sizes: tuple[int, ...]
    column_specs: tuple[DnfSpec, ...]

    @property
    def n(self) -> int:
        return self.matrix.rows

    @property
    def l(self) -> int:
        return self.matrix.cols


class Prop1Row(NamedTuple):
    m: int
    r: int
    m_minus_r: int
    d_min: int


def eval_dnf(spec: DnfSpec, m: int) -> gf2.BitVec:
    """Evaluate a conjunction at all 2^m points, as a column of bits."""
    if spec.subset and spec.subset[-1] > m:
        raise ConfigError(f"subset {spec.subset} references a variable beyond m={m}")
    points = np.arange(1 << m)
    col = np.ones(1 << m, dtype=np.uint8)
    width = len(spec.subset)
    for idx, var in enumerate(spec.subset):
        value = ((points >> (m - var)) & 1).astype(np.uint8)
        want = (spec.mask >> (width - 1 - idx)) & 1
        col &= value ^ (1 - want)
    return gf2.BitVec.from_bits(col)


def _all_specs(m: int, r: int) -> list[DnfSpec]:
    specs = []
    for subset in itertools.combinations(range(1, m + 1), r):
        for mask in range(1 << r):
            specs.append(DnfSpec(subset, mask))
    return specs


def build_full_rm_matrix(m: int, r: int) -> RmMatrix:
    """The full t * 2^r-column block construction for order r, length 2^m."""
    params = RmParams(m, r)
    specs = _all_specs(m, r)
    cols = np.stack([eval_dnf(s, m).bits() for s in specs], axis=1)
    return RmMatrix(
        params=params,
        matrix=gf2.BitMatrix.from_bits(cols),
        block_sizes=(1 << r,) * params.t,
        column_specs=tuple(specs),
    )


def trim_to_full_rank(full: RmMatrix, l_target: int | None = None, rng=None) -> RmMatrix:
    """Keep l_target columns forming a full-rank submatrix.

    All of block 1 is kept first; remaining blocks are visited in an
    rng-shuffled order (mask order within each block) and a column is kept
    exactly when it raises the rank.  Deterministic given the rng state.
    The result's block_sizes records the realized profile, whose first
    entry is 2^r whenever l_target allows it.
    """
    params = full.params
    dim = gf2.rank(full.matrix)
    if l_target is None:
        l_target = dim
    if not 1 <= l_target <= dim:
        raise ConfigError(f"l_target={l_target} outside [1, rank={dim}]")
    if rng is None:
        rng = np.random.default_rng(0)

    bits = full.matrix.bits()
    block = 1 << params.r

    # Incremental column echelon: reduced[j] is a reduced column with its
    # pivot row, so a candidate is independent iff it reduces to nonzero.
    pivots: list[tuple[int, np.ndarray]] = []

    def try_add(col: np.ndarray) -> bool:
        c = col.copy()
        for p, vec in pivots:
            if c[p]:
                c ^= vec
        nz = np.nonzero(c)[0]
        if nz.size == 0:
            return False
        pivots.append((int(nz[0]), c))
        return True

    kept: list[int] = []
    for j in range(min(block, l_target)):
        if not try_add(bits[:, j]):
            raise AssertionError("first block columns must be independent")
        kept.append(j)
    order = 1 + rng.permutation(params.t - 1) if params.t > 1 else np.zeros(0, np.intp)
    for b in order:
        if len(kept) == l_target:
            break
        for j in range(block * int(b), block * (int(b) + 1)):
            if len(kept) == l_target:
                break
            if try_add(bits[:, j]):
                kept.append(j)
    if len(kept) != l_target:
        raise AssertionError("could not reach the requested rank")

    kept.sort()
    sizes = [0] * params.t
    for j in kept:
        sizes[j // block] += 1
    return RmMatrix(
        params=params,
        matrix=gf2.BitMatrix.from_bits(bits[:, kept]),
        block_sizes=tuple(sizes),
        column_specs=tuple(full.column_specs[j] for j in kept),
    )


def minimal_order_for_rate(m: int, rate: float) -> int:
    """Smallest r whose dimension sum_{i<=r} C(m, i) reaches ceil(rate * 2^m)."""
    if not 0 < rate <= 1:
        raise ConfigError(f"rate {rate} outside (0, 1]")
    target = math.ceil(rate * (1 << m) - 1e-12)
    total = 0
    for r in range(m + 1):
        total += math.comb(m, r)
        if total >= target:
            return r
    raise AssertionError("unreachable: full order always suffices")


def proposition1_table(rate: float, m_list: list[int]) -> list[Prop1Row]:
    """Minimal order, order gap, and minimum distance per m at a fixed rate.

    The m - r gap grows without bound as m grows, so the minimum distance
    2^(m-r) does too: fixed-rate codes from this family get further apart
    as the block length increases.
    """
    rows = []
    for m in m_list:
        r = minimal_order_for_rate(m, rate)
        rows.append(Prop1Row(m=m, r=r, m_minus_r=m - r, d_min=1 << (m - r)))
    return rows


def monomial_generator_matrix(m: int, r: int) -> gf2.BitMatrix:
    """Classical monomial basis: rows evaluate products of up to r bare
    variables, degree ascending, lexicographic subsets within a degree."""
    RmParams(m, r)
    rows = []
    for d in range(r + 1):
        for subset in itertools.combinations(range(1, m + 1), d):
            rows.append(eval_dnf(DnfSpec(subset, (1 << d) - 1), m).bits())
    return gf2.BitMatrix.from_bits(np.stack(rows))


def weight_enumerator(g: gf2.BitMatrix, guard_bits: int = ENUM_GUARD_BITS) -> np.ndarray:
    """Weight distribution (A_0, ..., A_n) of the row space of g.

    Enumerates all 2^rank span members, so rank is guarded; beyond the
    guard use null_space_weight_enumerator's dual transform or Monte Carlo
    sampling instead.
    """
    basis = gf2.row_basis(g)
    if basis.rows > guard_bits:
        raise GuardExceeded(
            f"row-space enumeration needs 2^{basis.rows} words (guard 2^{guard_bits}); "
            "use the MacWilliams dual path or Monte Carlo estimation"
        )
    offset = np.zeros((g.cols + 7) // 8, dtype=np.uint8)
    return _kernels.weight_histogram(basis.buf, g.cols, offset)


def macwilliams_transform(dual_weights: np.ndarray, n: int, dual_dim: int) -> np.ndarray:
    """Weights of a code from its dual's, exactly in integer arithmetic.

    A_w = 2^(-dual_dim) * sum_j B_j * [y^w] (1+y)^(n-j) (1-y)^j.
    """
    acc = [0] * (n + 1)
    for j in range(n + 1):
        bj = int(dual_weights[j])
        if bj == 0:
            continue
        poly = [0] * (n + 1)
        for s in range(j + 1):
            c2 = (-1 if s & 1 else 1) * math.comb(j, s)
            for q in range(n - j + 1):
                poly[s + q] += c2 * math.comb(n - j, q)
        for w in range(n + 1):
            acc[w] += bj * poly[w]
    out = []
    for w, v in enumerate(acc):
        q, rem = divmod(v, 1 << dual_dim)
        if rem:
            raise AssertionError(f"transform not integral at weight {w}")
        out.append(q)
    return np.array(out, dtype=np.int64)


def null_space_weight_enumerator(
    g: gf2.BitMatrix, guard_bits: int = ENUM_GUARD_BITS
) -> np.ndarray:
    """Weight distribution of the left null space {u : u @ g == 0}.

    Enumerates directly when the null-space dimension fits the guard,
    otherwise applies the MacWilliams transform to the column-space
    enumeration (dimension rank); fails only when both exceed the guard.
    """
    r = gf2.rank(g)
    k = g.rows - r
    if k <= guard_bits:
        basis = gf2.null_space_basis(g)
        if k == 0:
            hist = np.zeros(g.rows + 1, dtype=np.int64)
            hist[0] = 1
            return hist
        return _kernels.weight_histogram(
            basis.buf, g.rows, np.zeros(basis.buf.shape[1], dtype=np.uint8)
        )
    if r <= guard_bits:
        dual = weight_enumerator(g.transpose(), guard_bits)
        return macwilliams_transform(dual, g.rows, r)
    raise GuardExceeded(
        f"null space dimension {k} and rank {r} both exceed the 2^{guard_bits} "
        "enumeration guard; use Monte Carlo estimation"
    )


def exact_fraction_weights(weights: np.ndarray) -> list[Fraction]:
    """Normalized weight distribution as exact fractions (sums to 1)."""
    total = int(weights.sum())
    return [Fraction(int(a), total) for a in weights]
