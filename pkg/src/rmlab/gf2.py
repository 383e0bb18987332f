"""Packed GF(2) vectors, matrices, and exact linear algebra.

Bits pack MSB-first into uint8 words (np.packbits layout): position j of a
row lives in byte j >> 3 at bit 7 - (j & 7), and padding bits past the
logical width are zero.  With that invariant, comparing packed buffers as
byte strings orders vectors bit-lexicographically, which is how ties pick
their canonical representative.

All values are immutable after construction.  Row reduction uses full
(above and below) elimination with deterministic pivoting: leftmost
unfinished column, first available row.
"""
from __future__ import annotations

import numpy as np

from . import _kernels

__all__ = [
    "BitVec",
    "BitMatrix",
    "PermutationMap",
    "vec_mat_mul",
    "rank",
    "row_basis",
    "null_space_basis",
    "solve_particular",
    "random_permutation",
    "apply_permutation",
]


def _nbytes(n: int) -> int:
    return (n + 7) >> 3


def _lock(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class BitVec:
    """Immutable GF(2) row vector."""

    __slots__ = ("n", "buf")

    def __init__(self, n: int, buf: np.ndarray):
        if buf.shape != (_nbytes(n),):
            raise ValueError(f"packed buffer has {buf.shape[0]} bytes, need {_nbytes(n)}")
        self.n = n
        self.buf = _lock(np.array(buf, dtype=np.uint8))

    @classmethod
    def from_bits(cls, bits) -> "BitVec":
        arr = np.asarray(bits, dtype=np.uint8) & 1
        if arr.ndim != 1:
            raise ValueError("expected a 1-d bit sequence")
        return cls(arr.size, np.packbits(arr))

    @classmethod
    def from01(cls, text: str) -> "BitVec":
        return cls.from_bits([int(ch) for ch in text])

    @classmethod
    def zeros(cls, n: int) -> "BitVec":
        return cls(n, np.zeros(_nbytes(n), dtype=np.uint8))

    def bits(self) -> np.ndarray:
        return np.unpackbits(self.buf, count=self.n)

    def to01(self) -> str:
        return "".join("1" if b else "0" for b in self.bits())

    def weight(self) -> int:
        return int(np.bitwise_count(self.buf).sum())

    def is_zero(self) -> bool:
        return not self.buf.any()

    def lex_key(self) -> bytes:
        """Byte key whose ordering equals bit-tuple lexicographic order."""
        return self.buf.tobytes()

    def __xor__(self, other: "BitVec") -> "BitVec":
        if self.n != other.n:
            raise ValueError("length mismatch")
        return BitVec(self.n, self.buf ^ other.buf)

    def __getitem__(self, j: int) -> int:
        if not 0 <= j < self.n:
            raise IndexError(j)
        return (int(self.buf[j >> 3]) >> (7 - (j & 7))) & 1

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BitVec)
            and self.n == other.n
            and self.buf.tobytes() == other.buf.tobytes()
        )

    def __hash__(self) -> int:
        return hash((self.n, self.buf.tobytes()))

    def __repr__(self) -> str:
        return f"BitVec({self.to01()!r})"


class BitMatrix:
    """Immutable GF(2) matrix stored as packed rows."""

    __slots__ = ("rows", "cols", "buf", "_cache")

    def __init__(self, rows: int, cols: int, buf: np.ndarray):
        if buf.shape != (rows, _nbytes(cols)):
            raise ValueError(f"packed buffer shape {buf.shape} != {(rows, _nbytes(cols))}")
        self.rows = rows
        self.cols = cols
        self.buf = _lock(np.array(buf, dtype=np.uint8))
        self._cache: dict = {}

    @classmethod
    def from_bits(cls, bits) -> "BitMatrix":
        arr = np.asarray(bits, dtype=np.uint8) & 1
        if arr.ndim != 2:
            raise ValueError("expected a 2-d bit array")
        return cls(arr.shape[0], arr.shape[1], np.packbits(arr, axis=1))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, np.zeros((rows, _nbytes(cols)), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_bits(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_rows(cls, rows: list) -> "BitMatrix":
        if not rows:
            raise ValueError("need at least one row")
        n = rows[0].n
        if any(r.n != n for r in rows):
            raise ValueError("rows have mixed lengths")
        return cls(len(rows), n, np.stack([r.buf for r in rows]))

    def bits(self) -> np.ndarray:
        return np.unpackbits(self.buf, axis=1, count=self.cols)

    def row(self, i: int) -> BitVec:
        return BitVec(self.cols, self.buf[i])

    def row_list(self) -> list:
        return [self.row(i) for i in range(self.rows)]

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_bits(self.bits().T)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BitMatrix)
            and (self.rows, self.cols) == (other.rows, other.cols)
            and self.buf.tobytes() == other.buf.tobytes()
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.buf.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


class PermutationMap:
    """Bijection on n positions; application sends position i to sigma[i]."""

    __slots__ = ("sigma",)

    def __init__(self, sigma) -> None:
        arr = np.asarray(sigma, dtype=np.intp)
        if arr.ndim != 1 or not np.array_equal(np.sort(arr), np.arange(arr.size)):
            raise ValueError("not a permutation of 0..n-1")
        self.sigma = _lock(arr.copy())

    @property
    def n(self) -> int:
        return int(self.sigma.size)

    def inverse(self) -> "PermutationMap":
        return PermutationMap(np.argsort(self.sigma))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PermutationMap) and np.array_equal(self.sigma, other.sigma)

    def __repr__(self) -> str:
        return f"PermutationMap({self.sigma.tolist()})"


def _bit_column(buf: np.ndarray, c: int) -> np.ndarray:
    return (buf[:, c >> 3] >> (7 - (c & 7))) & 1


def _echelon(g: BitMatrix) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Full row reduction of g with row-combination tracking.

    Returns (red, track, pivots): red is the reduced matrix, track the
    GF(2) row operations applied (track @ g == red), pivots the pivot
    columns in ascending order.  Rows pivots onward of red are zero.
    Cached on the matrix, which is safe because matrices are immutable.
    """
    cached = g._cache.get("echelon")
    if cached is not None:
        return cached
    red = g.buf.copy()
    track = np.packbits(np.eye(g.rows, dtype=np.uint8), axis=1) if g.rows else np.zeros(
        (0, 0), dtype=np.uint8
    )
    pivots: list[int] = []
    prow = 0
    for c in range(g.cols):
        if prow == g.rows:
            break
        below = np.nonzero(_bit_column(red[prow:], c))[0]
        if below.size == 0:
            continue
        p = prow + int(below[0])
        if p != prow:
            red[[prow, p]] = red[[p, prow]]
            track[[prow, p]] = track[[p, prow]]
        others = _bit_column(red, c).astype(bool)
        others[prow] = False
        idx = np.nonzero(others)[0]
        if idx.size:
            red[idx] ^= red[prow]
            track[idx] ^= track[prow]
        pivots.append(c)
        prow += 1
    g._cache["echelon"] = (red, track, pivots)
    return red, track, pivots


def vec_mat_mul(u: BitVec, g: BitMatrix) -> BitVec:
    """Row-vector product u @ g over GF(2)."""
    if u.n != g.rows:
        raise ValueError(f"vector length {u.n} != matrix rows {g.rows}")
    return BitVec(g.cols, _kernels.xor_select_rows(g.buf, u.bits()))


def rank(g: BitMatrix) -> int:
    """GF(2) rank."""
    return len(_echelon(g)[2])


def row_basis(g: BitMatrix) -> BitMatrix:
    """Independent rows spanning the row space of g, rank x cols."""
    red, _, pivots = _echelon(g)
    return BitMatrix(len(pivots), g.cols, red[: len(pivots)].copy())


def null_space_basis(g: BitMatrix) -> BitMatrix:
    """Basis of the left null space {u : u @ g == 0}, (rows - rank) x rows.

    Rows are a deterministic function of g (no randomness); the basis is
    empty (0 x rows) when g has full row rank.
    """
    red, track, pivots = _echelon(g)
    r = len(pivots)
    basis = track[r:].copy() if g.rows else np.zeros((0, 0), dtype=np.uint8)
    return BitMatrix(g.rows - r, g.rows, basis)


def solve_particular(g: BitMatrix, x: BitVec):
    """One u with u @ g == x, or None when x is outside the row space.

    The returned solution is deterministic; add any left-null-space vector
    for the rest of the solution set.
    """
    if x.n != g.cols:
        raise ValueError(f"target length {x.n} != matrix cols {g.cols}")
    red, track, pivots = _echelon(g)
    residual = x.buf.copy()
    combo = np.zeros(track.shape[1] if g.rows else 0, dtype=np.uint8)
    for i, c in enumerate(pivots):
        if (int(residual[c >> 3]) >> (7 - (c & 7))) & 1:
            residual ^= red[i]
            combo ^= track[i]
    if residual.any():
        return None
    return BitVec(g.rows, combo)


def random_permutation(n: int, rng: np.random.Generator) -> PermutationMap:
    """Uniform random permutation drawn from rng."""
    return PermutationMap(rng.permutation(n))


def apply_permutation(u: BitVec, p: PermutationMap) -> BitVec:
    """Permute positions: result[p.sigma[i]] = u[i].  Weight-preserving."""
    if u.n != p.n:
        raise ValueError("length mismatch")
    out = np.empty(u.n, dtype=np.uint8)
    out[p.sigma] = u.bits()
    return BitVec.from_bits(out)
