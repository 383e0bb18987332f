"""Pure-numpy bit kernels.

Fallback backend used when the compiled extension is unavailable.  All
functions operate on GF(2) rows packed MSB-first into uint8 (np.packbits
layout): column j lives in byte j >> 3 at bit 7 - (j & 7).  Padding bits
past the logical width must be zero.

The compiled backend mirrors these signatures exactly; score accumulation
walks bytes left to right in both so float results agree bit-for-bit.
"""
from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"

# Recursive-doubling tables are built over at most this many basis rows at a
# time; larger spans stream 2^(k - _CHUNK_BITS) chunks through the table.
_CHUNK_BITS = 16

__all__ = [
    "BACKEND_NAME",
    "xor_select_rows",
    "popcount_rows",
    "score_rows",
    "weight_histogram",
    "coset_scan",
    "syndrome_zero_count",
]


def xor_select_rows(rows: np.ndarray, select: np.ndarray) -> np.ndarray:
    """XOR of ``rows[i]`` over all i with ``select[i]`` nonzero."""
    picked = rows[select.astype(bool)]
    if picked.shape[0] == 0:
        return np.zeros(rows.shape[1], dtype=np.uint8)
    return np.bitwise_xor.reduce(picked, axis=0)


def popcount_rows(a: np.ndarray) -> np.ndarray:
    """Hamming weight of each packed row, shape (rows,) int64."""
    return np.bitwise_count(a).sum(axis=1, dtype=np.int64)


def score_rows(a: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Per-row sums of table[b, byte_b] accumulated over bytes left to right.

    table has shape (row_bytes, 256); the sequential byte order fixes the
    floating-point rounding so both backends return identical values.
    """
    acc = table[0][a[:, 0]].copy()
    for b in range(1, a.shape[1]):
        acc += table[b][a[:, b]]
    return acc


def _combo_table(basis: np.ndarray, nbytes: int) -> np.ndarray:
    """All 2^k XOR combinations of basis rows; index bit j selects row j."""
    table = np.zeros((1, nbytes), dtype=np.uint8)
    for row in basis:
        table = np.concatenate([table, table ^ row])
    return table


def _ctz(x: int) -> int:
    return (x & -x).bit_length() - 1


def _chunk_stream(basis: np.ndarray, offset: np.ndarray):
    """Yield (high_mask, words) covering the span of ``basis`` shifted by
    ``offset`` in chunks of at most 2^_CHUNK_BITS words.

    words[l] corresponds to full mask (high_mask << low) | l, where low is
    the chunk width; high masks follow a Gray sequence so each step XORs a
    single basis row into the running offset.
    """
    k, nbytes = basis.shape
    low = min(k, _CHUNK_BITS)
    table = _combo_table(basis[:low], nbytes)
    cur = offset.copy()
    yield 0, table ^ cur
    gray = 0
    for h in range(1, 1 << (k - low)):
        j = _ctz(h)
        cur ^= basis[low + j]
        gray ^= 1 << j
        yield gray, table ^ cur


def weight_histogram(basis: np.ndarray, ncols: int, offset: np.ndarray) -> np.ndarray:
    """Histogram of Hamming weights over {offset ^ combo : combo in span}."""
    hist = np.zeros(ncols + 1, dtype=np.int64)
    for _, words in _chunk_stream(basis, offset):
        counts = np.bitwise_count(words).sum(axis=1, dtype=np.int64)
        hist += np.bincount(counts, minlength=ncols + 1)
    return hist


def coset_scan(
    basis: np.ndarray,
    offset: np.ndarray,
    table: np.ndarray,
    rel_slack: float,
    abs_slack: float,
    max_keep: int,
) -> tuple[float, np.ndarray, int]:
    """Scan the coset offset ^ span(basis) for near-minimal scores.

    Returns (best, masks, total_near): best is the minimal table score,
    masks the sorted combination masks scoring within
    best + rel_slack * (1 + |best|) + abs_slack (at most max_keep of them),
    and total_near the true count of near-minimal members.  Callers must
    treat a truncated list (total_near > max_keep) as incomplete.
    """
    k = basis.shape[0]
    low = min(k, _CHUNK_BITS)
    best = np.inf
    for _, words in _chunk_stream(basis, offset):
        m = score_rows(words, table).min()
        if m < best:
            best = float(m)
    thresh = best + rel_slack * (1.0 + abs(best)) + abs_slack
    kept: list[np.ndarray] = []
    total = 0
    for high_mask, words in _chunk_stream(basis, offset):
        scores = score_rows(words, table)
        idx = np.nonzero(scores <= thresh)[0]
        total += int(idx.size)
        if total - int(idx.size) < max_keep and idx.size:
            kept.append((high_mask << low) | idx.astype(np.int64))
    if kept:
        masks = np.sort(np.concatenate(kept))[:max_keep]
    else:
        masks = np.zeros(0, dtype=np.int64)
    return best, masks, total


def syndrome_zero_count(rows: np.ndarray, supports: np.ndarray) -> int:
    """Count trials whose XOR of rows[supports[t]] is the zero word."""
    total = 0
    for start in range(0, supports.shape[0], 4096):
        chunk = supports[start : start + 4096]
        acc = np.bitwise_xor.reduce(rows[chunk], axis=1)
        total += int((~acc.any(axis=1)).sum())
    return total
