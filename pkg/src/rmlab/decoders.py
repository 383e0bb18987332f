"""Exact decoders built on coset enumeration.

Every decoder here is maximum a posteriori over its admissible set, not a
heuristic: coset decoders enumerate u0 + span(null basis) outright, and
the two-step list decoder enumerates flip sets of the positionwise-MAP
word in exactly nondecreasing cost order.

Scores are additive per-position costs.  The kernels accumulate them as
plain float sums (same byte order in both backends); every candidate
within a small slack of the approximate minimum is re-scored with
math.fsum in position order, so reported ties are exact-arithmetic ties,
not float noise.  Positions with infinite cost are folded into the kernel
score as +2^40 each (finite scores stay far below that at supported
sizes) and compared exactly as (infinite_flips, finite_cost) pairs in the
refinement, so inf - inf never arises.

A tie, i.e. several admissible words sharing the exact best score, sets
tie_error and returns the lexicographically smallest optimum.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, gf2
from ._kernels import _pybits
from .channels import Channel, LlrProfile, SourceModel
from .errors import GuardExceeded, RmlabError
from .stats import wilson_interval

__all__ = [
    "COSET_GUARD_BITS",
    "LIST_GUARD",
    "TWO_STEP_WIDTH_GUARD",
    "DecodeResult",
    "MetricReport",
    "ml_source_decode",
    "ml_error_pattern",
    "channel_decode",
    "two_step_list_decode",
    "accumulate_metrics",
    "zero_word_decode",
    "hard_word_decode",
    "particular_solution_decode",
]

# Coset enumerations run through 2^(rows - rank) members; refuse beyond this.
COSET_GUARD_BITS = 26
# Two-step stage-1 lists are capped at 2^20 candidates over at most 24 positions.
LIST_GUARD = 1 << 20
TWO_STEP_WIDTH_GUARD = 24

_SLACK_REL = 1e-7
_SLACK_ABS = 1e-9
_INF_FOLD = 2.0**40
_KEEP_CAP = 1 << 16


@dataclass(frozen=True)
class DecodeResult:
    """Outcome of one decode.

    log_posterior_best is the optimal candidate's log-domain score; for
    coset decoders it is the exact log prior/likelihood up to the additive
    constant shared by all candidates, so only differences between
    candidates are meaningful.
    """

    estimate: gf2.BitVec
    tie_error: bool
    candidates_examined: int
    log_posterior_best: float


@dataclass(frozen=True)
class MetricReport:
    """Error counts with Wilson 95% intervals; ties always count as block
    errors and contribute their bit distance."""

    trials: int
    n: int
    bit_errors: int
    block_errors: int
    tie_count: int
    ber: float
    ber_lo: float
    ber_hi: float
    bler: float
    bler_lo: float
    bler_hi: float


def _score_table(costs: np.ndarray, nbytes: int) -> np.ndarray:
    """(nbytes, 256) lookup: table[b, v] sums costs of the bits set in v."""
    folded = np.where(np.isinf(costs), _INF_FOLD, costs)
    padded = np.zeros(nbytes * 8, dtype=np.float64)
    padded[: costs.size] = folded
    per_byte = padded.reshape(nbytes, 8)
    values = ((np.arange(256)[:, None] >> (7 - np.arange(8)[None, :])) & 1).astype(
        np.float64
    )
    return np.ascontiguousarray(values @ per_byte.T).T.copy()


def _exact_cost(word_buf: np.ndarray, costs: np.ndarray, n: int) -> tuple[int, float]:
    """(infinite flips, exact finite cost) of the word's support."""
    support = np.nonzero(np.unpackbits(word_buf, count=n))[0]
    vals = costs[support]
    inf_mask = np.isinf(vals)
    return int(inf_mask.sum()), math.fsum(vals[~inf_mask].tolist())


def _combo_word(basis_buf: np.ndarray, offset_buf: np.ndarray, mask: int) -> np.ndarray:
    select = np.zeros(basis_buf.shape[0], dtype=np.uint8)
    for j in range(basis_buf.shape[0]):
        select[j] = (mask >> j) & 1
    return offset_buf ^ _kernels.xor_select_rows(basis_buf, select)


def _coset_lex_min(basis: gf2.BitMatrix, offset_buf: np.ndarray, n: int) -> np.ndarray:
    """Lexicographically smallest member of offset + span(basis)."""
    red, _, pivots = gf2._echelon(basis)
    word = offset_buf.copy()
    for i, c in enumerate(pivots):
        if (int(word[c >> 3]) >> (7 - (c & 7))) & 1:
            word ^= red[i]
    return word


def _coset_argmin(
    basis: gf2.BitMatrix, offset_buf: np.ndarray, costs: np.ndarray, n: int
) -> tuple[np.ndarray, bool, int]:
    """Exact minimizer of the support cost over offset + span(basis).

    Returns (word buffer, tie flag, members examined).
    """
    k = basis.rows
    if k == 0:
        return offset_buf.copy(), False, 1
    examined = 1 << k
    if not costs.any():
        # Every member costs exactly zero: all of them tie.
        return _coset_lex_min(basis, offset_buf, n), True, examined

    nbytes = offset_buf.shape[0]
    table = _score_table(costs, nbytes)
    best, masks, total = _kernels.coset_scan(
        basis.buf, offset_buf, table, _SLACK_REL, _SLACK_ABS, _KEEP_CAP
    )

    best_key: tuple[int, float] | None = None
    best_word: np.ndarray | None = None
    ties = 0
    if total <= _KEEP_CAP:
        for mask in masks.tolist():
            word = _combo_word(basis.buf, offset_buf, mask)
            key = _exact_cost(word, costs, n)
            if best_key is None or key < best_key:
                best_key, best_word, ties = key, word, 1
            elif key == best_key:
                ties += 1
                if word.tobytes() < best_word.tobytes():
                    best_word = word
    else:
        # Degenerate near-tie mass (many zero-cost positions): stream the
        # whole coset, keeping only the running exact optimum.
        thresh = best + _SLACK_REL * (1.0 + abs(best)) + _SLACK_ABS
        for high_mask, words in _pybits._chunk_stream(basis.buf, offset_buf):
            scores = _kernels.score_rows(words, table)
            for idx in np.nonzero(scores <= thresh)[0]:
                word = words[idx]
                key = _exact_cost(word, costs, n)
                if best_key is None or key < best_key:
                    best_key, best_word, ties = key, word.copy(), 1
                elif key == best_key:
                    ties += 1
                    if word.tobytes() < best_word.tobytes():
                        best_word = word.copy()
    assert best_word is not None
    return best_word, ties > 1, examined


def _coset_basis(g: gf2.BitMatrix, guard_bits: int) -> gf2.BitMatrix:
    basis = gf2.null_space_basis(g)
    if basis.rows > guard_bits:
        raise GuardExceeded(
            f"coset enumeration needs 2^{basis.rows} members "
            f"(guard 2^{guard_bits}); reduce the problem or raise the guard"
        )
    return basis


def ml_source_decode(
    g: gf2.BitMatrix,
    x: gf2.BitVec,
    thetas,
    guard_bits: int = COSET_GUARD_BITS,
) -> DecodeResult:
    """Most probable source word u with u @ g == x, prior Bernoulli(thetas).

    thetas may be a scalar or per-position array in (0, 1/2]; flipping
    position i away from zero costs ln((1-theta_i)/theta_i) >= 0, and the
    reported log-posterior is the exact log prior of the estimate.
    """
    n = g.rows
    thetas = np.broadcast_to(np.asarray(thetas, dtype=np.float64), (n,))
    u0 = gf2.solve_particular(g, x)
    if u0 is None:
        raise RmlabError("observed word is outside the row space; nothing to decode")
    basis = _coset_basis(g, guard_bits)
    costs = np.log((1.0 - thetas) / thetas)
    word, tie, examined = _coset_argmin(basis, u0.buf, costs, n)
    est = gf2.BitVec(n, word)
    bits = est.bits().astype(bool)
    log_post = float(np.where(bits, np.log(thetas), np.log(1.0 - thetas)).sum())
    return DecodeResult(est, tie, examined, log_post)


def ml_error_pattern(
    g: gf2.BitMatrix,
    syndrome: gf2.BitVec,
    llr_magnitudes: np.ndarray,
    guard_bits: int = COSET_GUARD_BITS,
) -> DecodeResult:
    """Most probable error pattern e with e @ g == syndrome.

    Position i costs |r_i| (its LLR magnitude); infinite entries pin known
    positions and zero entries mark erasures.  The log-posterior is the
    negated cost, meaningful relative to other coset members.
    """
    n = g.rows
    costs = np.abs(np.asarray(llr_magnitudes, dtype=np.float64))
    e0 = gf2.solve_particular(g, syndrome)
    if e0 is None:
        raise RmlabError("syndrome is outside the row space; no error pattern exists")
    basis = _coset_basis(g, guard_bits)
    word, tie, examined = _coset_argmin(basis, e0.buf, costs, n)
    est = gf2.BitVec(n, word)
    inf_flips, finite = _exact_cost(word, costs, n)
    log_post = -math.inf if inf_flips else -finite
    return DecodeResult(est, tie, examined, log_post)


def channel_decode(
    g: gf2.BitMatrix,
    profile: LlrProfile,
    guard_bits: int = COSET_GUARD_BITS,
) -> DecodeResult:
    """ML codeword decision for the code {c : c @ g == 0}.

    Computes the hard word's syndrome, finds the cheapest consistent error
    pattern under the LLR magnitudes, and corrects: estimate = Z xor e.
    """
    syndrome = gf2.vec_mat_mul(profile.hard, g)
    res = ml_error_pattern(g, syndrome, np.abs(profile.llrs), guard_bits)
    return DecodeResult(
        estimate=profile.hard ^ res.estimate,
        tie_error=res.tie_error,
        candidates_examined=res.candidates_examined,
        log_posterior_best=res.log_posterior_best,
    )


def _flip_sets_by_cost(lam_sorted: np.ndarray, limit: int):
    """Yield index subsets of the sorted cost vector in nondecreasing
    total-cost order, starting with the empty set; at most limit subsets.

    Classic best-first expansion: each heap node extends or replaces its
    highest index, so every subset appears exactly once; equal-cost
    subsets come out in deterministic insertion order.
    """
    yield ()
    produced = 1
    if produced >= limit or lam_sorted.size == 0:
        return
    f = lam_sorted.size
    counter = 0
    heap = [(float(lam_sorted[0]), counter, (0,))]
    while heap and produced < limit:
        cost, _, subset = heapq.heappop(heap)
        yield subset
        produced += 1
        last = subset[-1]
        if last + 1 < f:
            counter += 1
            heapq.heappush(
                heap, (cost + float(lam_sorted[last + 1]), counter, subset + (last + 1,))
            )
            counter += 1
            heapq.heappush(
                heap,
                (
                    cost - float(lam_sorted[last]) + float(lam_sorted[last + 1]),
                    counter,
                    subset[:-1] + (last + 1,),
                ),
            )


def two_step_list_decode(
    g: gf2.BitMatrix,
    profile1: LlrProfile,
    y2: np.ndarray,
    channel2: Channel,
    source: SourceModel,
    list_size: int,
    return_list: bool = False,
):
    """Joint decoding of u from a direct observation and a coded one.

    Stage 1 lists the list_size words u maximizing the separable score
    sum_i [ln P(v_i|u_i) + ln P(u_i)] (the positionwise-MAP word plus flip
    sets in exactly nondecreasing cost order).  Stage 2 encodes each
    candidate as x = u @ g and re-ranks the list by the joint score
    (stage-1 score plus sum_j ln P(y2_j | x_j)); with the full list this
    equals joint MAP decoding.  Exact ties set tie_error and return the
    lexicographically smallest optimum.

    When return_list is true, also returns the stage-1 candidate bits in
    list order (for genie coverage studies); lists are nested: a shorter
    list is always a prefix of a longer one for the same inputs.
    """
    n, l = g.rows, g.cols
    if n > TWO_STEP_WIDTH_GUARD:
        raise GuardExceeded(
            f"two-step enumeration supports at most {TWO_STEP_WIDTH_GUARD} "
            f"positions, got {n}"
        )
    if not 1 <= list_size <= LIST_GUARD:
        raise GuardExceeded(f"list_size={list_size} outside [1, 2^20]")

    lp0, lp1 = source.log_prior()
    lam = profile1.llrs + (lp0 - lp1)
    # Positionwise MAP: prefer 1 exactly when the combined metric says so;
    # zero-metric positions default to 0 and their flips cost nothing.
    map_bits = (lam < 0).astype(np.uint8)
    abs_lam = np.abs(lam)
    free = np.nonzero(np.isfinite(abs_lam))[0]
    order = free[np.argsort(abs_lam[free], kind="stable")]
    lam_sorted = abs_lam[order]

    cand_bits = []
    stage1_rel = []
    for subset in _flip_sets_by_cost(lam_sorted, list_size):
        bits = map_bits.copy()
        positions = order[list(subset)]
        bits[positions] ^= 1
        cand_bits.append(bits)
        stage1_rel.append(-math.fsum(abs_lam[positions].tolist()))
    cand = np.stack(cand_bits)
    stage1 = np.array(stage1_rel)

    gl0, gl1 = channel2.log_likelihoods(y2)
    gbits = g.bits()
    scores = np.empty(cand.shape[0], dtype=np.float64)
    for start in range(0, cand.shape[0], 1 << 16):
        block = cand[start : start + (1 << 16)]
        x = (block.astype(np.float64) @ gbits.astype(np.float64)).astype(np.int64) & 1
        picked = np.where(x.astype(bool), gl1[None, :], gl0[None, :])
        scores[start : start + block.shape[0]] = picked.sum(axis=1)
    total = stage1 + scores

    finite = np.isfinite(total)
    best_approx = total[finite].max() if finite.any() else -math.inf
    slack = _SLACK_REL * (1.0 + abs(best_approx)) + _SLACK_ABS if finite.any() else 0.0
    near = np.nonzero(total >= best_approx - slack)[0] if finite.any() else np.arange(
        cand.shape[0]
    )

    best_key = None
    best_idx = -1
    best_word = None
    ties = 0
    for idx in near.tolist():
        bits = cand[idx]
        x = np.asarray(
            (bits.astype(np.int64) @ gbits.astype(np.int64)) & 1, dtype=np.uint8
        )
        terms = [float(gl1[j]) if x[j] else float(gl0[j]) for j in range(l)]
        flips = np.nonzero(bits ^ map_bits)[0]
        terms.extend(-float(abs_lam[i]) for i in flips.tolist())
        ninf = sum(1 for t in terms if t == -math.inf)
        fin = math.fsum(t for t in terms if t != -math.inf)
        key = (ninf, -fin)
        word = np.packbits(bits)
        if best_key is None or key < best_key:
            best_key, best_idx, best_word, ties = key, idx, word, 1
        elif key == best_key:
            ties += 1
            if word.tobytes() < best_word.tobytes():
                best_idx, best_word = idx, word

    est = gf2.BitVec(n, best_word)
    result = DecodeResult(
        estimate=est,
        tie_error=ties > 1,
        candidates_examined=cand.shape[0],
        log_posterior_best=float(stage1[best_idx] + scores[best_idx]),
    )
    if return_list:
        return result, cand
    return result


def accumulate_metrics(pairs) -> MetricReport:
    """Fold (truth, DecodeResult) pairs into error rates.

    A block error is an estimate differing from the truth or any exact
    tie; bit errors count the Hamming distance either way.
    """
    trials = 0
    n = 0
    bit_errors = 0
    block_errors = 0
    tie_count = 0
    for truth, res in pairs:
        trials += 1
        n = truth.n
        dist = (truth ^ res.estimate).weight()
        bit_errors += dist
        if dist or res.tie_error:
            block_errors += 1
        if res.tie_error:
            tie_count += 1
    ber_lo, ber_hi = wilson_interval(bit_errors, trials * n)
    bler_lo, bler_hi = wilson_interval(block_errors, trials)
    return MetricReport(
        trials=trials,
        n=n,
        bit_errors=bit_errors,
        block_errors=block_errors,
        tie_count=tie_count,
        ber=bit_errors / (trials * n) if trials else 0.0,
        ber_lo=ber_lo,
        ber_hi=ber_hi,
        bler=block_errors / trials if trials else 0.0,
        bler_lo=bler_lo,
        bler_hi=bler_hi,
    )


def zero_word_decode(n: int) -> DecodeResult:
    """Baseline: always guess the all-zero word."""
    return DecodeResult(gf2.BitVec.zeros(n), False, 1, 0.0)


def hard_word_decode(profile: LlrProfile) -> DecodeResult:
    """Baseline: trust the hard decisions, no parity correction."""
    return DecodeResult(profile.hard, False, 1, 0.0)


def particular_solution_decode(g: gf2.BitMatrix, x: gf2.BitVec) -> DecodeResult:
    """Baseline: any consistent preimage, ignoring the prior."""
    u0 = gf2.solve_particular(g, x)
    if u0 is None:
        raise RmlabError("observed word is outside the row space")
    return DecodeResult(u0, False, 1, 0.0)
