import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmlab import channels, decoders, gf2, rm
from rmlab.errors import GuardExceeded

from conftest import all_words, brute_coset_min


def _random_g(rng, rows, cols):
    return gf2.BitMatrix.from_bits(rng.integers(0, 2, (rows, cols), dtype=np.uint8))


@settings(deadline=None, max_examples=30)
@given(st.integers(0, 2**32), st.integers(4, 10), st.integers(1, 6))
def test_ml_source_decode_matches_brute_force(seed, n, l):
    rng = np.random.default_rng(seed)
    g = _random_g(rng, n, l)
    theta = float(rng.uniform(0.02, 0.5))
    u = gf2.BitVec.from_bits(rng.integers(0, 2, n, dtype=np.uint8))
    x = gf2.vec_mat_mul(u, g)
    res = decoders.ml_source_decode(g, x, theta)
    costs = np.full(n, math.log((1 - theta) / theta))
    best, _ = brute_coset_min(g, x, costs)
    assert res.estimate == best[0]
    assert res.tie_error == (len(best) > 1)


@settings(deadline=None, max_examples=20)
@given(st.integers(0, 2**32))
def test_ml_error_pattern_matches_brute_force_with_mixed_llrs(seed):
    rng = np.random.default_rng(seed)
    n, l = 9, 4
    g = _random_g(rng, n, l)
    mags = rng.exponential(2.0, n)
    mags[rng.random(n) < 0.2] = 0.0          # erasures
    mags[rng.random(n) < 0.15] = math.inf    # pinned positions
    e = gf2.BitVec.from_bits(rng.integers(0, 2, n, dtype=np.uint8))
    syn = gf2.vec_mat_mul(e, g)
    res = decoders.ml_error_pattern(g, syn, mags)
    best, best_cost = brute_coset_min(g, syn, mags)
    assert res.estimate == best[0]
    assert res.tie_error == (len(best) > 1)
    got_cost = (
        sum(1 for i in range(n) if res.estimate[i] and math.isinf(mags[i])),
        math.fsum(float(mags[i]) for i in range(n) if res.estimate[i] and not math.isinf(mags[i])),
    )
    assert got_cost[0] == best_cost[0]
    assert math.isclose(got_cost[1], best_cost[1], rel_tol=0, abs_tol=1e-9)


def test_tie_is_detected_and_lex_min_returned():
    # coset of x=1 under G=[[1],[1]] is {01, 10}: an exact tie
    g = gf2.BitMatrix.from_bits(np.array([[1], [1]], dtype=np.uint8))
    res = decoders.ml_source_decode(g, gf2.BitVec.from01("1"), 0.2)
    assert res.tie_error
    assert res.estimate.to01() == "01"


def test_all_zero_costs_is_full_tie():
    g = gf2.BitMatrix.from_bits(np.array([[1], [1], [0]], dtype=np.uint8))
    res = decoders.ml_error_pattern(g, gf2.BitVec.from01("0"), np.zeros(3))
    # whole coset ties at cost 0; lexicographically smallest is all-zero
    assert res.tie_error
    assert res.estimate.is_zero()


def test_near_tie_resolved_by_exact_summation():
    # coset of syndrome (1,1) is {1100, 0010, 1101, 0011}; costs make
    # {0,1} sum to 0.1+0.2 (the float 0.300...04) while {2} costs exactly
    # 0.3 -- a gap of one ulp that a slack-window argmin must not blur
    g = gf2.BitMatrix.from_bits(
        np.array([[1, 0], [0, 1], [1, 1], [0, 0]], dtype=np.uint8)
    )
    syn = gf2.BitVec.from01("11")
    costs = np.array([0.1, 0.2, 0.3, 1000.0])
    res = decoders.ml_error_pattern(g, syn, costs)
    assert res.estimate.to01() == "0010"
    assert not res.tie_error


def test_exact_float_tie_detected_and_lex_min_wins():
    # same coset, but position 2 now costs float(0.1 + 0.2): fsum of
    # {0.1, 0.2} equals that single float exactly, a genuine tie
    g = gf2.BitMatrix.from_bits(
        np.array([[1, 0], [0, 1], [1, 1], [0, 0]], dtype=np.uint8)
    )
    syn = gf2.BitVec.from01("11")
    costs = np.array([0.1, 0.2, 0.1 + 0.2, 1000.0])
    res = decoders.ml_error_pattern(g, syn, costs)
    assert res.tie_error
    assert res.estimate.to01() == "0010"  # lex-min of {0010, 1100}


def test_ml_source_guard():
    g = gf2.BitMatrix.from_bits(np.eye(40, 2, dtype=np.uint8))
    with pytest.raises(GuardExceeded):
        decoders.ml_source_decode(g, gf2.BitVec.zeros(2), 0.1, guard_bits=10)


def test_channel_decode_corrects_single_flip():
    built = rm.trim_to_full_rank(rm.build_full_rm_matrix(3, 1))
    g = built.matrix
    nullb = gf2.null_space_basis(g)
    c = nullb.row(0)
    llrs = np.where(c.bits() == 0, 4.0, -4.0).astype(np.float64)
    llrs[3] = -llrs[3] * 0.25  # one weakly wrong position
    rng = np.random.default_rng(0)
    prof = channels.hard_decision(llrs, rng, truth=c)
    assert prof.error_pattern.weight() == 1
    res = decoders.channel_decode(g, prof)
    assert res.estimate == c and not res.tie_error


def test_baseline_decoders():
    z = decoders.zero_word_decode(5)
    assert z.estimate.is_zero() and not z.tie_error
    rng = np.random.default_rng(1)
    llrs = rng.normal(size=6)
    prof = channels.hard_decision(llrs, rng)
    h = decoders.hard_word_decode(prof)
    assert h.estimate == prof.hard
    g = _random_g(rng, 6, 3)
    u = gf2.BitVec.from_bits(rng.integers(0, 2, 6, dtype=np.uint8))
    x = gf2.vec_mat_mul(u, g)
    p = decoders.particular_solution_decode(g, x)
    assert gf2.vec_mat_mul(p.estimate, g) == x


def _joint_map_oracle(g, profile1, y2, channel2, source):
    """Exhaustive argmax of ln P(y1|u) + ln P(u) + ln P(y2|uG).

    Scores are relative to a per-position reference choice so that +-inf
    LLRs (erasure channels) pin positions instead of poisoning sums; the
    finite parts are fsum-exact.  channel2 must have finite likelihoods.
    Returns (lex-sorted winners, tied?).
    """
    n = g.rows
    lp0, lp1 = source.log_prior()
    w1 = profile1.llrs
    lam = w1 + (lp0 - lp1)
    ref = (w1 == -math.inf).astype(np.uint8)  # forced-one positions
    l0, l1 = channel2.log_likelihoods(np.asarray(y2))
    d2 = l1 - l0
    assert np.isfinite(d2).all(), "oracle needs a finite-LLR second channel"
    best_key, winners = None, []
    for bits in all_words(n):
        terms = []
        dead = False
        for j in range(n):
            if bits[j] == ref[j]:
                continue
            delta = -lam[j] if ref[j] == 0 else lam[j]
            if delta == -math.inf:
                dead = True
                break
            terms.append(float(delta))
        if dead:
            continue
        x = gf2.vec_mat_mul(gf2.BitVec.from_bits(bits), g)
        terms.extend(float(d2[k]) for k in range(g.cols) if x[k])
        key = -math.fsum(terms)
        if best_key is None or key < best_key:
            best_key, winners = key, [bits.copy()]
        elif key == best_key:
            winners.append(bits.copy())
    out = sorted((gf2.BitVec.from_bits(b) for b in winners), key=lambda v: v.lex_key())
    return out, len(out) > 1


@settings(deadline=None, max_examples=15)
@given(st.integers(0, 2**32))
def test_two_step_full_list_equals_joint_map(seed):
    rng = np.random.default_rng(seed)
    n, l = 8, 4
    g = _random_g(rng, n, l)
    src = channels.SourceModel(0.3)
    ch1 = channels.parse_channel("bsc:p=0.1")
    ch2 = channels.parse_channel("bsc:p=0.06")
    u = src.sample(n, rng)
    prof1 = ch1.observe(u, rng, truth=u)
    y2 = ch2.transmit(gf2.vec_mat_mul(u, g), rng)
    res = decoders.two_step_list_decode(g, prof1, y2, ch2, src, 1 << n)
    winners, tied = _joint_map_oracle(g, prof1, y2, ch2, src)
    assert res.estimate == winners[0]  # lex-min optimum either way
    assert res.tie_error == tied


def test_two_step_lists_are_nested_and_coverage_monotone():
    rng = np.random.default_rng(9)
    n, l = 10, 5
    g = _random_g(rng, n, l)
    src = channels.SourceModel(0.25)
    ch1 = channels.parse_channel("bsc:p=0.12")
    ch2 = channels.parse_channel("bsc:p=0.05")
    sizes = [1, 4, 16, 64, 256, 1024]
    coverage = []
    for trial in range(40):
        u = src.sample(n, rng)
        prof1 = ch1.observe(u, rng, truth=u)
        y2 = ch2.transmit(gf2.vec_mat_mul(u, g), rng)
        lists = []
        for size in sizes:
            _, cand = decoders.two_step_list_decode(
                g, prof1, y2, ch2, src, size, return_list=True
            )
            lists.append(cand)
        for small, big in zip(lists, lists[1:]):
            assert np.array_equal(small, big[: len(small)])
        coverage.append([bool((c == u.bits()).all(axis=1).any()) for c in lists])
    rates = np.mean(coverage, axis=0)
    assert (np.diff(rates) >= 0).all()
    assert rates[-1] == 1.0  # full list always contains the truth


def test_two_step_with_erasures_in_first_observation():
    rng = np.random.default_rng(10)
    n, l = 8, 4
    g = _random_g(rng, n, l)
    src = channels.SourceModel(0.2)
    ch1 = channels.parse_channel("bec:eps=0.4")
    ch2 = channels.parse_channel("bsc:p=0.05")
    for _ in range(25):
        u = src.sample(n, rng)
        prof1 = ch1.observe(u, rng, truth=u)
        y2 = ch2.transmit(gf2.vec_mat_mul(u, g), rng)
        res = decoders.two_step_list_decode(g, prof1, y2, ch2, src, 1 << n)
        winners, tied = _joint_map_oracle(g, prof1, y2, ch2, src)
        assert res.estimate in winners


def test_two_step_width_guard():
    g = gf2.BitMatrix.from_bits(np.zeros((30, 2), dtype=np.uint8))
    src = channels.SourceModel(0.2)
    ch = channels.parse_channel("bsc:p=0.1")
    rng = np.random.default_rng(0)
    u = gf2.BitVec.zeros(30)
    prof = ch.observe(u, rng, truth=u)
    y2 = ch.transmit(gf2.BitVec.zeros(2), rng)
    with pytest.raises(GuardExceeded):
        decoders.two_step_list_decode(g, prof, y2, ch, src, 4)


def test_accumulate_metrics_counts_ties_as_block_errors():
    truth = gf2.BitVec.from01("0000")
    ok = decoders.DecodeResult(truth, False, 1, 0.0)
    tied = decoders.DecodeResult(truth, True, 2, 0.0)
    wrong = decoders.DecodeResult(gf2.BitVec.from01("0011"), False, 1, 0.0)
    rep = decoders.accumulate_metrics([(truth, ok), (truth, tied), (truth, wrong)])
    assert rep.trials == 3
    assert rep.block_errors == 2
    assert rep.bit_errors == 2
    assert rep.tie_count == 1
    assert 0.0 <= rep.bler_lo <= rep.bler <= rep.bler_hi <= 1.0
