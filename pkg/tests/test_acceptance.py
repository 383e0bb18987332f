"""Acceptance gate: twelve numbered criteria, one test function each.

Every criterion re-derives its expected values inside the test (binomial
sums, brute-force enumerations, vectorized joint-MAP oracles) rather than
trusting the code under test, and asserts the documented desk-scale
runtime budget.  `pytest -v` therefore prints one pass/fail line per
criterion.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from rmlab import analysis, channels, decoders, fileio, gf2, harness, rm

SEED = 20260819


def _all_words(n: int) -> np.ndarray:
    """All 2^n binary words as rows, index == MSB-first integer value."""
    ints = np.arange(1 << n, dtype=np.int64)
    return ((ints[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)


def _budget(t0: float, seconds: float, label: str) -> None:
    dt = time.perf_counter() - t0
    assert dt < seconds, f"{label} took {dt:.2f}s, budget {seconds}s"
    print(f"{label}: ok in {dt:.3f}s (budget {seconds:g}s)")


# ----------------------------------------------------------------------


def test_criterion_01_construction_byte_exact(fixtures_dir, tmp_path):
    """The two reference constructions reproduce their checked-in files."""
    t0 = time.perf_counter()
    for m, r, name in ((3, 1, "dnf_m3_r1.txt"), (4, 2, "dnf_m4_r2.txt")):
        built = rm.build_full_rm_matrix(m, r)
        out = tmp_path / name
        fileio.save_gf2(out, built.matrix)
        assert out.read_bytes() == (fixtures_dir / name).read_bytes(), (
            f"construction (m={m}, r={r}) deviates from the fixture file"
        )
    _budget(t0, 1.0, "criterion 1 (byte-exact construction)")


def test_criterion_02_rank_and_null_space_identity(fixtures_dir):
    """Ranks 4 and 11; null spaces are the order-1 monomial codes, shown
    by mutual membership against independently built monomial generators."""
    t0 = time.perf_counter()

    def monomial_rows(m: int, order: int) -> np.ndarray:
        # evaluation vectors of 1 and all products of <= order variables,
        # points indexed MSB-first (variable 1 on the top bit)
        pts = np.arange(1 << m)
        rows = []
        import itertools

        for size in range(order + 1):
            for subset in itertools.combinations(range(1, m + 1), size):
                col = np.ones(1 << m, dtype=np.uint8)
                for v in subset:
                    col &= ((pts >> (m - v)) & 1).astype(np.uint8)
                rows.append(col)
        return np.array(rows, dtype=np.uint8)

    for name, m, expect_rank in (
        ("dnf_m3_r1.txt", 3, 4),
        ("dnf_m4_r2.txt", 4, 11),
    ):
        mat = fileio.load_gf2(fixtures_dir / name)
        assert gf2.rank(mat) == expect_rank
        mono = monomial_rows(m, 1)  # order-1 code of length 2^m
        mono_mat = gf2.BitMatrix.from_bits(mono)
        mono_rank = gf2.rank(mono_mat)
        assert mono_rank == m + 1
        # dimension match: null dim = n - rank
        nullb = gf2.null_space_basis(mat)
        assert nullb.rows == (1 << m) - expect_rank == mono_rank
        # monomial generators all annihilate the matrix ...
        for row in mono:
            assert gf2.vec_mat_mul(gf2.BitVec.from_bits(row), mat).weight() == 0
        # ... and every null basis vector lies in the monomial span
        for row in nullb.bits():
            stacked = gf2.BitMatrix.from_bits(np.vstack([mono, row[None, :]]))
            assert gf2.rank(stacked) == mono_rank
    _budget(t0, 1.0, "criterion 2 (rank + null-space identity)")


def test_criterion_03_weight_enumerators(fixtures_dir):
    """Null-space weight profiles (1,14,1) and (1,30,1) by brute force."""
    t0 = time.perf_counter()
    for name, n, expect in (
        ("dnf_m3_r1.txt", 8, {0: 1, 4: 14, 8: 1}),
        ("dnf_m4_r2.txt", 16, {0: 1, 8: 30, 16: 1}),
    ):
        mat = fileio.load_gf2(fixtures_dir / name)
        words = _all_words(n)
        in_null = ((words.astype(np.int64) @ mat.bits().astype(np.int64)) % 2 == 0).all(axis=1)
        hist = np.bincount(words[in_null].sum(axis=1), minlength=n + 1)
        assert {w: int(c) for w, c in enumerate(hist) if c} == expect
        # the package's enumerator agrees with the brute-force count
        pkg = rm.null_space_weight_enumerator(mat)
        assert [int(x) for x in pkg] == [int(c) for c in hist]
    _budget(t0, 1.0, "criterion 3 (weight enumerators)")


def test_criterion_04_exact_indicator_items():
    """(m=4, r=1): expectation 1 at w in {0,16}; 0 at odd w and w in {2,14}."""
    t0 = time.perf_counter()
    g = rm.build_full_rm_matrix(4, 1).matrix
    q = {w: analysis.exact_indicator_expectation(g, w) for w in range(17)}
    assert q[0] == 1 and q[16] == 1
    for w in range(1, 16, 2):
        assert q[w] == 0, f"odd weight {w} should be impossible"
    assert q[2] == 0 and q[14] == 0
    # cross-check the nonzero interior values against direct enumeration
    words = _all_words(16)
    in_null = ((words.astype(np.int64) @ g.bits().astype(np.int64)) % 2 == 0).all(axis=1)
    hist = np.bincount(words[in_null].sum(axis=1), minlength=17)
    for w in range(17):
        assert q[w] == Fraction(int(hist[w]), math.comb(16, w))
    _budget(t0, 1.0, "criterion 4 (exact indicator items)")


def test_criterion_05_indicator_triangulation():
    """Exact = exhaustive = MC (within CI) at (3,1,w=4), full and block."""
    t0 = time.perf_counter()
    g = rm.build_full_rm_matrix(3, 1).matrix

    exact = analysis.exact_indicator_expectation(g, 4)
    assert exact == Fraction(14, 70) == Fraction(1, 5)
    exh = analysis.mc_indicator_expectation(g, 4, 0, exhaustive=True)
    assert exh.estimate == exact
    assert exh.trials == math.factorial(8)
    mc = analysis.mc_indicator_expectation(g, 4, 100_000, harness.trial_rng(SEED, 5))
    assert mc.ci_lo <= float(exact) <= mc.ci_hi

    # one block alone: marginal probability 19/35
    block = gf2.BitMatrix.from_bits(g.bits()[:, :2])
    marg = analysis.exact_indicator_expectation(block, 4)
    assert marg == Fraction(19, 35)
    assert analysis.even_split_probability_dp((4, 4), 4) == Fraction(19, 35)
    exh_b = analysis.mc_indicator_expectation(block, 4, 0, exhaustive=True)
    assert exh_b.estimate == marg
    mc_b = analysis.mc_indicator_expectation(block, 4, 100_000, harness.trial_rng(SEED, 6))
    assert mc_b.ci_lo <= float(marg) <= mc_b.ci_hi
    _budget(t0, 30.0, "criterion 5 (indicator triangulation)")


def test_criterion_06_dp_equals_recursion():
    """Convolution DP == hypergeometric recursion at five shapes, all w."""
    t0 = time.perf_counter()
    for m, r in ((3, 1), (4, 1), (4, 2), (7, 3), (10, 4)):
        n = 1 << m
        cells = (1 << (m - r),) * (1 << r)
        for w in range(n + 1):
            dp = analysis.even_split_probability_dp(cells, w)
            rec = analysis.balls_recursive_probability(m, r, w)
            if isinstance(rec, Fraction):
                assert dp == rec, f"(m={m}, r={r}, w={w})"
            elif rec == 0.0:
                assert dp == 0, f"(m={m}, r={r}, w={w})"
            else:
                rel = abs(float(dp) - rec) / max(abs(float(dp)), abs(rec))
                assert rel <= 1e-12, f"(m={m}, r={r}, w={w}): rel={rel:g}"
    _budget(t0, 10.0, "criterion 6 (DP == recursion)")


def test_criterion_07_assumption1_deviation():
    """(3,1,4): joint 0.2, product (19/35)^3, ratio 1.2501... to 1e-9;
    the m-trend emits and reproduces run to run."""
    t0 = time.perf_counter()
    rep = analysis.assumption1_deviation(3, 1, 4)
    assert rep.joint == Fraction(1, 5)
    assert rep.product == Fraction(19, 35) ** 3
    assert float(rep.product) == pytest.approx(0.159977, abs=5e-7)
    # independent recomputation of the ratio from its two exact factors
    expected_ratio = Fraction(1, 5) / Fraction(19, 35) ** 3
    assert rep.ratio == expected_ratio
    assert abs(float(rep.ratio) - float(expected_ratio)) <= 1e-9
    assert f"{float(rep.ratio):.6f}".startswith("1.2501")

    trend_a = analysis.assumption1_trend([3, 4, 5])
    trend_b = analysis.assumption1_trend([3, 4, 5])
    assert [(x.m, x.w, x.ratio) for x in trend_a] == [(x.m, x.w, x.ratio) for x in trend_b]
    assert [x.w for x in trend_a] == [4, 8, 16]  # w = n/2 per length
    _budget(t0, 10.0, "criterion 7 (independence deviation)")


def test_criterion_08_exponent_oracle_equivalence():
    """Grouped exponent == ungrouped 2^8 x 2^8 double sum; E(0) = 0;
    closed-form slope == central finite difference; channel == source."""
    t0 = time.perf_counter()
    built = rm.trim_to_full_rank(rm.build_full_rm_matrix(3, 1))
    g = built.matrix
    n = 8

    # independent null weight profile by brute force
    words = _all_words(n)
    in_null = ((words.astype(np.int64) @ g.bits().astype(np.int64)) % 2 == 0).all(axis=1)
    weights = np.bincount(words[in_null].sum(axis=1), minlength=n + 1)
    q = np.array([w / math.comb(n, d) for d, w in enumerate(weights)])

    pops = words.sum(axis=1)
    dist = (words[:, None, :] ^ words[None, :, :]).sum(axis=2)

    def brute(theta: float, gamma: float) -> float:
        s = 1.0 / (1.0 + gamma)
        p_s = (theta**pops * (1.0 - theta) ** (n - pops)) ** s
        inner = (p_s[None, :] * q[dist]).sum(axis=1)
        return -math.log2(float((p_s * inner**gamma).sum())) / n

    for gamma in (0.25, 0.5, 1.0):
        a = analysis.source_exponent(n, weights, 0.11, gamma)
        b = brute(0.11, gamma)
        assert abs(a - b) <= 1e-10, f"gamma={gamma}: {a} vs {b}"

    # E(0) = 0 everywhere (both shapes, a grid of sources, channel form)
    w42 = rm.null_space_weight_enumerator(
        rm.trim_to_full_rank(rm.build_full_rm_matrix(4, 2)).matrix
    )
    for theta in (0.05, 0.11, 0.3, 0.5):
        assert abs(analysis.source_exponent(n, weights, theta, 0.0)) <= 1e-12
        assert abs(analysis.source_exponent(16, w42, theta, 0.0)) <= 1e-12
        assert abs(analysis.channel_exponent(np.full(n, theta), weights, 0.0)) <= 1e-12

    # slope at zero: closed form against a Richardson-refined central
    # difference (E(0) = 0 exactly, so f(h) = E(2h)/2h is centered at h)
    def fd_slope(theta: float) -> float:
        def f(h: float) -> float:
            return analysis.source_exponent(n, weights, theta, 2 * h) / (2 * h)

        h = 1e-4
        return 2.0 * f(h / 2) - f(h)

    for theta in (0.02, 0.11, 0.3):
        closed = analysis.exponent_derivative_at_zero(n, weights, theta)
        assert abs(closed - fd_slope(theta)) <= 1e-5, f"theta={theta}"
    # the fair-coin identity: slope == l/n - 1 when every source word is
    # equiprobable and the matrix has full column rank
    closed_half = analysis.exponent_derivative_at_zero(n, weights, 0.5)
    assert abs(closed_half - (built.l / n - 1.0)) <= 1e-12

    # a constant crossover profile reduces the channel form to the source form
    for gamma in (0.25, 0.5, 1.0):
        a = analysis.source_exponent(n, weights, 0.11, gamma)
        c = analysis.channel_exponent(np.full(n, 0.11), weights, gamma)
        assert abs(a - c) <= 1e-10
    _budget(t0, 60.0, "criterion 8 (exponent oracle equivalence)")


def test_criterion_09_decoder_optimality():
    """ML == total-enumeration argmax at n = 12; ML beats (or ties) both
    naive baselines over 10^4 trials, by margins far beyond 3 sigma."""
    t0 = time.perf_counter()

    # --- part 1: exact agreement with a full-space scan, n = 12
    n, l = 12, 6
    rng0 = harness.trial_rng(SEED, 90)
    g = gf2.BitMatrix.from_bits(rng0.integers(0, 2, (n, l), dtype=np.uint8))
    words = _all_words(n)
    images = (words.astype(np.int64) @ g.bits().astype(np.int64)) % 2
    thetas = rng0.uniform(0.05, 0.45, n)
    costs = np.log((1.0 - thetas) / thetas)
    for k in range(200):
        rng = harness.trial_rng(SEED, 100 + k)
        u = channels.SourceModel(0.25).sample(n, rng)
        x = gf2.vec_mat_mul(u, g)
        feasible = np.nonzero((images == x.bits()).all(axis=1))[0]
        keys = [math.fsum(costs[words[i].astype(bool)]) for i in feasible]
        best = min(keys)
        winners = [i for i, key in zip(feasible, keys) if key == best]
        res = decoders.ml_source_decode(g, x, thetas)
        assert np.array_equal(res.estimate.bits(), words[winners[0]])
        assert res.tie_error == (len(winners) > 1)

    # --- part 2: source coding at (m=4, theta=0.02, rate 1/2) vs zero guess
    built = rm.trim_to_full_rank(rm.build_full_rm_matrix(4, 2), 8, harness.trial_rng(SEED, 91))
    g16 = built.matrix
    src = channels.SourceModel(0.02)
    ml_err = zero_err = 0
    trials = 10_000
    for k in range(trials):
        rng = harness.trial_rng(SEED, 200_000 + k)
        u = src.sample(16, rng)
        x = gf2.vec_mat_mul(u, g16)
        res = decoders.ml_source_decode(g16, x, 0.02)
        ml_err += (res.estimate != u) or res.tie_error
        zero_err += decoders.zero_word_decode(16).estimate != u
    p_ml, p_zero = ml_err / trials, zero_err / trials
    sigma = math.sqrt(
        p_ml * (1 - p_ml) / trials + p_zero * (1 - p_zero) / trials
    )
    assert p_ml <= p_zero + 3 * sigma, f"{p_ml} vs zero-guess {p_zero}"

    # --- part 3: channel coding over BSC(0.05) vs trusting the hard word
    ch = channels.Bsc(0.05)
    nullb = gf2.null_space_basis(g16)
    from rmlab import _kernels

    ml_err = hard_err = 0
    for k in range(trials):
        rng = harness.trial_rng(SEED, 300_000 + k)
        sel = rng.integers(0, 2, nullb.rows, dtype=np.uint8)
        c = gf2.BitVec(16, _kernels.xor_select_rows(nullb.buf, sel))
        prof = ch.observe(c, rng, truth=c)
        res = decoders.channel_decode(g16, prof)
        ml_err += (res.estimate != c) or res.tie_error
        hard_err += decoders.hard_word_decode(prof).estimate != c
    p_ml, p_hard = ml_err / trials, hard_err / trials
    sigma = math.sqrt(
        p_ml * (1 - p_ml) / trials + p_hard * (1 - p_hard) / trials
    )
    assert p_ml <= p_hard + 3 * sigma, f"{p_ml} vs hard-word {p_hard}"
    _budget(t0, 120.0, "criterion 9 (decoder optimality)")


def test_criterion_10_channel_transform_identities():
    """Equivalent-crossover identities per channel, plus BSC(0.11) capacity."""
    t0 = time.perf_counter()
    rng = harness.trial_rng(SEED, 10)
    x = gf2.BitVec.from_bits(rng.integers(0, 2, 4096, dtype=np.uint8))

    prof = channels.Bsc(0.07).observe(x, rng, truth=x)
    assert (prof.thetas == 0.07).all(), "BSC crossover must be p exactly"

    prof = channels.Bec(0.3).observe(x, rng, truth=x)
    assert set(np.unique(prof.thetas)) <= {0.0, 0.5}
    assert ((prof.thetas == 0.5) == (prof.llrs == 0.0)).all()
    assert (prof.error_pattern.bits()[prof.thetas == 0.0] == 0).all()

    # BI-AWGN: mean H2(theta_i) over 1e5 positions vs integrated H(U|V)
    ch = channels.BiAwgn(0.9)
    n = 100_000
    xx = gf2.BitVec.from_bits(rng.integers(0, 2, n, dtype=np.uint8))
    prof = ch.observe(xx, rng, truth=xx)
    th = prof.thetas
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(
            (th > 0) & (th < 1),
            -th * np.log2(th) - (1 - th) * np.log2(1 - th),
            0.0,
        )
    emp = float(terms.mean())
    assert emp == pytest.approx(channels.empirical_error_entropy(prof))
    truth = channels.info_measures(channels.SourceModel(0.5), ch).h_u_given_v
    sigma = float(terms.std(ddof=1)) / math.sqrt(n)
    assert abs(emp - truth) <= 3 * sigma, f"{emp} vs {truth} (sigma {sigma:g})"

    cap = channels.Bsc(0.11).capacity()
    assert abs(cap - 0.5001) <= 5e-4
    _budget(t0, 30.0, "criterion 10 (channel transforms)")


def test_criterion_11_two_step_joint_map():
    """Full-list two-step decoding == vectorized joint MAP, 10^3 trials;
    genie coverage is non-decreasing in the list size."""
    t0 = time.perf_counter()
    n, l = 12, 6
    rng0 = harness.trial_rng(SEED, 92)
    g = gf2.BitMatrix.from_bits(rng0.integers(0, 2, (n, l), dtype=np.uint8))
    src = channels.SourceModel(0.2)
    ch1 = channels.BiAwgn(1.0)
    ch2 = channels.BiAwgn(0.8)

    words = _all_words(n)
    images = (words.astype(np.int64) @ g.bits().astype(np.int64)) % 2
    lp0, lp1 = src.log_prior()
    log_prior = (words * lp1 + (1 - words) * lp0).sum(axis=1)

    list_sizes = [1, 4, 16, 64, 256, 1024, 1 << n]
    hit_counts = [0] * len(list_sizes)
    trials = 1000
    min_gap = math.inf
    for k in range(trials):
        rng = harness.trial_rng(SEED, 400_000 + k)
        u = src.sample(n, rng)
        prof1 = ch1.observe(u, rng, truth=u)
        x = gf2.vec_mat_mul(u, g)
        y2 = ch2.transmit(x, rng)
        res, cand = decoders.two_step_list_decode(
            g, prof1, y2, ch2, src, 1 << n, return_list=True
        )
        # joint MAP over every word: prior + stage-1 evidence + coded evidence
        score = (
            log_prior
            - (words * prof1.llrs).sum(axis=1)
            - (images * ch2.llr(y2)).sum(axis=1)
        )
        order = np.argsort(-score)
        min_gap = min(min_gap, float(score[order[0]] - score[order[1]]))
        assert np.array_equal(res.estimate.bits(), words[order[0]]), f"trial {k}"
        assert not res.tie_error
        # the full list is nested, so one run scores every prefix
        where = np.nonzero((cand == u.bits()).all(axis=1))[0]
        assert where.size == 1  # full list covers the truth exactly once
        for j, size in enumerate(list_sizes):
            hit_counts[j] += int(where[0] < size)
    assert min_gap > 1e-9, "score gaps too small for a well-posed comparison"
    coverage = [h / trials for h in hit_counts]
    assert all(a <= b for a, b in zip(coverage, coverage[1:]))
    assert coverage[-1] == 1.0
    _budget(t0, 120.0, "criterion 11 (two-step == joint MAP)")


def test_criterion_12_minimum_distance_trend():
    """Rate-1/2 order table vs independent binomial-sum recomputation."""
    t0 = time.perf_counter()
    table = rm.proposition1_table(0.5, list(range(3, 21)))
    assert len(table) == 18
    for row in table:
        m = row.m
        # smallest r whose cumulative binomial sum reaches half the length
        r = next(
            r for r in range(m + 1)
            if sum(math.comb(m, i) for i in range(r + 1)) >= 0.5 * (1 << m)
        )
        assert row.r == r
        assert row.m_minus_r == m - r
        assert row.d_min == 1 << (m - r)
    by_m = {row.m: row for row in table}
    assert by_m[5].r == 2 and by_m[7].r == 3
    assert by_m[20].m_minus_r > by_m[3].m_minus_r
    _budget(t0, 1.0, "criterion 12 (minimum-distance trend)")
