import math

import numpy as np
import pytest

from rmlab import channels, gf2
from rmlab.errors import ConfigError


def test_source_model_entropy_and_sampling():
    src = channels.SourceModel(0.2)
    assert math.isclose(src.entropy(), -(0.2 * math.log2(0.2) + 0.8 * math.log2(0.8)))
    rng = np.random.default_rng(0)
    u = src.sample(10_000, rng)
    assert abs(u.weight() / 10_000 - 0.2) < 0.02
    with pytest.raises(ConfigError):
        channels.SourceModel(0.7)


def test_bsc_llr_and_transmit():
    ch = channels.parse_channel("bsc:p=0.1")
    u = gf2.BitVec.from01("0101")
    rng = np.random.default_rng(1)
    y = ch.transmit(u, rng)
    mag = math.log(0.9 / 0.1)
    llr = ch.llr(y)
    assert np.allclose(np.abs(llr), mag)
    # sign convention: llr > 0 favors bit 0
    assert ((llr > 0) == (y == 0)).all()


def test_bsc_theta_is_p_exactly():
    ch = channels.parse_channel("bsc:p=0.07")
    rng = np.random.default_rng(2)
    u = gf2.BitVec.zeros(64)
    prof = ch.observe(u, rng, truth=u)
    assert np.all(prof.thetas == 0.07)


def test_bec_llr_partition():
    ch = channels.parse_channel("bec:eps=0.4")
    rng = np.random.default_rng(3)
    u = gf2.BitVec.from01("1" * 50 + "0" * 50)
    prof = ch.observe(u, rng, truth=u)
    assert set(np.unique(prof.thetas)) <= {0.0, 0.5}
    erased = prof.thetas == 0.5
    # unerased positions are received verbatim; erased ones are fair coins
    kept = ~erased
    assert np.array_equal(prof.hard.bits()[kept], u.bits()[kept])
    assert 0.2 < erased.mean() < 0.6


def test_biawgn_llr_formula():
    ch = channels.parse_channel("biawgn:sigma=0.8")
    y = np.array([1.3, -0.2])
    assert np.allclose(ch.llr(y), 2.0 * y / 0.64)


def test_noiseless_and_erased_extremes():
    nl = channels.parse_channel("noiseless")
    er = channels.parse_channel("erased")
    rng = np.random.default_rng(4)
    u = gf2.BitVec.from01("10110")
    prof = nl.observe(u, rng, truth=u)
    assert prof.hard == u and np.all(prof.thetas == 0.0)
    prof2 = er.observe(u, rng, truth=u)
    assert np.all(prof2.thetas == 0.5)
    assert math.isclose(nl.capacity(), 1.0)
    assert math.isclose(er.capacity(), 0.0)


def test_parse_channel_rejects_garbage():
    for text in ("bsc", "bsc:p=0.6", "bec:eps=2", "foo:bar=1", "biawgn:sigma=-1"):
        with pytest.raises(ConfigError):
            channels.parse_channel(text)


def test_bsc_capacity_closed_form():
    for p in (0.05, 0.11, 0.25):
        ch = channels.parse_channel(f"bsc:p={p}")
        h = -(p * math.log2(p) + (1 - p) * math.log2(1 - p))
        assert math.isclose(ch.capacity(), 1 - h, rel_tol=1e-12)


def test_bec_capacity_closed_form():
    ch = channels.parse_channel("bec:eps=0.3")
    assert math.isclose(ch.capacity(), 0.7, rel_tol=1e-12)


def test_capacity_against_monte_carlo_mutual_information():
    # I(U;V) estimated by sampling and scoring both likelihoods
    rng = np.random.default_rng(5)
    trials = 200_000
    for spec in ("bsc:p=0.11", "bec:eps=0.25"):
        ch = channels.parse_channel(spec)
        u = gf2.BitVec.from_bits(rng.integers(0, 2, trials, dtype=np.uint8))
        y = ch.transmit(u, rng)
        l0, l1 = ch.log_likelihoods(y)
        sent = np.where(u.bits().astype(bool), l1, l0)
        mix = np.logaddexp(l0 + math.log(0.5), l1 + math.log(0.5))
        samples = (sent - mix) / math.log(2)
        est = samples.mean()
        sigma = samples.std(ddof=1) / math.sqrt(trials)
        assert abs(est - ch.capacity()) < 3 * sigma + 1e-9


def test_biawgn_capacity_against_quadrature():
    scipy = pytest.importorskip("scipy")
    from scipy.integrate import quad

    sigma = 0.8
    ch = channels.parse_channel(f"biawgn:sigma={sigma}")

    def integrand(y):
        p0 = math.exp(-((y - 1) ** 2) / (2 * sigma**2))
        p1 = math.exp(-((y + 1) ** 2) / (2 * sigma**2))
        norm = 1.0 / math.sqrt(2 * math.pi * sigma**2)
        mix = 0.5 * (p0 + p1) * norm
        if mix <= 0:
            return 0.0
        # -E[log2 mix] - h(noise) in bits
        return -mix * math.log2(mix)

    h_v, _ = quad(integrand, -12, 12, limit=200)
    h_noise = 0.5 * math.log2(2 * math.pi * math.e * sigma**2)
    assert abs(ch.capacity() - (h_v - h_noise)) < 1e-6


def test_hard_decision_fair_coin_on_zero_llr():
    rng = np.random.default_rng(6)
    llrs = np.zeros(20_000)
    truth = gf2.BitVec.zeros(20_000)
    prof = channels.hard_decision(llrs, rng, truth)
    frac = prof.hard.weight() / 20_000
    assert abs(frac - 0.5) < 0.02
    assert np.all(prof.thetas == 0.5)


def test_error_pattern_tracks_truth():
    ch = channels.parse_channel("bsc:p=0.3")
    rng = np.random.default_rng(7)
    u = gf2.BitVec.from_bits(rng.integers(0, 2, 500, dtype=np.uint8))
    prof = ch.observe(u, rng, truth=u)
    assert prof.error_pattern == (prof.hard ^ u)


def test_symmetry_reports():
    for spec in ("bsc:p=0.2", "bec:eps=0.3", "biawgn:sigma=1.1", "noiseless", "erased"):
        rep = channels.check_symmetry(channels.parse_channel(spec))
        assert rep.ok, spec


def test_symmetry_detects_asymmetric_channel():
    class Skewed(channels.Bsc):
        # P(0|1) != P(1|0): no involution can pair the outputs
        def symbol_probs(self):
            return {0: (0.8, 0.3), 1: (0.2, 0.7)}

    rep = channels.check_symmetry(Skewed(0.2))
    assert not rep.ok
    assert rep.max_deviation > 0.05


def test_info_measures_uniform_source():
    src = channels.SourceModel(0.5)
    ch = channels.parse_channel("bsc:p=0.11")
    meas = channels.info_measures(src, ch)
    assert math.isclose(meas.h_u, 1.0)
    assert math.isclose(meas.h_u_given_v, 1.0 - ch.capacity(), rel_tol=1e-12)


def test_empirical_error_entropy_matches_conditional_entropy():
    ch = channels.parse_channel("biawgn:sigma=0.9")
    src = channels.SourceModel(0.5)
    rng = np.random.default_rng(8)
    n = 100_000
    u = src.sample(n, rng)
    prof = ch.observe(u, rng, truth=u)
    per_pos = channels._entropy_of_sigmoid(np.abs(prof.llrs))
    est = channels.empirical_error_entropy(prof)
    sigma = per_pos.std(ddof=1) / math.sqrt(n)
    want = ch.cond_entropy(0.5)
    assert abs(est - want) < 3 * sigma
