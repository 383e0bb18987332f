"""Numerical verification of the combinatorial machinery.

Three families of computations, all exact unless noted:

- Even-split probabilities: the chance that a uniformly random weight-w
  word meets every cell of a partition an even number of times.  Computed
  two independent ways — a generating-function DP over the cell sizes and
  a dyadic halving recursion — which must agree.

- Permutation-ensemble indicators: for a fixed generator G and a random
  position permutation, E[1{(w Pi) G == 0}] equals A_w / C(n, w) where A
  is the left-null-space weight distribution.  Verified exactly, by Monte
  Carlo sampling of supports, and exhaustively over all n! permutations
  at n = 8.

- Error exponents: the Gallager-style bound
  E(gamma) = -(1/n) log2 sum_u P(u)^{1/(1+gamma)}
             (sum_w P(w)^{1/(1+gamma)} q(d(u, w)))^gamma,   q(d) = A_d / C(n, d),
  grouped over weight/overlap classes in base-2 log domain, its closed
  derivative at gamma = 0, and the time-varying-crossover variant used
  for channel coding.  The block-error bound is 2^{-n max_gamma E}.

The typicality window for the bounded-probability item is the closed
integer interval [ceil(n*eps), floor(n*(1-eps))].
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels, gf2, rm
from .errors import ConfigError, GuardExceeded
from .stats import binary_entropy, wilson_interval

__all__ = [
    "EXPONENT_GUARD_BITS",
    "IndicatorStats",
    "Lemma1Row",
    "Assumption1Report",
    "ExponentReport",
    "even_split_probability_dp",
    "balls_recursive_probability",
    "exact_indicator_expectation",
    "mc_indicator_expectation",
    "lemma1_report",
    "assumption1_deviation",
    "assumption1_trend",
    "source_exponent",
    "exponent_derivative_at_zero",
    "channel_exponent",
    "channel_exponent_derivative",
    "exponent_curve",
]

# Exponent sums run over 2^n error patterns (channel variant) and dense
# (a, d, k) classes; lengths beyond this are refused.
EXPONENT_GUARD_BITS = 16


def _convolve_int(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


@lru_cache(maxsize=None)
def _even_split_counts(group_sizes: tuple[int, ...], free: int) -> tuple[int, ...]:
    """Coefficient c_w = number of weight-w words meeting every group an
    even number of times (free positions unconstrained)."""
    poly = [1]
    for size in group_sizes:
        even = [math.comb(size, j) if j % 2 == 0 else 0 for j in range(size + 1)]
        poly = _convolve_int(poly, even)
    if free:
        poly = _convolve_int(poly, [math.comb(free, j) for j in range(free + 1)])
    return tuple(poly)


def even_split_probability_dp(
    group_sizes, w: int, n_total: int | None = None
) -> Fraction:
    """P(every group overlap is even) for a uniform weight-w word.

    Groups must be disjoint; positions beyond sum(group_sizes) up to
    n_total (if given) are unconstrained.  Exact at every size.
    """
    sizes = tuple(int(s) for s in group_sizes)
    if any(s < 0 for s in sizes):
        raise ConfigError("group sizes must be nonnegative")
    covered = sum(sizes)
    n = covered if n_total is None else int(n_total)
    if n < covered:
        raise ConfigError(f"n_total={n} smaller than the groups' span {covered}")
    if not 0 <= w <= n:
        raise ConfigError(f"weight w={w} outside [0, {n}]")
    counts = _even_split_counts(sizes, n - covered)
    c = counts[w] if w < len(counts) else 0
    return Fraction(c, math.comb(n, w))


@lru_cache(maxsize=None)
def _balls_rec(m: int, r: int, w: int, exact: bool):
    if r == 0:
        if w % 2 == 0:
            return Fraction(1) if exact else 1.0
        return Fraction(0) if exact else 0.0
    n = 1 << m
    h = n >> 1
    jlo, jhi = max(0, w - h), min(h, w)
    if exact:
        total = Fraction(0)
        for j in range(jlo, jhi + 1):
            pl = _balls_rec(m - 1, r - 1, j, True)
            if pl:
                pr = _balls_rec(m - 1, r - 1, w - j, True)
                if pr:
                    coef = Fraction(math.comb(h, j) * math.comb(h, w - j), math.comb(n, w))
                    total += coef * pl * pr
        return total
    # Float mode: hypergeometric pmf advanced by exact small-integer
    # ratios from one correctly rounded starting value; every term is
    # positive, so the accumulated relative error stays near 1e-14.
    pmf = float(Fraction(math.comb(h, jlo) * math.comb(h, w - jlo), math.comb(n, w)))
    total = 0.0
    for j in range(jlo, jhi + 1):
        pl = _balls_rec(m - 1, r - 1, j, False)
        if pl:
            pr = _balls_rec(m - 1, r - 1, w - j, False)
            if pr:
                total += pmf * pl * pr
        if j < jhi:
            pmf *= (h - j) * (w - j) / ((j + 1) * (h - w + j + 1))
    return total


def balls_recursive_probability(m: int, r: int, w: int):
    """Even-split probability over the 2^r dyadic cells of size 2^(m-r),
    by halving recursion.

    Independent of the DP path: splits the word into two halves with
    hypergeometric weights and requires both halves to split evenly one
    level down.  Exact Fraction for lengths up to 64, float64 beyond
    (relative error well under 1e-12).
    """
    if not 0 <= r <= m:
        raise ConfigError(f"order r={r} outside [0, m={m}]")
    if not 0 <= w <= (1 << m):
        raise ConfigError(f"weight w={w} outside [0, {1 << m}]")
    return _balls_rec(m, r, w, (1 << m) <= 64)


@dataclass(frozen=True)
class IndicatorStats:
    w: int
    trials: int
    hits: int
    estimate: object
    ci_lo: float
    ci_hi: float
    exhaustive: bool


def exact_indicator_expectation(g: gf2.BitMatrix, w: int) -> Fraction:
    """E over uniform position permutations of 1{(w-word) Pi G == 0},
    exactly A_w / C(n, w) by symmetry of the ensemble."""
    n = g.rows
    if not 0 <= w <= n:
        raise ConfigError(f"weight w={w} outside [0, {n}]")
    weights = rm.null_space_weight_enumerator(g)
    return Fraction(int(weights[w]), math.comb(n, w))


def mc_indicator_expectation(
    g: gf2.BitMatrix,
    w: int,
    trials: int,
    rng: np.random.Generator | None = None,
    exhaustive: bool = False,
) -> IndicatorStats:
    """Permutation-ensemble indicator by sampling.

    A permuted fixed-weight word is uniform over weight-w supports, so
    trials draw supports directly.  With exhaustive=True (n <= 8) every
    support class is enumerated and the estimate is the exact ensemble
    average over all n! permutations, as a Fraction.
    """
    n = g.rows
    if not 0 <= w <= n:
        raise ConfigError(f"weight w={w} outside [0, {n}]")
    if exhaustive:
        if n > 8:
            raise GuardExceeded(f"exhaustive permutations need n <= 8, got n={n}")
        combos = list(itertools.combinations(range(n), w))
        supports = np.array(combos, dtype=np.int64).reshape(len(combos), w)
        hits = _kernels.syndrome_zero_count(g.buf, supports)
        est = Fraction(hits, supports.shape[0])
        return IndicatorStats(
            w=w,
            trials=math.factorial(n),
            hits=hits * math.factorial(w) * math.factorial(n - w),
            estimate=est,
            ci_lo=float(est),
            ci_hi=float(est),
            exhaustive=True,
        )
    if rng is None:
        raise ConfigError("rng is required unless exhaustive=True")
    supports = np.argsort(rng.random((trials, n)), axis=1)[:, :w].astype(np.int64)
    supports = np.ascontiguousarray(supports)
    hits = _kernels.syndrome_zero_count(g.buf, supports)
    lo, hi = wilson_interval(hits, trials)
    return IndicatorStats(
        w=w,
        trials=trials,
        hits=hits,
        estimate=hits / trials,
        ci_lo=lo,
        ci_hi=hi,
        exhaustive=False,
    )


@dataclass(frozen=True)
class Lemma1Row:
    """One weight's even-split facts against the claimed behavior.

    item is 'certain' (w in {0, n}), 'impossible' (odd weight or inside a
    forbidden gap around the ends), 'typical' (inside the epsilon window,
    where the (1/2 + delta)^dim bound applies asymptotically), or 'other'.
    flag is 'pass'/'fail' for exact items and 'pass'/'asymptotic' for the
    typical bound, which finite lengths may legitimately exceed.
    """

    w: int
    item: str
    block_prob: Fraction
    block_bound: float | None
    full_prob: Fraction | None
    full_bound: float | None
    flag: str


def lemma1_report(
    m: int,
    r: int,
    delta: float = 0.05,
    epsilon: float = 0.05,
    w_list=None,
    guard_bits: int = rm.ENUM_GUARD_BITS,
) -> list[Lemma1Row]:
    """Even-split behavior of one block and of the full construction.

    block_prob is the exact DP probability that a weight-w word splits
    evenly across one block's 2^r cells; full_prob is the exact
    permutation-ensemble probability that it lands in the full matrix's
    null space (None when both enumeration routes exceed the guard).
    """
    params = rm.RmParams(m, r)
    n = params.n
    if w_list is None:
        w_list = range(n + 1)
    cells = (1 << (m - r),) * (1 << r)
    full = rm.build_full_rm_matrix(m, r)
    try:
        null_weights = rm.null_space_weight_enumerator(full.matrix, guard_bits)
    except GuardExceeded:
        null_weights = None

    gap = 1 << (r + 1)
    lo_typ = math.ceil(n * epsilon)
    hi_typ = math.floor(n * (1.0 - epsilon))
    block_bound = (0.5 + delta) ** (1 << r)
    full_bound = (0.5 + delta) ** params.dim

    rows = []
    for w in w_list:
        block_p = even_split_probability_dp(cells, w)
        full_p = (
            Fraction(int(null_weights[w]), math.comb(n, w))
            if null_weights is not None
            else None
        )
        if w in (0, n):
            item = "certain"
            ok = block_p == 1 and (full_p is None or full_p == 1)
            flag = "pass" if ok else "fail"
            rows.append(Lemma1Row(w, item, block_p, None, full_p, None, flag))
            continue
        odd = w % 2 == 1
        if odd or w < gap or w > n - gap:
            item = "impossible"
            ok = (full_p is None or full_p == 0) and (not odd or block_p == 0)
            flag = "pass" if ok else "fail"
            rows.append(Lemma1Row(w, item, block_p, None, full_p, None, flag))
            continue
        if lo_typ <= w <= hi_typ:
            ok = block_p <= block_bound and (full_p is None or full_p <= full_bound)
            flag = "pass" if ok else "asymptotic"
            rows.append(
                Lemma1Row(w, "typical", block_p, block_bound, full_p, full_bound, flag)
            )
            continue
        rows.append(Lemma1Row(w, "other", block_p, None, full_p, None, "pass"))
    return rows


@dataclass(frozen=True)
class Assumption1Report:
    """Joint versus product-of-marginals even-split probability.

    ratio == 1 would mean the per-block events were exactly independent;
    the deviation |ratio - 1| is the quantity expected to shrink as m
    grows.  degenerate marks 0/0 (both sides impossible), reported as
    ratio 1."""

    m: int
    r: int
    w: int
    joint: Fraction
    marginal: Fraction
    product: Fraction
    ratio: Fraction
    degenerate: bool


def assumption1_deviation(
    m: int, r: int, w: int, guard_bits: int = rm.ENUM_GUARD_BITS
) -> Assumption1Report:
    """Exact independence deviation for the t = C(m, r) block events."""
    params = rm.RmParams(m, r)
    cells = (1 << (m - r),) * (1 << r)
    marginal = even_split_probability_dp(cells, w)
    full = rm.build_full_rm_matrix(m, r)
    joint = exact_indicator_expectation(full.matrix, w)
    product = marginal**params.t
    if joint == 0 and product == 0:
        return Assumption1Report(m, r, w, joint, marginal, product, Fraction(1), True)
    return Assumption1Report(m, r, w, joint, marginal, product, joint / product, False)


def assumption1_trend(m_list, r: int = 1) -> list[Assumption1Report]:
    """Deviation at the balanced weight w = n/2 across lengths."""
    return [assumption1_deviation(m, r, (1 << m) // 2) for m in m_list]


def _logsumexp2(terms: list[float]) -> float:
    peak = max(terms, default=-math.inf)
    if peak == -math.inf:
        return -math.inf
    return peak + math.log2(sum(2.0 ** (t - peak) for t in terms))


def _check_exponent_args(n: int, null_weights, gamma: float) -> np.ndarray:
    if n > EXPONENT_GUARD_BITS:
        raise GuardExceeded(
            f"exponent evaluation is limited to n <= {EXPONENT_GUARD_BITS}, got {n}"
        )
    weights = np.asarray(null_weights, dtype=np.int64)
    if weights.shape != (n + 1,):
        raise ConfigError(f"need n+1={n + 1} null-space weights, got {weights.shape}")
    if gamma <= -1.0:
        raise ConfigError("gamma must exceed -1")
    return weights


def _log_q(n: int, weights: np.ndarray, min_weight_frac: float) -> list[float | None]:
    out: list[float | None] = []
    for d in range(n + 1):
        a = int(weights[d])
        if a == 0 or d < n * min_weight_frac:
            out.append(None)
        else:
            out.append(math.log2(a) - math.log2(math.comb(n, d)))
    return out


def source_exponent(
    n: int,
    null_weights,
    theta: float,
    gamma: float,
    min_weight_frac: float = 0.0,
) -> float:
    """E(gamma) for the Bernoulli(theta) source and the permutation
    ensemble with null-space weights A_d, in bits.

    Grouped over (|u|, |f|, |f on supp(u)|) classes in base-2 log domain;
    min_weight_frac > 0 drops q(d) for d < n * min_weight_frac (an
    optional refinement; it weakens nothing when 0)."""
    if not 0.0 < theta <= 0.5:
        raise ConfigError(f"theta={theta} outside (0, 0.5]")
    weights = _check_exponent_args(n, null_weights, gamma)
    logq = _log_q(n, weights, min_weight_frac)
    s = 1.0 / (1.0 + gamma)
    lt, lnt = math.log2(theta), math.log2(1.0 - theta)

    outer_terms: list[float] = []
    for a in range(n + 1):
        log_outer = math.log2(math.comb(n, a)) + s * (a * lt + (n - a) * lnt)
        if gamma == 0.0:
            outer_terms.append(log_outer)
            continue
        inner_terms: list[float] = []
        for d in range(n + 1):
            lq = logq[d]
            if lq is None:
                continue
            k_terms = [
                math.log2(math.comb(a, k))
                + math.log2(math.comb(n - a, d - k))
                + s * ((a + d - 2 * k) * lt + (n - a - d + 2 * k) * lnt)
                for k in range(max(0, d - (n - a)), min(a, d) + 1)
            ]
            inner_terms.append(lq + _logsumexp2(k_terms))
        log_inner = _logsumexp2(inner_terms)
        if log_inner == -math.inf:
            continue
        outer_terms.append(log_outer + gamma * log_inner)
    return -_logsumexp2(outer_terms) / n


def _inner_at_s1(n: int, a: int, q: np.ndarray, theta: float) -> float:
    total = 0.0
    for d in range(n + 1):
        if q[d] == 0.0:
            continue
        acc = 0.0
        for k in range(max(0, d - (n - a)), min(a, d) + 1):
            wgt = a + d - 2 * k
            acc += (
                math.comb(a, k)
                * math.comb(n - a, d - k)
                * theta**wgt
                * (1.0 - theta) ** (n - wgt)
            )
        total += q[d] * acc
    return total


def _q_floats(n: int, weights: np.ndarray, min_weight_frac: float) -> np.ndarray:
    q = np.zeros(n + 1)
    for d in range(n + 1):
        if int(weights[d]) and d >= n * min_weight_frac:
            q[d] = int(weights[d]) / math.comb(n, d)
    return q


def exponent_derivative_at_zero(
    n: int,
    null_weights,
    theta: float,
    min_weight_frac: float = 0.0,
) -> float:
    """dE/dgamma at 0, closed form:
    -H2(theta) - (1/n) sum_a C(n,a) theta^a (1-theta)^(n-a) log2 I(a)
    with I(a) = sum_w P(w) q(d(u, w)) for any |u| = a."""
    if not 0.0 < theta <= 0.5:
        raise ConfigError(f"theta={theta} outside (0, 0.5]")
    weights = _check_exponent_args(n, null_weights, 0.0)
    q = _q_floats(n, weights, min_weight_frac)
    acc = 0.0
    for a in range(n + 1):
        p_a = math.comb(n, a) * theta**a * (1.0 - theta) ** (n - a)
        acc += p_a * math.log2(_inner_at_s1(n, a, q, theta))
    return -binary_entropy(theta) - acc / n


def _channel_polynomials(
    thetas: np.ndarray, s: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per error pattern e: outer weight prod_i P_i(e_i)^s and the flip
    polynomial coefficients [x^j] prod_i (P_i(e_i)^s + P_i(1-e_i)^s x)."""
    n = thetas.size
    size = 1 << n
    e_index = np.arange(size)
    coeffs = np.zeros((size, n + 1))
    coeffs[:, 0] = 1.0
    outer = np.ones(size)
    for i in range(n):
        bit = ((e_index >> i) & 1).astype(bool)
        p_same = np.where(bit, thetas[i], 1.0 - thetas[i]) ** s
        p_flip = np.where(bit, 1.0 - thetas[i], thetas[i]) ** s
        shifted = coeffs[:, :-1] * p_flip[:, None]
        coeffs *= p_same[:, None]
        coeffs[:, 1:] += shifted
        outer *= p_same
    return outer, coeffs


def channel_exponent(
    thetas,
    null_weights,
    gamma: float,
    min_weight_frac: float = 0.0,
) -> float:
    """E(gamma) for a time-varying crossover profile (channel coding).

    Reduces exactly to source_exponent when the profile is constant."""
    thetas = np.asarray(thetas, dtype=np.float64)
    n = thetas.size
    weights = _check_exponent_args(n, null_weights, gamma)
    if np.any((thetas < 0.0) | (thetas > 0.5)):
        raise ConfigError("crossover profile entries must lie in [0, 0.5]")
    q = _q_floats(n, weights, min_weight_frac)
    s = 1.0 / (1.0 + gamma)
    outer, coeffs = _channel_polynomials(thetas, s)
    inner = coeffs @ q
    if gamma == 0.0:
        total = outer.sum()
    else:
        total = float((outer * np.where(inner > 0.0, inner, 0.0) ** gamma).sum())
    return -math.log2(total) / n


def channel_exponent_derivative(
    thetas,
    null_weights,
    min_weight_frac: float = 0.0,
) -> float:
    """dE/dgamma at 0 for the time-varying profile:
    -(1/n) sum_i H2(theta_i) - (1/n) E_e[log2 I(e)]."""
    thetas = np.asarray(thetas, dtype=np.float64)
    n = thetas.size
    weights = _check_exponent_args(n, null_weights, 0.0)
    q = _q_floats(n, weights, min_weight_frac)
    prob, coeffs = _channel_polynomials(thetas, 1.0)
    inner = coeffs @ q
    with np.errstate(divide="ignore"):
        logs = np.where(prob > 0.0, np.log2(np.where(inner > 0.0, inner, 1.0)), 0.0)
    h_terms = sum(binary_entropy(float(t)) for t in thetas)
    return -h_terms / n - float((prob * logs).sum()) / n


@dataclass(frozen=True)
class ExponentReport:
    """An exponent curve with its gamma = 0 diagnostics.

    bound_rhs = l/n - H(U) is the reference slope (equality at
    theta = 1/2); degenerate flags a nonpositive derivative, where the
    random-coding bound is vacuous at this rate."""

    gamma_grid: tuple[float, ...]
    values: tuple[float, ...]
    derivative_at_zero: float
    fd_derivative: float
    bound_rhs: float
    gamma_star: float
    e_star: float
    bler_bound: float
    degenerate: bool


def exponent_curve(
    n: int,
    null_weights,
    theta: float,
    gamma_grid,
    min_weight_frac: float = 0.0,
    fd_step: float = 1e-4,
) -> ExponentReport:
    """Evaluate E over a grid plus derivative cross-checks.

    The finite-difference derivative is central with the given step; l is
    recovered from sum_d A_d = 2^(n - l)."""
    weights = _check_exponent_args(n, null_weights, 0.0)
    total = int(weights.sum())
    l = n - int(round(math.log2(total)))
    grid = tuple(float(g) for g in gamma_grid)
    if any(g < 0 for g in grid):
        raise ConfigError("gamma grid entries must be nonnegative")
    values = tuple(
        source_exponent(n, weights, theta, g, min_weight_frac) for g in grid
    )
    deriv = exponent_derivative_at_zero(n, weights, theta, min_weight_frac)
    fd = (
        source_exponent(n, weights, theta, fd_step, min_weight_frac)
        - source_exponent(n, weights, theta, -fd_step, min_weight_frac)
    ) / (2.0 * fd_step)
    bound_rhs = l / n - binary_entropy(theta)
    i_star = int(np.argmax(values)) if values else 0
    gamma_star = grid[i_star] if values else 0.0
    e_star = values[i_star] if values else 0.0
    return ExponentReport(
        gamma_grid=grid,
        values=values,
        derivative_at_zero=deriv,
        fd_derivative=fd,
        bound_rhs=bound_rhs,
        gamma_star=gamma_star,
        e_star=e_star,
        bler_bound=2.0 ** (-n * e_star),
        degenerate=deriv <= 0.0,
    )
