"""Binary-input output-symmetric channels and the Bernoulli source.

Channels transmit packed GF(2) words and report log-likelihood ratios
r_i = ln P(y_i|0) - ln P(y_i|1).  Hard decisions threshold the LLR (fair
coin at exactly zero), and each position carries an equivalent crossover
probability theta_i = 1/(1 + e^{|r_i|}), turning any of these channels
into a time-varying binary symmetric channel for the decoders.

Discrete outputs use 0/1 plus ERASURE == 2; the Gaussian channel maps
bit b to the symbol 1 - 2b before adding noise.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from . import gf2
from .errors import ConfigError
from .stats import binary_entropy

__all__ = [
    "ERASURE",
    "SourceModel",
    "LlrProfile",
    "Channel",
    "Bsc",
    "Bec",
    "BiAwgn",
    "Noiseless",
    "TotallyErased",
    "InfoMeasures",
    "SymmetryReport",
    "parse_channel",
    "hard_decision",
    "info_measures",
    "empirical_error_entropy",
    "check_symmetry",
]

ERASURE = 2

_LN2 = math.log(2.0)

# Gauss-Hermite nodes shared by the Gaussian-channel integrals.
_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(127)


@dataclass(frozen=True)
class SourceModel:
    """Memoryless Bernoulli(theta) source, theta in (0, 1/2]."""

    theta: float

    def __post_init__(self) -> None:
        if not 0.0 < self.theta <= 0.5:
            raise ConfigError(f"source theta={self.theta} outside (0, 0.5]")

    def sample(self, n: int, rng: np.random.Generator) -> gf2.BitVec:
        return gf2.BitVec.from_bits((rng.random(n) < self.theta).astype(np.uint8))

    def entropy(self) -> float:
        return binary_entropy(self.theta)

    def log_prior(self) -> tuple[float, float]:
        """(ln P(0), ln P(1))."""
        return math.log(1.0 - self.theta), math.log(self.theta)


@dataclass(frozen=True)
class LlrProfile:
    """One received word, reduced to decoder inputs.

    llrs are ln P(y|0) - ln P(y|1) per position; hard is the thresholded
    word Z; thetas the per-position equivalent crossover probabilities;
    error_pattern is Z xor truth when the truth was supplied (genie view).
    """

    llrs: np.ndarray
    hard: gf2.BitVec
    thetas: np.ndarray
    error_pattern: gf2.BitVec | None = None


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _entropy_of_sigmoid(x: np.ndarray) -> np.ndarray:
    """H2(1/(1+e^x)) in bits, stable for large |x| and exact 0 at inf."""
    x = np.asarray(x, dtype=np.float64)
    finite = np.isfinite(x)
    out = np.zeros_like(x)
    xf = x[finite]
    p = _stable_sigmoid(-xf)
    q = _stable_sigmoid(xf)
    out[finite] = (p * np.logaddexp(0.0, xf) + q * np.logaddexp(0.0, -xf)) / _LN2
    return out


class Channel(ABC):
    """Binary-input channel interface."""

    name: str = "channel"

    @abstractmethod
    def spec_string(self) -> str:
        """Round-trippable textual form, e.g. 'bsc:p=0.05'."""

    @abstractmethod
    def transmit(self, x: gf2.BitVec, rng: np.random.Generator) -> np.ndarray:
        """One channel use per bit of x; returns the output word."""

    @abstractmethod
    def llr(self, y: np.ndarray) -> np.ndarray:
        """ln P(y|0) - ln P(y|1) per position."""

    @abstractmethod
    def log_likelihoods(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(ln P(y|0), ln P(y|1)) per position; -inf where impossible."""

    @abstractmethod
    def capacity(self) -> float:
        """Channel capacity in bits per use."""

    @abstractmethod
    def cond_entropy(self, theta: float) -> float:
        """H(U|V) in bits for U ~ Bernoulli(theta) sent through the channel."""

    def observe(
        self,
        x: gf2.BitVec,
        rng: np.random.Generator,
        truth: gf2.BitVec | None = None,
    ) -> LlrProfile:
        """Transmit x and reduce the output to a decoder profile."""
        return hard_decision(self.llr(self.transmit(x, rng)), rng, truth)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec_string()!r})"


def _log(p: float) -> float:
    return math.log(p) if p > 0.0 else -math.inf


class Bsc(Channel):
    """Binary symmetric channel with crossover probability p."""

    name = "bsc"

    def __init__(self, p: float):
        if not 0.0 <= p <= 0.5:
            raise ConfigError(f"bsc p={p} outside [0, 0.5]")
        self.p = p

    def spec_string(self) -> str:
        return f"bsc:p={self.p:g}"

    def transmit(self, x: gf2.BitVec, rng: np.random.Generator) -> np.ndarray:
        flips = (rng.random(x.n) < self.p).astype(np.uint8)
        return x.bits() ^ flips

    def llr(self, y: np.ndarray) -> np.ndarray:
        c = _log(1.0 - self.p) - _log(self.p)
        return np.where(y == 0, c, -c)

    def log_likelihoods(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        hit, miss = _log(1.0 - self.p), _log(self.p)
        return np.where(y == 0, hit, miss), np.where(y == 1, hit, miss)

    def capacity(self) -> float:
        return 1.0 - binary_entropy(self.p)

    def cond_entropy(self, theta: float) -> float:
        total = 0.0
        for v in (0, 1):
            like0 = 1.0 - self.p if v == 0 else self.p
            like1 = self.p if v == 0 else 1.0 - self.p
            pv = (1.0 - theta) * like0 + theta * like1
            if pv > 0.0:
                total += pv * binary_entropy(theta * like1 / pv)
        return total

    def observe(
        self,
        x: gf2.BitVec,
        rng: np.random.Generator,
        truth: gf2.BitVec | None = None,
    ) -> LlrProfile:
        # the equivalent crossover is exactly p; don't round-trip exp/log
        llrs = self.llr(self.transmit(x, rng))
        return hard_decision(llrs, rng, truth, thetas=np.full(x.n, self.p))

    def symbol_probs(self) -> dict[int, tuple[float, float]]:
        return {0: (1.0 - self.p, self.p), 1: (self.p, 1.0 - self.p)}

    def involution(self) -> dict[int, int]:
        return {0: 1, 1: 0}


class Bec(Channel):
    """Binary erasure channel with erasure probability eps."""

    name = "bec"

    def __init__(self, eps: float):
        if not 0.0 <= eps <= 1.0:
            raise ConfigError(f"bec eps={eps} outside [0, 1]")
        self.eps = eps

    def spec_string(self) -> str:
        return f"bec:eps={self.eps:g}"

    def transmit(self, x: gf2.BitVec, rng: np.random.Generator) -> np.ndarray:
        y = x.bits().astype(np.uint8).copy()
        y[rng.random(x.n) < self.eps] = ERASURE
        return y

    def llr(self, y: np.ndarray) -> np.ndarray:
        out = np.zeros(y.shape, dtype=np.float64)
        out[y == 0] = math.inf
        out[y == 1] = -math.inf
        return out

    def log_likelihoods(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        seen = _log(1.0 - self.eps)
        erased = _log(self.eps)
        l0 = np.where(y == 0, seen, np.where(y == ERASURE, erased, -math.inf))
        l1 = np.where(y == 1, seen, np.where(y == ERASURE, erased, -math.inf))
        return l0, l1

    def capacity(self) -> float:
        return 1.0 - self.eps

    def cond_entropy(self, theta: float) -> float:
        return self.eps * binary_entropy(theta)

    def symbol_probs(self) -> dict[int, tuple[float, float]]:
        return {
            0: (1.0 - self.eps, 0.0),
            1: (0.0, 1.0 - self.eps),
            ERASURE: (self.eps, self.eps),
        }

    def involution(self) -> dict[int, int]:
        return {0: 1, 1: 0, ERASURE: ERASURE}


class BiAwgn(Channel):
    """Binary-input additive white Gaussian noise channel, bit b -> 1 - 2b
    plus N(0, sigma^2) noise."""

    name = "biawgn"

    def __init__(self, sigma: float):
        if not sigma > 0.0:
            raise ConfigError(f"biawgn sigma={sigma} must be positive")
        self.sigma = sigma

    def spec_string(self) -> str:
        return f"biawgn:sigma={self.sigma:g}"

    def transmit(self, x: gf2.BitVec, rng: np.random.Generator) -> np.ndarray:
        signs = 1.0 - 2.0 * x.bits()
        return signs + self.sigma * rng.standard_normal(x.n)

    def llr(self, y: np.ndarray) -> np.ndarray:
        return 2.0 * np.asarray(y, dtype=np.float64) / (self.sigma * self.sigma)

    def log_likelihoods(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = np.asarray(y, dtype=np.float64)
        norm = -math.log(self.sigma * math.sqrt(2.0 * math.pi))
        var2 = 2.0 * self.sigma * self.sigma
        return norm - (y - 1.0) ** 2 / var2, norm - (y + 1.0) ** 2 / var2

    def _gh_outputs(self, mean: float) -> tuple[np.ndarray, np.ndarray]:
        y = math.sqrt(2.0) * self.sigma * _GH_NODES + mean
        return y, _GH_WEIGHTS / math.sqrt(math.pi)

    def capacity(self) -> float:
        y, w = self._gh_outputs(1.0)
        # E_{y|0}[log2(1 + e^{-r(y)})] under the symmetric-output measure.
        loss = np.logaddexp(0.0, -self.llr(y)) / _LN2
        return 1.0 - float(w @ loss)

    def cond_entropy(self, theta: float) -> float:
        rho = math.log((1.0 - theta) / theta) if theta < 0.5 else 0.0
        total = 0.0
        for b, prior in ((0, 1.0 - theta), (1, theta)):
            y, w = self._gh_outputs(1.0 - 2.0 * b)
            total += prior * float(w @ _entropy_of_sigmoid(self.llr(y) + rho))
        return total

    def density(self, y: np.ndarray, bit: int) -> np.ndarray:
        """Conditional output density p(y | bit)."""
        mean = 1.0 - 2.0 * bit
        z = (np.asarray(y, dtype=np.float64) - mean) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))


class Noiseless(Bsc):
    """Identity channel (crossover 0)."""

    name = "noiseless"

    def __init__(self):
        super().__init__(0.0)

    def spec_string(self) -> str:
        return "noiseless"


class TotallyErased(Bec):
    """Erase-everything channel (erasure probability 1)."""

    name = "erased"

    def __init__(self):
        super().__init__(1.0)

    def spec_string(self) -> str:
        return "erased"


def parse_channel(text: str) -> Channel:
    """Parse 'bsc:p=0.05', 'bec:eps=0.3', 'biawgn:sigma=0.8', 'noiseless',
    or 'erased' into a channel instance."""
    body = text.strip().lower()
    if body == "noiseless":
        return Noiseless()
    if body == "erased":
        return TotallyErased()
    kind, sep, rest = body.partition(":")
    params: dict[str, float] = {}
    if sep:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ConfigError(f"malformed channel parameter {item!r} in {text!r}")
            try:
                params[key.strip()] = float(value)
            except ValueError as exc:
                raise ConfigError(f"bad numeric value in channel spec {text!r}") from exc
    forms = {"bsc": ("p", Bsc), "bec": ("eps", Bec), "biawgn": ("sigma", BiAwgn)}
    if kind not in forms:
        raise ConfigError(
            f"unknown channel {text!r}; expected bsc:p=..., bec:eps=..., "
            "biawgn:sigma=..., noiseless, or erased"
        )
    key, cls = forms[kind]
    if set(params) != {key}:
        raise ConfigError(f"channel {kind!r} takes exactly one parameter {key!r}")
    return cls(params[key])


def hard_decision(
    llrs: np.ndarray,
    rng: np.random.Generator,
    truth: gf2.BitVec | None = None,
    thetas: np.ndarray | None = None,
) -> LlrProfile:
    """Threshold LLRs into a hard word, flipping a fair coin at zero.

    thetas = 1/(1 + e^{|r|}) is each position's probability of the hard
    decision being wrong, i.e. the equivalent time-varying BSC parameter.
    A channel that knows its crossover in closed form may pass it in to
    avoid the exp/log round trip.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    z = (llrs < 0).astype(np.uint8)
    undecided = llrs == 0
    if undecided.any():
        z[undecided] = rng.integers(0, 2, int(undecided.sum()), dtype=np.uint8)
    if thetas is None:
        with np.errstate(over="ignore"):
            thetas = 1.0 / (1.0 + np.exp(np.abs(llrs)))
    hard = gf2.BitVec.from_bits(z)
    err = hard ^ truth if truth is not None else None
    return LlrProfile(llrs=llrs, hard=hard, thetas=thetas, error_pattern=err)


@dataclass(frozen=True)
class InfoMeasures:
    h_u: float
    h_u_given_v: float
    capacity: float


def info_measures(source: SourceModel, channel: Channel) -> InfoMeasures:
    """Source entropy, posterior entropy, and capacity, all in bits.

    For the uniform source H(U|V) = 1 - C exactly (symmetric channels
    achieve capacity at uniform input); otherwise the channel integrates
    its posterior entropy against the theta prior.
    """
    if source.theta == 0.5:
        h_post = 1.0 - channel.capacity()
    else:
        h_post = channel.cond_entropy(source.theta)
    return InfoMeasures(
        h_u=source.entropy(), h_u_given_v=h_post, capacity=channel.capacity()
    )


def empirical_error_entropy(profile: LlrProfile) -> float:
    """Mean H2(theta_i) over the received word, in bits per position."""
    thetas = profile.thetas
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = -thetas * np.log2(thetas) - (1 - thetas) * np.log2(1 - thetas)
    return float(np.where((thetas > 0) & (thetas < 1), terms, 0.0).mean())


@dataclass(frozen=True)
class SymmetryReport:
    channel: str
    ok: bool
    max_deviation: float
    tolerance: float
    worst_symbol: object


def check_symmetry(channel, tol: float = 1e-9, grid: np.ndarray | None = None) -> SymmetryReport:
    """Verify output symmetry: an involution pi on outputs with
    P(y|1) == P(pi(y)|0) for every y.

    Discrete channels are checked symbol by symbol through their
    symbol_probs/involution tables; density channels are checked as
    p(y|1) == p(-y|0) on a grid.
    """
    name = channel.spec_string()
    if hasattr(channel, "symbol_probs"):
        probs = channel.symbol_probs()
        inv = channel.involution()
        worst, dev = None, 0.0
        for y, (_, p1) in probs.items():
            if inv.get(inv.get(y)) != y:
                return SymmetryReport(name, False, math.inf, tol, y)
            d = abs(p1 - probs[inv[y]][0])
            if d > dev:
                worst, dev = y, d
        return SymmetryReport(name, dev <= tol, dev, tol, worst)
    if grid is None:
        grid = np.linspace(-12.0, 12.0, 4801)
    dev_arr = np.abs(channel.density(grid, 1) - channel.density(-grid, 0))
    i = int(np.argmax(dev_arr))
    return SymmetryReport(name, float(dev_arr[i]) <= tol, float(dev_arr[i]), tol, float(grid[i]))
