import itertools
import math
from pathlib import Path

import numpy as np
import pytest

from rmlab import gf2

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def all_words(n: int) -> np.ndarray:
    """All 2^n length-n bit rows, index == integer value (MSB first)."""
    ints = np.arange(1 << n, dtype=np.int64)
    return (ints[:, None] >> np.arange(n - 1, -1, -1)[None, :]).astype(np.uint8) & 1


def brute_coset_min(g: gf2.BitMatrix, x: gf2.BitVec, costs: np.ndarray):
    """Reference ML decoder: scan every word, keep min-cost syndrome match.

    Returns (best words as a list of BitVec, exact best cost) where the
    list holds every optimum, lexicographically sorted.
    """
    n = g.rows
    best_cost = None
    best = []
    for bits in itertools.product((0, 1), repeat=n):
        v = gf2.BitVec.from_bits(np.array(bits, dtype=np.uint8))
        if gf2.vec_mat_mul(v, g) != x:
            continue
        inf_flips = sum(1 for b, c in zip(bits, costs) if b and math.isinf(c))
        cost = (
            inf_flips,
            math.fsum(float(c) for b, c in zip(bits, costs) if b and not math.isinf(c)),
        )
        if best_cost is None or cost < best_cost:
            best_cost, best = cost, [v]
        elif cost == best_cost:
            best.append(v)
    best.sort(key=lambda v: v.lex_key())
    return best, best_cost
