"""Small statistical helpers shared across modules."""
from __future__ import annotations

import math

__all__ = ["Z95", "wilson_interval", "binary_entropy"]

# Two-sided 95% normal quantile, frozen so confidence bounds are stable.
Z95 = 1.959963984540054


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Returns (lo, hi) in [0, 1]; (0, 1) when trials == 0.
    """
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def binary_entropy(p: float) -> float:
    """H2(p) in bits; 0 at the endpoints."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)
