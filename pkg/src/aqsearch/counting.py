"""Quantum counting by phase estimation of the Grover rotation.

For ``t`` marked items out of ``T`` the Grover iterate rotates by ``2*theta`` with
``sin(theta)^2 = t/T``; the uniform start state splits evenly over the eigenvectors with
phases ``+-theta/pi`` (in turns).  Each ``c``-bit outcome ``j`` maps back to the count
estimate ``T * sin(pi * j / 2^c)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

PROB_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class CountingDistribution:
    precision_bits: int
    search_space: int
    true_count: int
    probabilities: np.ndarray
    t_hat: np.ndarray

    @property
    def outcomes(self) -> int:
        return 1 << self.precision_bits

    def to_json(self) -> list[dict]:
        return [
            {"outcome": j, "probability": float(p), "t_hat": float(t)}
            for j, (p, t) in enumerate(zip(self.probabilities, self.t_hat))
        ]


def _round_half_down(x: float) -> int:
    return math.ceil(x - 0.5)


def sufficient_precision(search_space: int) -> int:
    """Precision at which the modal estimate is exact for every count (checked for T <= 256)."""
    return int(search_space).bit_length() - 1 + 6


def counting_distribution(t: int, search_space: int, precision_bits: int) -> CountingDistribution:
    T = int(search_space)
    if T < 1 or T & (T - 1):
        raise ContractViolation(f"search space size {T} is not a power of two")
    if not 0 <= t <= T:
        raise ContractViolation(f"count {t} outside [0, {T}]")
    if precision_bits < 1:
        raise ContractViolation("precision_bits must be >= 1")

    Q = 1 << precision_bits
    theta = math.asin(math.sqrt(t / T))
    phase = theta / math.pi
    k = np.arange(Q)
    # amplitude of outcome j for eigenphase phi: (1/Q) sum_k exp(2 pi i k (phi - j/Q))
    plus = np.fft.fft(np.exp(2j * math.pi * k * phase)) / Q
    minus = np.fft.fft(np.exp(-2j * math.pi * k * phase)) / Q
    probs = 0.5 * (np.abs(plus) ** 2 + np.abs(minus) ** 2)
    t_hat = T * np.sin(math.pi * k / Q) ** 2
    probs.setflags(write=False)
    t_hat.setflags(write=False)
    return CountingDistribution(precision_bits, T, t, probs, t_hat)


def modal_estimate(dist: CountingDistribution) -> int:
    """Rounded estimate at the most probable outcome; ties go to the smaller count."""
    probs = dist.probabilities
    best = np.flatnonzero(probs >= probs.max() * (1.0 - PROB_RTOL))
    return min(_round_half_down(float(dist.t_hat[j])) for j in best)


def folded(dist: CountingDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Merge outcomes ``j`` and ``2^c - j``; returns (outcomes 0..2^(c-1), probabilities)."""
    Q = dist.outcomes
    half = Q // 2
    j = np.arange(half + 1)
    mass = dist.probabilities[j].copy()
    mirror = (Q - j[1:half]) % Q
    mass[1:half] += dist.probabilities[mirror]
    return j, mass


def credible_interval(dist: CountingDistribution, mass: float) -> tuple[int, int]:
    """Smallest contiguous run of folded outcomes holding at least ``mass``, as counts."""
    if not 0.0 < mass < 1.0:
        raise ContractViolation(f"mass must lie in (0, 1), got {mass}")
    j, weights = folded(dist)
    cum = np.concatenate([[0.0], np.cumsum(weights)])
    best = None
    lo = 0
    for hi in range(len(weights)):
        while lo < hi and cum[hi + 1] - cum[lo + 1] >= mass:
            lo += 1
        if cum[hi + 1] - cum[lo] >= mass:
            cand = (hi - lo, -(cum[hi + 1] - cum[lo]), lo, hi)
            if best is None or cand < best:
                best = cand
    if best is None:  # rounding left the total just under ``mass``
        lo, hi = 0, len(weights) - 1
    else:
        lo, hi = best[2], best[3]
    t_hat = dist.t_hat
    return _round_half_down(float(t_hat[j[lo]])), _round_half_down(float(t_hat[j[hi]]))


def counting_queries(precision_bits: int) -> int:
    """Controlled Grover iterates used by ``c``-bit phase estimation."""
    return (1 << precision_bits) - 1
