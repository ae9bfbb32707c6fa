"""Closed-form model of the comparator filter cascade and the amplification that follows it.

After ``k`` filter rounds the accepted branch carries ``a_x = c_x * (n(x) / 2^W)^k`` where
``n(x)`` counts the table entries not below ``f(x)``.  Global minimizers keep their full
amplitude, everything else decays geometrically, and one Grover-style amplification plus a
single measurement then returns a minimizer.  Everything here is a pure function of numpy
arrays, so widths far beyond dense-simulation reach are fine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, DegenerateInput
from .table import FunctionTable

EQ_TOL = 1e-12
# relative tolerance when deciding that two outcome probabilities tie
TIE_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class RankProfile:
    in_width: int
    n: np.ndarray

    @property
    def size(self) -> int:
        return 1 << self.in_width


@dataclass(frozen=True, eq=False)
class FilterState:
    accepted: np.ndarray
    rounds: int
    rejected_mass: float

    @property
    def in_width(self) -> int:
        return self.accepted.shape[0].bit_length() - 1


@dataclass(frozen=True)
class GroverSchedule:
    p_good: float
    theta: float
    iterations: int
    predicted_success: float


@dataclass
class MinSearchReport:
    in_width: int
    out_width: int
    k: int
    p_good: float
    schedule: GroverSchedule
    modal_set: list[int]
    classical_argmin_set: list[int]
    engine: str = "analytic"
    extra: dict = field(default_factory=dict)

    @property
    def match(self) -> bool:
        return self.modal_set == self.classical_argmin_set

    @property
    def tie(self) -> bool:
        return len(self.modal_set) > 1

    @property
    def cost(self) -> dict[str, int]:
        # AQS row of the cost table: k filter rounds, m oracle queries, one measurement
        return {"n1": self.k, "n2": self.schedule.iterations, "n3": 1}

    def to_json(self) -> dict:
        doc = {
            "widths": [self.in_width, self.out_width],
            "k": self.k,
            "engine": self.engine,
            "p_good": self.p_good,
            "theta": self.schedule.theta,
            "iterations": self.schedule.iterations,
            "predicted_success": self.schedule.predicted_success,
            "modal_set": list(self.modal_set),
            "classical_argmin_set": list(self.classical_argmin_set),
            "match": self.match,
            "tie": self.tie,
            "cost": self.cost,
        }
        doc.update(self.extra)
        return doc


def uniform_amplitudes(in_width: int) -> np.ndarray:
    size = 1 << in_width
    return np.full(size, 1.0 / math.sqrt(size), dtype=complex)


def compute_rank(table: FunctionTable) -> RankProfile:
    """Exact ``n(x) = #{y : f(y) >= f(x)}`` for every input."""
    values = table.values
    below = np.searchsorted(np.sort(values), values, side="left")
    n = (table.size - below).astype(np.int64)
    return RankProfile(table.in_width, n)


def filter_amplitudes(init: np.ndarray, rank: RankProfile, k: int) -> FilterState:
    init = np.asarray(init, dtype=complex)
    if init.shape != (rank.size,):
        raise ContractViolation(f"init has shape {init.shape}, rank profile has {rank.size} entries")
    if k < 0:
        raise ContractViolation(f"round count must be >= 0, got {k}")
    init_mass = float(np.sum(np.abs(init) ** 2))
    if init_mass > 1.0 + EQ_TOL:
        raise ContractViolation(f"initial amplitudes have mass {init_mass} > 1")

    factor = rank.n / rank.size
    accepted = init * np.power(factor, k)
    accepted_mass = float(np.sum(np.abs(accepted) ** 2))
    rejected = min(1.0, max(0.0, 1.0 - accepted_mass))
    accepted.setflags(write=False)
    return FilterState(accepted, k, rejected)


def good_probability(state: FilterState) -> float:
    return float(np.sum(np.abs(state.accepted) ** 2))


def grover_schedule(p_good: float) -> GroverSchedule:
    """Iteration count ``floor(pi / (4 theta))`` with ``sin(theta) = sqrt(p_good)``."""
    if not p_good > 0.0 or p_good > 1.0 + EQ_TOL:
        raise ContractViolation(f"p_good must lie in (0, 1], got {p_good}")
    p_good = min(p_good, 1.0)
    theta = math.asin(math.sqrt(p_good))
    iterations = int(math.floor(math.pi / (4.0 * theta)))
    success = math.sin((2 * iterations + 1) * theta) ** 2
    return GroverSchedule(p_good, theta, iterations, success)


def amplified_distribution(state: FilterState, schedule: GroverSchedule) -> tuple[np.ndarray, float]:
    """Measurement distribution over ``x`` after amplification, plus the unwanted (error) mass.

    Amplification rotates within the span of the accepted component, so relative weights
    inside it are preserved; only ``predicted_success`` of the total ends up there.
    """
    weights = np.abs(state.accepted) ** 2
    total = float(weights.sum())
    if total <= 0.0:
        raise DegenerateInput("no accepted mass: no minimizer can be reported")
    probs = schedule.predicted_success * weights / total
    return probs, 1.0 - schedule.predicted_success


def modal_set(probs: np.ndarray, rtol: float = TIE_RTOL) -> list[int]:
    probs = np.asarray(probs, dtype=float)
    top = probs.max()
    return [int(x) for x in np.flatnonzero(probs >= top * (1.0 - rtol))]


def default_rounds(in_width: int) -> int:
    return 1 << (in_width + 3)


def min_search_analytic(table: FunctionTable, k: int | None = None, init: np.ndarray | None = None) -> MinSearchReport:
    if k is None:
        k = default_rounds(table.in_width)
    if init is None:
        init = uniform_amplitudes(table.in_width)
    rank = compute_rank(table)
    state = filter_amplitudes(init, rank, k)
    p_good = good_probability(state)
    schedule = grover_schedule(p_good)
    probs, _ = amplified_distribution(state, schedule)
    return MinSearchReport(
        in_width=table.in_width,
        out_width=table.out_width,
        k=k,
        p_good=p_good,
        schedule=schedule,
        modal_set=modal_set(probs),
        classical_argmin_set=table.argmin_set(),
    )


def decay_ratio(in_width: int, k: int) -> float:
    """``(1 - 2^-W)^k``: second-largest over largest accepted amplitude for a unique minimizer."""
    return math.exp(k * math.log1p(-(2.0 ** -in_width)))


def amplitude_ratio(state: FilterState) -> float:
    """Second-largest distinct ``|a_x|`` divided by the largest one (0 if all are equal)."""
    mags = np.unique(np.abs(state.accepted))
    if mags.size < 2 or mags[-1] == 0:
        return 0.0
    return float(mags[-2] / mags[-1])
