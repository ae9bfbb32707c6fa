"""Enumerable Diophantine families, exhaustive minimum oracles, and the quantum Omega pipeline.

Equation ``p`` of a family is a polynomial ``D_p(x, y, z)`` over nonnegative integers.  The
searched variables live in ``[0, 2^M)`` and are packed into one index
``v = x + 2^M * y + 2^(2M) * z``.  Values are coded in ``l`` bits with a saturating clamp,
so ``0`` always certifies an exact solution.

Family strings::

    linear-sum              x + y + z - p
    linear-sum-shift:s      x + y + z - (p + s)
    even-sum                x + y + z - 2p
    paper-pow:nb,cb         (x+1)^n + (y+2)^n + (z+3)^n - C*x*y*z
                            n = 2 + (p mod 2^nb), C = 1 + (floor(p / 2^nb) mod 2^cb)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .amplitude import grover_schedule, min_search_analytic
from .counting import counting_distribution, counting_queries, modal_estimate, sufficient_precision
from .errors import CapExceeded, ContractViolation
from .statevector import (
    StateVector,
    XorOracle,
    accept_pattern,
    amplitude_amplify,
    apply_gate,
    check_cap,
    equation_layout,
    run_aqs_cascade,
    _basis,
)
from .table import FunctionTable

MAX_SEARCH_BITS = 24
MAX_LISTED_MINIMIZERS = 4096
SAMPLE_MINIMIZERS = 8
PATHS = ("classical", "quantum-analytic", "quantum-statevector")

_ARITY = {"linear-sum": 0, "linear-sum-shift": 1, "even-sum": 0, "paper-pow": 2}


@dataclass(frozen=True)
class DiophantineFamily:
    template: str
    params: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.template not in _ARITY:
            raise ContractViolation(f"unknown family template {self.template!r}")
        if len(self.params) != _ARITY[self.template]:
            raise ContractViolation(
                f"{self.template} takes {_ARITY[self.template]} parameter(s), got {len(self.params)}"
            )
        if self.template == "paper-pow" and any(b < 0 for b in self.params):
            raise ContractViolation("paper-pow bit counts must be >= 0")

    @classmethod
    def parse(cls, spec: str) -> "DiophantineFamily":
        name, _, rest = spec.strip().partition(":")
        try:
            params = tuple(int(s) for s in rest.split(",")) if rest else ()
        except ValueError as exc:
            raise ContractViolation(f"bad family parameters in {spec!r}") from exc
        return cls(name, params)

    def __str__(self) -> str:
        if not self.params:
            return self.template
        return f"{self.template}:{','.join(str(p) for p in self.params)}"


@dataclass(frozen=True)
class EquationInstance:
    """``D_p`` as ``sum_i (v_i + shift_i)^power - product * x*y*z - constant``."""

    family: DiophantineFamily
    p: int
    power: int
    shifts: tuple[int, int, int]
    product: int
    constant: int

    def evaluate(self, x: int, y: int, z: int) -> int:
        total = sum((v + s) ** self.power for v, s in zip((x, y, z), self.shifts))
        return total - self.product * x * y * z - self.constant

    def __str__(self) -> str:
        terms = []
        for name, s in zip("xyz", self.shifts):
            base = f"({name}+{s})" if s else name
            terms.append(base if self.power == 1 else f"{base}^{self.power}")
        text = " + ".join(terms)
        if self.product:
            text += f" - {self.product}*x*y*z"
        if self.constant:
            text += f" - {self.constant}"
        return text


def decode_equation(family: DiophantineFamily, p: int) -> EquationInstance:
    if p < 0:
        raise ContractViolation(f"equation index must be >= 0, got {p}")
    t = family.template
    if t == "linear-sum":
        return EquationInstance(family, p, 1, (0, 0, 0), 0, p)
    if t == "linear-sum-shift":
        return EquationInstance(family, p, 1, (0, 0, 0), 0, p + family.params[0])
    if t == "even-sum":
        return EquationInstance(family, p, 1, (0, 0, 0), 0, 2 * p)
    nb, cb = family.params
    n = 2 + (p % (1 << nb))
    c = 1 + ((p >> nb) % (1 << cb))
    return EquationInstance(family, p, n, (1, 2, 3), c, 0)


def eval_abs(eq: EquationInstance, x: int, y: int, z: int, l: int) -> int:
    """``min(|D_p(x, y, z)|, 2^l - 1)``; exact integer arithmetic before clamping."""
    if min(x, y, z) < 0:
        raise ContractViolation("variables must be nonnegative")
    return min(abs(eq.evaluate(x, y, z)), (1 << l) - 1)


def decode_triple(v: int, M: int) -> tuple[int, int, int]:
    mask = (1 << M) - 1
    return v & mask, (v >> M) & mask, (v >> (2 * M)) & mask


def _check_search(M: int, l: int) -> None:
    if M < 1 or l < 1:
        raise ContractViolation(f"widths must be positive (M={M}, l={l})")
    if 3 * M > MAX_SEARCH_BITS:
        raise CapExceeded(f"exhaustive search over 2^{3 * M} triples exceeds 2^{MAX_SEARCH_BITS}")


def value_table(eq: EquationInstance, M: int, l: int) -> FunctionTable:
    """Table ``v -> eval_abs(eq, decode_triple(v), l)`` over all ``2^(3M)`` packed triples."""
    _check_search(M, l)
    v = np.arange(1 << (3 * M), dtype=np.int64)
    mask = (1 << M) - 1
    xyz = [v & mask, (v >> M) & mask, (v >> (2 * M)) & mask]
    # int64 is exact while the largest term stays below 2^62; otherwise fall back to Python ints
    top = (mask + 3) ** eq.power * 3 + eq.product * mask**3 + eq.constant
    if top.bit_length() >= 62:
        xyz = [a.astype(object) for a in xyz]
    raw = sum((a + s) ** eq.power for a, s in zip(xyz, eq.shifts)) - eq.product * xyz[0] * xyz[1] * xyz[2]
    raw = np.abs(raw - eq.constant)
    values = np.minimum(raw, (1 << l) - 1).astype(np.int64)
    return FunctionTable(3 * M, l, values)


@dataclass(frozen=True)
class MinimumCertificate:
    min_value: int
    t: int
    minimizers: tuple[tuple[int, int, int], ...]

    @property
    def truncated(self) -> bool:
        return len(self.minimizers) < self.t


def classical_minimum(eq: EquationInstance, M: int, l: int) -> MinimumCertificate:
    table = value_table(eq, M, l)
    best = int(table.values.min())
    where = np.flatnonzero(table.values == best)
    listed = tuple(decode_triple(int(v), M) for v in where[:MAX_LISTED_MINIMIZERS])
    return MinimumCertificate(best, int(where.size), listed)


@dataclass
class EquationResult:
    p: int
    certificate: MinimumCertificate
    marked: bool | None = None

    def to_json(self) -> dict:
        doc = {
            "p": self.p,
            "min_value": self.certificate.min_value,
            "t": self.certificate.t,
            "sample_minimizers": [list(m) for m in self.certificate.minimizers[:SAMPLE_MINIMIZERS]],
        }
        if self.marked is not None:
            doc["marked"] = self.marked
        return doc


@dataclass
class OmegaReport:
    family: DiophantineFamily
    N: int
    M: int
    l: int
    k: int | None
    path: str
    r_exact: int
    r_estimated: int
    equations: list[EquationResult]
    n2: int = 0
    counting_bits: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def omega_lower(self) -> float:
        return self.r_estimated / (1 << self.N)

    @property
    def match(self) -> bool:
        return self.r_estimated == self.r_exact

    @property
    def cost(self) -> dict[str, int]:
        if self.path == "classical":
            return {"n1": 0, "n2": 0, "n3": 0, "counting_queries": 0}
        return {
            "n1": self.k,
            "n2": self.n2,
            "n3": 1,
            "counting_queries": counting_queries(self.counting_bits),
        }

    def to_json(self) -> dict:
        doc = {
            "family": str(self.family),
            "N": self.N,
            "M": self.M,
            "l": self.l,
            "k": self.k,
            "path": self.path,
            "counting_bits": self.counting_bits,
            "r_exact": self.r_exact,
            "r_estimated": self.r_estimated,
            "omega_lower": self.omega_lower,
            "match": self.match,
            "cost": self.cost,
            "equations": [e.to_json() for e in self.equations],
        }
        doc.update(self.extra)
        return doc


def _as_family(family: DiophantineFamily | str) -> DiophantineFamily:
    return family if isinstance(family, DiophantineFamily) else DiophantineFamily.parse(family)


def _check_N(N: int) -> None:
    if N < 1:
        raise ContractViolation(f"N must be positive, got {N}")
    if N > MAX_SEARCH_BITS:
        raise CapExceeded(f"2^{N} equations exceeds the enumeration cap")


def _certificates(family: DiophantineFamily, N: int, M: int, l: int) -> list[EquationResult]:
    return [EquationResult(p, classical_minimum(decode_equation(family, p), M, l)) for p in range(1 << N)]


def classical_omega(family: DiophantineFamily | str, N: int, M: int, l: int) -> OmegaReport:
    family = _as_family(family)
    _check_N(N)
    _check_search(M, l)
    eqs = _certificates(family, N, M, l)
    r = sum(e.certificate.min_value == 0 for e in eqs)
    return OmegaReport(family, N, M, l, None, "classical", r, r, eqs)


def default_filter_rounds(M: int) -> int:
    return 1 << (3 * M + 3)


def _count(marked: int, N: int, counting_bits: int | None) -> tuple[int, int, dict]:
    c = sufficient_precision(1 << N) if counting_bits is None else counting_bits
    dist = counting_distribution(marked, 1 << N, c)
    return c, modal_estimate(dist), {"marked_count": marked}


def quantum_omega(
    family: DiophantineFamily | str,
    N: int,
    M: int,
    l: int,
    k: int | None = None,
    counting_bits: int | None = None,
    path: str = "quantum-analytic",
    trace=None,
) -> OmegaReport:
    """Mark equations whose amplified minimizer has value 0, then count them by phase estimation."""
    family = _as_family(family)
    _check_N(N)
    _check_search(M, l)
    if k is None:
        k = default_filter_rounds(M)
    if k < 1:
        raise ContractViolation(f"filter rounds must be >= 1, got {k}")
    if path == "quantum-analytic":
        return _omega_analytic(family, N, M, l, k, counting_bits)
    if path == "quantum-statevector":
        return _omega_statevector(family, N, M, l, k, counting_bits, trace)
    raise ContractViolation(f"unknown quantum path {path!r}")


def _omega_analytic(family, N, M, l, k, counting_bits) -> OmegaReport:
    eqs = _certificates(family, N, M, l)
    n2 = 0
    agree = True
    for e in eqs:
        table = value_table(decode_equation(family, e.p), M, l)
        report = min_search_analytic(table, k)
        # one schedule per equation: heterogeneous t_p rule out a single optimal count
        n2 = max(n2, report.schedule.iterations)
        e.marked = all(table[x] == 0 for x in report.modal_set)
        agree &= report.match
    marked = sum(bool(e.marked) for e in eqs)
    r_exact = sum(e.certificate.min_value == 0 for e in eqs)
    c, r_hat, extra = _count(marked, N, counting_bits)
    extra["modal_sets_match_argmin"] = agree
    return OmegaReport(family, N, M, l, k, "quantum-analytic", r_exact, r_hat, eqs, n2, c, extra)


def joint_table(family: DiophantineFamily, N: int, M: int, l: int) -> FunctionTable:
    """Value table over ``v | p << 3M``: the packed triple in the low bits, the equation above."""
    rows = [value_table(decode_equation(family, p), M, l).values for p in range(1 << N)]
    return FunctionTable(N + 3 * M, l, np.concatenate(rows))


def _omega_statevector(family, N, M, l, k, counting_bits, trace=None) -> OmegaReport:
    layout = equation_layout(N, M, l)
    check_cap(layout)
    eqs = _certificates(family, N, M, l)
    table = joint_table(family, N, M, l)
    cascade = run_aqs_cascade(table, k, layout, trace=trace)
    accept = accept_pattern(layout)
    p0 = cascade.state.mass(accept)
    schedule = grover_schedule(p0)
    state = amplitude_amplify(cascade.state, cascade.gates, accept, schedule.iterations)
    # refill the value register so the counting oracle can test it for zero
    state = apply_gate(state, XorOracle(("xyz", "p"), "value", table), trace)
    marks = _zero_modal(state)
    for e, m in zip(eqs, marks):
        e.marked = m
    marked = sum(marks)
    r_exact = sum(e.certificate.min_value == 0 for e in eqs)
    c, r_hat, extra = _count(marked, N, counting_bits)
    extra.update(
        {
            "accepted_mass_before": p0,
            "predicted_success": schedule.predicted_success,
            "final_leakage": cascade.leakage[-1].total_leakage,
        }
    )
    return OmegaReport(family, N, M, l, k, "quantum-statevector", r_exact, r_hat, eqs, schedule.iterations, c, extra)


def _zero_modal(state: StateVector) -> list[bool]:
    """Per equation: is 0 the most probable value-register reading inside the kept branch?"""
    layout = state.layout
    basis = _basis(layout)
    keep = basis.match((("xyz2", 0), ("value2", 0), ("flag", 0)))
    probs = state.probabilities()
    p_vals = basis.value("p")[keep]
    values = basis.value("value")[keep]
    w = probs[keep]
    n_eq = 1 << layout["p"].width
    n_val = 1 << layout["value"].width
    hist = np.zeros((n_eq, n_val))
    np.add.at(hist, (p_vals, values), w)
    return [bool(row[0] > 0 and row[0] >= row.max() * (1 - 1e-9)) for row in hist]
