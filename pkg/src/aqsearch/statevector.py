"""Dense statevector simulation of the comparator-filter circuit.

Qubit ``q`` of the state index is bit ``q`` of the basis-state integer; a register's
value is the integer formed by its qubits with its lowest offset as the least
significant bit.  Every gate here is self-inverse (Hadamard blocks, XOR oracles, the
comparator, flips and phase flips), so a circuit is undone by replaying it reversed.

Rounds after the first run under a control discipline: the value oracle fires only on
``flag = 0, probe = 0``, the probe superposition and its oracle load only on ``flag = 0``,
and a closing flip rejects every branch that still holds value-register garbage.
Non-minimal accepted amplitudes then keep shrinking round after round.  No fixed-register
unitary can reproduce the closed-form ``(n/2^W)^k`` decay exactly, so the deviation
(leakage) is measured per round and reported, never assumed away.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence, TextIO, Union

import numpy as np

from .amplitude import (
    MinSearchReport,
    compute_rank,
    default_rounds,
    grover_schedule,
    modal_set,
)
from .errors import CapExceeded, ContractViolation
from .table import FunctionTable

MAX_QUBITS = 26
NORM_TOL = 1e-12

Controls = tuple[tuple[str, int], ...]


# --------------------------------------------------------------------------- layout


@dataclass(frozen=True)
class Register:
    name: str
    width: int
    offset: int

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[Register, ...]
    # role name -> register name; used to wire filter rounds onto the layout
    roles: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        offset = 0
        names = set()
        for reg in self.registers:
            if reg.width < 1:
                raise ContractViolation(f"register {reg.name!r} has width {reg.width}")
            if reg.offset != offset:
                raise ContractViolation(f"register {reg.name!r} at offset {reg.offset}, expected {offset}")
            if reg.name in names:
                raise ContractViolation(f"duplicate register name {reg.name!r}")
            names.add(reg.name)
            offset += reg.width
        for _, name in self.roles:
            if name not in names:
                raise ContractViolation(f"role refers to unknown register {name!r}")

    @classmethod
    def build(cls, spec: Iterable[tuple[str, int]], roles: dict[str, str] | None = None) -> "RegisterLayout":
        regs = []
        offset = 0
        for name, width in spec:
            regs.append(Register(name, width, offset))
            offset += width
        return cls(tuple(regs), tuple(sorted((roles or {}).items())))

    @property
    def total_qubits(self) -> int:
        return sum(r.width for r in self.registers)

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.registers]

    def __getitem__(self, name: str) -> Register:
        for reg in self.registers:
            if reg.name == name:
                return reg
        raise ContractViolation(f"unknown register {name!r}")

    def __contains__(self, name: str) -> bool:
        return any(r.name == name for r in self.registers)

    def role(self, role: str) -> str | None:
        return dict(self.roles).get(role)

    def basis_index(self, **values: int) -> int:
        index = 0
        for name, value in values.items():
            reg = self[name]
            if not 0 <= value <= reg.mask:
                raise ContractViolation(f"value {value} does not fit register {name!r}")
            index |= value << reg.offset
        return index


def search_layout(in_width: int, out_width: int | None = None) -> RegisterLayout:
    """Minimum-search layout: x, f(x), y, f(y), flag.

    Value registers are ``max(N, W_out)`` wide, so an N-bit search always costs at least
    ``4N + 1`` qubits however narrow the table's values are.
    """
    out_width = in_width if out_width is None else max(in_width, out_width)
    return RegisterLayout.build(
        [("x", in_width), ("fx", out_width), ("y", in_width), ("fy", out_width), ("flag", 1)],
        roles={"source": "x", "value": "fx", "probe": "y", "probe_value": "fy", "flag": "flag"},
    )


def equation_layout(N: int, M: int, l: int) -> RegisterLayout:
    """Diophantine layout: p, xyz, |D_p|, x'y'z', |D_p'|, flag (N + 6M + 2l + 1 qubits)."""
    return RegisterLayout.build(
        [("p", N), ("xyz", 3 * M), ("value", l), ("xyz2", 3 * M), ("value2", l), ("flag", 1)],
        roles={
            "selector": "p",
            "source": "xyz",
            "value": "value",
            "probe": "xyz2",
            "probe_value": "value2",
            "flag": "flag",
        },
    )


def check_cap(layout: RegisterLayout, cap: int = MAX_QUBITS) -> None:
    if layout.total_qubits > cap:
        raise CapExceeded(
            f"layout needs {layout.total_qubits} qubits; dense simulation is capped at {cap}"
        )


# --------------------------------------------------------------------------- gates


@dataclass(frozen=True)
class Hadamard:
    register: str
    controls: Controls = ()
    kind = "hadamard_block"

    @property
    def registers(self) -> list[str]:
        return [self.register]


@dataclass(frozen=True, eq=False)
class XorOracle:
    """``|s>|t> -> |s>|t XOR table(s)>``; multiple sources concatenate, first one lowest."""

    sources: tuple[str, ...]
    target: str
    table: FunctionTable
    controls: Controls = ()
    kind = "xor_oracle"

    @property
    def registers(self) -> list[str]:
        return [*self.sources, self.target]


@dataclass(frozen=True)
class Comparator:
    """``|a>|b>|c> -> |a>|b>|c XOR [a <= b]>``."""

    a: str
    b: str
    flag: str
    kind = "comparator"

    @property
    def registers(self) -> list[str]:
        return [self.a, self.b, self.flag]


@dataclass(frozen=True)
class PatternFlip:
    control: str
    pattern: int
    target: str
    bit: int = 0
    kind = "pattern_controlled_flip"

    @property
    def registers(self) -> list[str]:
        return [self.control, self.target]


@dataclass(frozen=True)
class BitFlip:
    register: str
    bit: int = 0
    kind = "bit_flip"

    @property
    def registers(self) -> list[str]:
        return [self.register]


@dataclass(frozen=True)
class PhaseFlip:
    """Multiply by -1 every basis state matching all ``(register, value)`` pairs."""

    pattern: tuple[tuple[str, int], ...]
    kind = "phase_flip"

    @property
    def registers(self) -> list[str]:
        return [name for name, _ in self.pattern]


GateSpec = Union[Hadamard, XorOracle, Comparator, PatternFlip, BitFlip, PhaseFlip]


# --------------------------------------------------------------------------- state


class _Basis:
    """Basis-index arithmetic for one layout, computed lazily and cached."""

    def __init__(self, layout: RegisterLayout):
        self.layout = layout
        self.index = np.arange(1 << layout.total_qubits, dtype=np.int64)
        self._values: dict[str, np.ndarray] = {}

    def value(self, name: str) -> np.ndarray:
        if name not in self._values:
            reg = self.layout[name]
            self._values[name] = (self.index >> reg.offset) & reg.mask
        return self._values[name]

    def match(self, pattern: Iterable[tuple[str, int]]) -> np.ndarray:
        mask = np.ones(self.index.shape, dtype=bool)
        for name, value in pattern:
            mask &= self.value(name) == value
        return mask


@lru_cache(maxsize=8)
def _basis(layout: RegisterLayout) -> _Basis:
    return _Basis(layout)


@lru_cache(maxsize=8)
def _walsh(width: int) -> np.ndarray:
    h = np.array([[1.0, 1.0], [1.0, -1.0]])
    out = np.ones((1, 1))
    for _ in range(width):
        out = np.kron(out, h)
    return out / math.sqrt(1 << width)


@dataclass
class StateVector:
    layout: RegisterLayout
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.layout.total_qubits,):
            raise ContractViolation("amplitude array does not match the layout size")

    @classmethod
    def basis(cls, layout: RegisterLayout, **values: int) -> "StateVector":
        check_cap(layout)
        amps = np.zeros(1 << layout.total_qubits, dtype=complex)
        amps[layout.basis_index(**values)] = 1.0
        return cls(layout, amps)

    @classmethod
    def zero(cls, layout: RegisterLayout) -> "StateVector":
        return cls.basis(layout)

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def mass(self, pattern: Iterable[tuple[str, int]]) -> float:
        mask = _basis(self.layout).match(pattern)
        return float(np.sum(np.abs(self.amplitudes[mask]) ** 2))

    def marginal(self, register: str) -> np.ndarray:
        reg = self.layout[register]
        values = _basis(self.layout).value(register)
        return np.bincount(values, weights=self.probabilities(), minlength=1 << reg.width)


def _validate(layout: RegisterLayout, gate: GateSpec) -> None:
    for name in gate.registers:
        layout[name]
    controls = getattr(gate, "controls", ())
    for name, value in controls:
        if not 0 <= value <= layout[name].mask:
            raise ContractViolation(f"control value {value} does not fit register {name!r}")
    if isinstance(gate, XorOracle):
        width = sum(layout[s].width for s in gate.sources)
        if width != gate.table.in_width:
            raise ContractViolation(
                f"oracle sources span {width} qubits, table expects {gate.table.in_width}"
            )
        if layout[gate.target].width < gate.table.out_width:
            raise ContractViolation(f"target {gate.target!r} narrower than table output")
        if gate.target in gate.sources:
            raise ContractViolation("oracle target overlaps its source")
        if any(name == gate.target for name, _ in controls):
            raise ContractViolation("oracle control overlaps its target")
    elif isinstance(gate, Hadamard):
        if any(name == gate.register for name, _ in controls):
            raise ContractViolation("hadamard control overlaps its target")
    elif isinstance(gate, Comparator):
        if layout[gate.flag].width != 1 or gate.flag in (gate.a, gate.b):
            raise ContractViolation("comparator flag must be a distinct 1-qubit register")
    elif isinstance(gate, (PatternFlip, BitFlip)):
        target = gate.target if isinstance(gate, PatternFlip) else gate.register
        if not 0 <= gate.bit < layout[target].width:
            raise ContractViolation(f"bit {gate.bit} outside register {target!r}")
        if isinstance(gate, PatternFlip):
            if gate.control == gate.target:
                raise ContractViolation("pattern flip control overlaps its target")
            if not 0 <= gate.pattern <= layout[gate.control].mask:
                raise ContractViolation(f"pattern {gate.pattern} does not fit {gate.control!r}")


def _flip_delta(basis: _Basis, layout: RegisterLayout, gate: GateSpec) -> np.ndarray:
    """XOR mask per basis index for the permutation gates (all involutions)."""
    if isinstance(gate, XorOracle):
        src = np.zeros_like(basis.index)
        shift = 0
        for name in gate.sources:
            src |= basis.value(name) << shift
            shift += layout[name].width
        delta = gate.table.values[src] << layout[gate.target].offset
        if gate.controls:
            delta = np.where(basis.match(gate.controls), delta, 0)
        return delta
    if isinstance(gate, Comparator):
        fire = basis.value(gate.a) <= basis.value(gate.b)
        return fire.astype(np.int64) << layout[gate.flag].offset
    if isinstance(gate, PatternFlip):
        fire = basis.value(gate.control) == gate.pattern
        return fire.astype(np.int64) << (layout[gate.target].offset + gate.bit)
    if isinstance(gate, BitFlip):
        return np.int64(1) << (layout[gate.register].offset + gate.bit)
    raise TypeError(f"not a permutation gate: {gate!r}")


def _apply(layout: RegisterLayout, amps: np.ndarray, gate: GateSpec) -> np.ndarray:
    basis = _basis(layout)
    if isinstance(gate, Hadamard):
        reg = layout[gate.register]
        n = layout.total_qubits
        view = amps.reshape(1 << (n - reg.offset - reg.width), 1 << reg.width, 1 << reg.offset)
        out = np.einsum("ab,ibj->iaj", _walsh(reg.width), view).reshape(-1)
        if gate.controls:
            out = np.where(basis.match(gate.controls), out, amps)
        return out
    if isinstance(gate, PhaseFlip):
        out = amps.copy()
        out[basis.match(gate.pattern)] *= -1
        return out
    return amps[basis.index ^ _flip_delta(basis, layout, gate)]


TraceSink = Union[TextIO, Callable[[dict], None], None]


def _emit(trace: TraceSink, gate: GateSpec, amps: np.ndarray) -> None:
    if trace is None:
        return
    record = {
        "gate": gate.kind,
        "registers": gate.registers,
        "norm_after": float(np.sqrt(np.sum(np.abs(amps) ** 2))),
    }
    if callable(trace):
        trace(record)
    else:
        trace.write(json.dumps(record) + "\n")


def apply_gate(state: StateVector, gate: GateSpec, trace: TraceSink = None) -> StateVector:
    _validate(state.layout, gate)
    amps = _apply(state.layout, state.amplitudes, gate)
    _emit(trace, gate, amps)
    return StateVector(state.layout, amps)


def run_circuit(state: StateVector, gates: Sequence[GateSpec], trace: TraceSink = None) -> StateVector:
    layout = state.layout
    for gate in set(gates):
        _validate(layout, gate)
    amps = state.amplitudes
    for gate in gates:
        amps = _apply(layout, amps, gate)
        _emit(trace, gate, amps)
    return StateVector(layout, amps)


def inverse(gates: Sequence[GateSpec]) -> list[GateSpec]:
    return list(reversed(gates))


# --------------------------------------------------------------------------- filter rounds


def _wiring(layout: RegisterLayout) -> dict[str, str | None]:
    roles = {r: layout.role(r) for r in ("source", "value", "probe", "probe_value", "flag", "selector")}
    missing = [r for r, name in roles.items() if name is None and r != "selector"]
    if missing:
        raise ContractViolation(f"layout lacks filter roles: {missing}")
    return roles


def accept_pattern(layout: RegisterLayout) -> tuple[tuple[str, int], ...]:
    """Ancillas all zero and flag zero: the branch the filter cascade keeps."""
    w = _wiring(layout)
    return tuple((w[r], 0) for r in ("value", "probe", "probe_value", "flag"))


def preparation_gates(layout: RegisterLayout) -> list[GateSpec]:
    w = _wiring(layout)
    gates: list[GateSpec] = []
    if w["selector"]:
        gates.append(Hadamard(w["selector"]))
    gates.append(Hadamard(w["source"]))
    return gates


def filter_round_gates(layout: RegisterLayout, table: FunctionTable, controlled: bool = False) -> list[GateSpec]:
    """Gate list of one filter round ``U``.

    ``controlled`` applies the inter-round discipline used from the second round on:
    the value oracle only fires on ``flag = 0, probe = 0``, the probe superposition and
    its oracle load only on ``flag = 0``, and a closing flip marks every branch that still
    carries value-register garbage as rejected.
    """
    w = _wiring(layout)
    sel = (w["selector"],) if w["selector"] else ()
    src = (w["source"], *sel)
    probe = (w["probe"], *sel)
    flag = w["flag"]
    if not controlled:
        load = XorOracle(src, w["value"], table)
        probe_load = XorOracle(probe, w["probe_value"], table)
        return [
            load,
            Hadamard(w["probe"]),
            probe_load,
            Comparator(w["value"], w["probe_value"], flag),
            probe_load,
            Hadamard(w["probe"]),
            BitFlip(flag),
            load,
        ]
    live = ((flag, 0),)
    load = XorOracle(src, w["value"], table, controls=((flag, 0), (w["probe"], 0)))
    return [
        load,
        Hadamard(w["probe"], controls=live),
        XorOracle(probe, w["probe_value"], table, controls=live),
        Comparator(w["value"], w["probe_value"], flag),
        XorOracle(probe, w["probe_value"], table),
        Hadamard(w["probe"]),
        BitFlip(flag),
        load,
        # flag ^= [value != 0]
        BitFlip(flag),
        PatternFlip(w["value"], 0, flag),
    ]


def run_filter_round(
    state: StateVector,
    table: FunctionTable,
    layout: RegisterLayout | None = None,
    controlled: bool = False,
    trace: TraceSink = None,
) -> StateVector:
    layout = layout or state.layout
    if layout != state.layout:
        raise ContractViolation("state was built on a different layout")
    return run_circuit(state, filter_round_gates(layout, table, controlled), trace)


def cascade_gates(table: FunctionTable, k: int, layout: RegisterLayout) -> list[GateSpec]:
    """Preparation plus ``k`` rounds: round 1 plain, later rounds under the control discipline."""
    if k < 1:
        raise ContractViolation(f"cascade needs k >= 1, got {k}")
    gates = preparation_gates(layout) + filter_round_gates(layout, table)
    later = filter_round_gates(layout, table, controlled=True)
    for _ in range(k - 1):
        gates.extend(later)
    return gates


# --------------------------------------------------------------------------- projection


@dataclass
class LeakageReport:
    amplitudes: np.ndarray
    analytic: np.ndarray
    total_leakage: float
    max_abs_deviation: float

    def to_json(self) -> dict:
        dev = np.abs(self.amplitudes - self.analytic)
        entries = [
            {
                "x": int(x),
                "re": float(a.real),
                "im": float(a.imag),
                "analytic_re": float(e.real),
                "analytic_im": float(e.imag),
                "abs_deviation": float(d),
            }
            for x, (a, e, d) in enumerate(zip(self.amplitudes, self.analytic, dev))
        ]
        return {"entries": entries, "total_leakage": self.total_leakage}


def _source_indices(layout: RegisterLayout) -> np.ndarray:
    """Basis index of each accepted state, ordered by the table's combined source index."""
    w = _wiring(layout)
    src = layout[w["source"]]
    combined = np.arange(1 << (src.width + (layout[w["selector"]].width if w["selector"] else 0)))
    index = (combined & src.mask) << src.offset
    if w["selector"]:
        sel = layout[w["selector"]]
        index |= (combined >> src.width) << sel.offset
    return index


def analytic_accepted(layout: RegisterLayout, table: FunctionTable | None, rounds: int) -> np.ndarray:
    """Closed-form accepted amplitudes for the uniform preparation after ``rounds`` rounds."""
    idx = _source_indices(layout)
    amps = np.full(idx.shape, 1.0 / math.sqrt(idx.size), dtype=complex)
    if rounds == 0:
        return amps
    if table is None:
        raise ContractViolation("analytic comparison after rounds needs the table")
    w = _wiring(layout)
    src_width = layout[w["source"]].width
    blocks = table.values.reshape(-1, 1 << src_width)
    factors = []
    for row in blocks:
        sub = FunctionTable(src_width, table.out_width, row)
        factors.append(compute_rank(sub).n / sub.size)
    return amps * np.power(np.concatenate(factors), rounds)


def accepted_projection(
    state: StateVector,
    layout: RegisterLayout | None = None,
    table: FunctionTable | None = None,
    rounds: int = 0,
) -> tuple[np.ndarray, LeakageReport]:
    """Amplitudes of the accept pattern indexed by source value, and their deviation from the model."""
    layout = layout or state.layout
    amps = state.amplitudes[_source_indices(layout)].copy()
    expected = analytic_accepted(layout, table, rounds)
    dev = amps - expected
    report = LeakageReport(
        amplitudes=amps,
        analytic=expected,
        total_leakage=float(np.sum(np.abs(dev) ** 2)),
        max_abs_deviation=float(np.max(np.abs(dev))),
    )
    return amps, report


@dataclass
class CascadeResult:
    state: StateVector
    gates: list[GateSpec]
    leakage: list[LeakageReport] = field(default_factory=list)

    @property
    def leakage_growth(self) -> list[float]:
        totals = [0.0] + [r.total_leakage for r in self.leakage]
        return [b - a for a, b in zip(totals, totals[1:])]


def run_aqs_cascade(
    table: FunctionTable,
    k: int,
    layout: RegisterLayout | None = None,
    trace: TraceSink = None,
    track_leakage: bool = True,
) -> CascadeResult:
    layout = layout or search_layout(table.in_width, table.out_width)
    check_cap(layout)
    if k < 1:
        raise ContractViolation(f"cascade needs k >= 1, got {k}")
    prep = preparation_gates(layout)
    state = run_circuit(StateVector.zero(layout), prep, trace)
    first = filter_round_gates(layout, table)
    later = filter_round_gates(layout, table, controlled=True)
    reports = []
    for r in range(1, k + 1):
        state = run_circuit(state, first if r == 1 else later, trace)
        if track_leakage:
            reports.append(accepted_projection(state, layout, table, r)[1])
    return CascadeResult(state, cascade_gates(table, k, layout), reports)


# --------------------------------------------------------------------------- amplification


def amplitude_amplify(
    state: StateVector,
    preparation: Sequence[GateSpec],
    accept: Iterable[tuple[str, int]],
    m: int,
    on_iteration: Callable[[int, StateVector], None] | None = None,
) -> StateVector:
    """``m`` Grover iterations: flip accept, undo preparation, flip all-zero, redo preparation.

    ``preparation`` must be the exact circuit that produced ``state`` from all-zero;
    a mismatch is not detected here, it only shows up as a broken rotation law.
    """
    if m < 0:
        raise ContractViolation(f"iteration count must be >= 0, got {m}")
    layout = state.layout
    zero = tuple((name, 0) for name in layout.names)
    iteration = [PhaseFlip(tuple(accept))] + inverse(preparation) + [PhaseFlip(zero)] + list(preparation)
    for i in range(1, m + 1):
        state = run_circuit(state, iteration)
        if on_iteration is not None:
            on_iteration(i, state)
    return state


# --------------------------------------------------------------------------- measurement


def sample_measurement(state: StateVector, register: str, shots: int, seed: int) -> dict[int, int]:
    """Histogram of ``shots`` draws from the register's exact marginal (seeded)."""
    if shots < 1:
        raise ContractViolation("shots must be >= 1")
    probs = state.marginal(register)
    probs = probs / probs.sum()
    counts = np.random.default_rng(seed).multinomial(shots, probs)
    return {int(v): int(c) for v, c in enumerate(counts) if c}


# --------------------------------------------------------------------------- end-to-end


def min_search_statevector(
    table: FunctionTable,
    k: int | None = None,
    shots: int = 0,
    seed: int = 0,
    trace: TraceSink = None,
) -> MinSearchReport:
    layout = search_layout(table.in_width, table.out_width)
    check_cap(layout)
    if k is None:
        k = default_rounds(table.in_width)
    cascade = run_aqs_cascade(table, k, layout, trace=trace, track_leakage=False)
    accept = accept_pattern(layout)
    p0 = cascade.state.mass(accept)
    _, leak = accepted_projection(cascade.state, layout, table, k)
    schedule = grover_schedule(p0)
    final = amplitude_amplify(cascade.state, cascade.gates, accept, schedule.iterations)
    amps, _ = accepted_projection(final, layout)
    extra = {
        "accepted_mass_after": final.mass(accept),
        "total_leakage": leak.total_leakage,
        "max_abs_deviation": leak.max_abs_deviation,
    }
    if shots:
        hist = sample_measurement(final, layout.role("source"), shots, seed)
        extra["histogram"] = {str(v): c for v, c in hist.items()}
        extra["shots"] = shots
        extra["seed"] = seed
    return MinSearchReport(
        in_width=table.in_width,
        out_width=table.out_width,
        k=k,
        p_good=p0,
        schedule=schedule,
        modal_set=modal_set(np.abs(amps) ** 2),
        classical_argmin_set=table.argmin_set(),
        engine="statevector",
        extra=extra,
    )
