import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aqsearch.amplitude import compute_rank, filter_amplitudes, uniform_amplitudes
from aqsearch.diophantine import (
    DiophantineFamily,
    classical_minimum,
    classical_omega,
    decode_equation,
    decode_triple,
    default_filter_rounds,
    eval_abs,
    joint_table,
    quantum_omega,
    value_table,
)
from aqsearch.errors import CapExceeded, ContractViolation

FAMILIES = ["linear-sum", "linear-sum-shift:10", "linear-sum-shift:4", "even-sum", "paper-pow:1,2", "paper-pow:0,3"]


def brute(family, p, M, l):
    """Independent scan: raw polynomial per family string, Python integers."""
    name, _, rest = family.partition(":")
    params = [int(s) for s in rest.split(",")] if rest else []

    def raw(x, y, z):
        if name == "linear-sum":
            return x + y + z - p
        if name == "linear-sum-shift":
            return x + y + z - (p + params[0])
        if name == "even-sum":
            return x + y + z - 2 * p
        nb, cb = params
        n = 2 + p % 2**nb
        c = 1 + (p // 2**nb) % 2**cb
        return (x + 1) ** n + (y + 2) ** n + (z + 3) ** n - c * x * y * z

    vals = {}
    for z, y, x in itertools.product(range(2**M), repeat=3):
        vals[(x, y, z)] = min(abs(raw(x, y, z)), 2**l - 1)
    best = min(vals.values())
    return best, sorted(k for k, v in vals.items() if v == best)


def test_family_parsing():
    assert DiophantineFamily.parse("linear-sum-shift:10") == DiophantineFamily("linear-sum-shift", (10,))
    assert str(DiophantineFamily.parse("paper-pow:1,2")) == "paper-pow:1,2"
    for bad in ("cubic", "linear-sum:3", "linear-sum-shift", "paper-pow:1", "linear-sum-shift:x"):
        with pytest.raises(ContractViolation):
            DiophantineFamily.parse(bad)


def test_decode_examples():
    ls = DiophantineFamily.parse("linear-sum")
    eq = decode_equation(ls, 5)
    assert eq.evaluate(1, 2, 2) == 0 and str(eq) == "x + y + z - 5"
    pp = decode_equation(DiophantineFamily.parse("paper-pow:1,2"), 0)
    assert (pp.power, pp.product) == (2, 1)
    assert str(pp) == "(x+1)^2 + (y+2)^2 + (z+3)^2 - 1*x*y*z"
    ev = decode_equation(DiophantineFamily.parse("even-sum"), 3)
    assert ev.constant == 6
    with pytest.raises(ContractViolation):
        decode_equation(ls, -1)


def test_pow_family_decoding_injective():
    fam = DiophantineFamily.parse("paper-pow:2,3")
    seen = {(e.power, e.product) for e in (decode_equation(fam, p) for p in range(32))}
    assert len(seen) == 32


def test_eval_abs_examples():
    ls = DiophantineFamily.parse("linear-sum")
    assert eval_abs(decode_equation(ls, 5), 1, 2, 2, 3) == 0
    assert eval_abs(decode_equation(ls, 0), 3, 3, 3, 3) == 7
    pp = decode_equation(DiophantineFamily.parse("paper-pow:1,2"), 0)
    assert eval_abs(pp, 0, 0, 0, 8) == 14
    with pytest.raises(ContractViolation):
        eval_abs(pp, -1, 0, 0, 8)


@settings(max_examples=300, deadline=None)
@given(
    st.sampled_from(FAMILIES),
    st.integers(0, 63),
    st.tuples(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40)),
    st.integers(1, 12),
)
def test_saturation_preserves_zero(family, p, xyz, l):
    eq = decode_equation(DiophantineFamily.parse(family), p)
    exact = abs(eq.evaluate(*xyz))
    clamped = eval_abs(eq, *xyz, l)
    assert (clamped == 0) == (exact == 0)
    assert clamped == min(exact, 2**l - 1)


def test_value_table_packing_and_big_powers():
    eq = decode_equation(DiophantineFamily.parse("paper-pow:4,1"), 15)
    assert eq.power == 17
    table = value_table(eq, 2, 40)
    for v in range(64):
        assert table[v] == eval_abs(eq, *decode_triple(v, 2), 40)


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("M,l", [(1, 3), (2, 4), (2, 8)])
def test_minimum_matches_brute_force(family, M, l):
    fam = DiophantineFamily.parse(family)
    for p in range(8):
        cert = classical_minimum(decode_equation(fam, p), M, l)
        best, where = brute(family, p, M, l)
        assert cert.min_value == best
        assert cert.t == len(where)
        assert sorted(cert.minimizers) == where
        assert cert == classical_minimum(decode_equation(fam, p), M, l)


def test_minimum_examples():
    ls = DiophantineFamily.parse("linear-sum")
    cert = classical_minimum(decode_equation(ls, 0), 2, 4)
    assert (cert.min_value, cert.t, cert.minimizers) == (0, 1, ((0, 0, 0),))
    assert classical_minimum(decode_equation(ls, 7), 2, 4).t == 6
    sh = classical_minimum(decode_equation(DiophantineFamily.parse("linear-sum-shift:10"), 7), 2, 4)
    assert (sh.min_value, sh.t, sh.minimizers) == (8, 1, ((3, 3, 3),))


def test_minimizer_list_capped():
    flat = classical_minimum(decode_equation(DiophantineFamily.parse("linear-sum-shift:100"), 0), 5, 1)
    assert flat.t == 2**15 and len(flat.minimizers) == 4096 and flat.truncated


def test_caps():
    eq = decode_equation(DiophantineFamily.parse("linear-sum"), 0)
    with pytest.raises(CapExceeded):
        classical_minimum(eq, 9, 4)
    with pytest.raises(CapExceeded):
        quantum_omega("even-sum", 3, 2, 8, path="quantum-statevector")


@pytest.mark.parametrize(
    "family,r", [("linear-sum", 8), ("linear-sum-shift:10", 0), ("even-sum", 5)]
)
def test_classical_omega_examples(family, r):
    rep = classical_omega(family, 3, 2, 4)
    assert rep.r_exact == rep.r_estimated == r
    assert rep.omega_lower == r / 8
    assert rep.path == "classical"


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("N,M", [(1, 1), (2, 1), (3, 1), (2, 2), (3, 2)])
def test_quantum_analytic_equals_classical(family, N, M):
    q = quantum_omega(family, N, M, 4)
    c = classical_omega(family, N, M, 4)
    assert q.r_estimated == q.r_exact == c.r_exact
    assert q.k == default_filter_rounds(M) == 2 ** (3 * M + 3)
    assert q.counting_bits == N + 6
    assert q.extra["modal_sets_match_argmin"]


@pytest.mark.parametrize("family", FAMILIES)
def test_monotone_in_M(family):
    lows = [classical_omega(family, 3, M, 5).omega_lower for M in (1, 2, 3)]
    assert lows == sorted(lows)


@pytest.mark.parametrize("family", ["linear-sum", "even-sum", "paper-pow:1,2"])
def test_per_equation_filter_structure(family):
    fam = DiophantineFamily.parse(family)
    for p in range(4):
        eq = decode_equation(fam, p)
        table = value_table(eq, 2, 6)
        cert = classical_minimum(eq, 2, 6)
        n = compute_rank(table).n
        assert int(np.sum(n == 64)) == cert.t
        state = filter_amplitudes(uniform_amplitudes(6), compute_rank(table), default_filter_rounds(2))
        mags = np.abs(state.accepted)
        top = np.flatnonzero(mags >= mags.max() * (1 - 1e-12))
        assert len(top) == cert.t


def test_joint_table_layout():
    fam = DiophantineFamily.parse("even-sum")
    table = joint_table(fam, 2, 1, 3)
    assert table.in_width == 5
    for p in range(4):
        for v in range(8):
            assert table[v | p << 3] == eval_abs(decode_equation(fam, p), *decode_triple(v, 1), 3)


@pytest.mark.parametrize("family", ["linear-sum", "linear-sum-shift:10", "even-sum", "linear-sum-shift:4"])
def test_statevector_path(family):
    rep = quantum_omega(family, 3, 1, 3, path="quantum-statevector")
    assert rep.r_estimated == rep.r_exact == classical_omega(family, 3, 1, 3).r_exact
    assert [e.marked for e in rep.equations] == [e.certificate.min_value == 0 for e in rep.equations]


def test_report_json():
    doc = quantum_omega("even-sum", 3, 2, 4, counting_bits=9).to_json()
    assert doc["r_estimated"] == 5 and doc["omega_lower"] == 0.625
    assert doc["cost"] == {"n1": 512, "n2": doc["cost"]["n2"], "n3": 1, "counting_queries": 511}
    assert doc["equations"][0]["sample_minimizers"] == [[0, 0, 0]]
    with pytest.raises(ContractViolation):
        quantum_omega("even-sum", 3, 2, 4, path="classical")
