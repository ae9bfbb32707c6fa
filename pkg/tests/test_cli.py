import json
import subprocess
import sys

import jsonschema
import pytest

from aqsearch.cli import main
from aqsearch.reports import load_schema, write_atomic


@pytest.fixture
def table_file(tmp_path, example_table):
    path = tmp_path / "t.txt"
    path.write_text(example_table.to_text())
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def check(doc, name):
    jsonschema.validate(doc, load_schema(name))
    return doc


def test_rank(capsys, table_file, tmp_path):
    code, doc = run(capsys, "rank", "--table", table_file)
    assert code == 0 and check(doc, "rank")["n"] == [1, 3, 2, 4]
    flat = tmp_path / "flat.txt"
    flat.write_text("widths 3 2\n" + "".join(f"{x} 1\n" for x in range(8)))
    assert run(capsys, "rank", "--table", str(flat))[1]["n"] == [8] * 8
    bad = tmp_path / "bad.txt"
    bad.write_text("widths 2 2\n0 1\n")
    assert main(["rank", "--table", str(bad)]) == 2
    assert main(["rank"]) == 2


def test_minsearch_engines_agree(capsys, table_file):
    code, a = run(capsys, "minsearch", "--table", table_file, "-k", "32")
    assert code == 0 and check(a, "minsearch")["modal_set"] == [3]
    assert a["cost"] == {"n1": 32, "n2": a["iterations"], "n3": 1}
    code, s = run(capsys, "minsearch", "--table", table_file, "-k", "32", "--engine", "statevector")
    assert code == 0 and check(s, "minsearch")["modal_set"] == a["modal_set"]


def test_minsearch_exit_codes(capsys, table_file, tmp_path):
    # no filter rounds: every input stays equally likely, so the report disagrees with argmin
    assert run(capsys, "minsearch", "--table", table_file, "-k", "0")[0] == 1
    big = tmp_path / "big.txt"
    big.write_text("widths 8 8\n" + "".join(f"{x} {x}\n" for x in range(256)))
    assert main(["minsearch", "--table", str(big), "--engine", "statevector"]) == 3
    assert main(["minsearch", "--table", str(big)]) == 0


def test_omega(capsys):
    code, doc = run(capsys, "omega", "--family", "linear-sum", "-N", "3", "-M", "2")
    assert code == 0 and check(doc, "omega")["omega_lower"] == 1.0
    code, doc = run(capsys, "omega", "--family", "even-sum", "--path", "quantum-analytic", "--counting-bits", "9")
    assert code == 0 and check(doc, "omega")["omega_lower"] == 0.625
    code, doc = run(capsys, "omega", "--family", "linear-sum-shift:10", "--path", "quantum-analytic")
    assert code == 0 and doc["omega_lower"] == 0.0
    # two counting bits cannot resolve 5 marked equations out of 8
    code, doc = run(capsys, "omega", "--family", "even-sum", "--path", "quantum-analytic", "--counting-bits", "2")
    assert code == 1 and doc["r_exact"] == 5 and doc["r_estimated"] != 5
    assert main(["omega", "--family", "cubic"]) == 2
    assert main(["omega", "--path", "quantum-statevector", "-l", "8"]) == 3


def test_costs(capsys):
    code, doc = run(capsys, "costs", "-N", "4", "-M", "2")
    check(doc, "costs")
    aqs, dio = doc["rows"]
    assert (aqs["n1"], aqs["n3"]) == (128, 1)
    assert dio["n1"] == 512
    assert [b["algorithm"] for b in doc["baselines"]] == ["LM", "DH"]
    _, doc = run(capsys, "costs", "-N", "2")
    assert doc["rows"][0]["success"] == pytest.approx(1.0, abs=1e-12)


def test_config_and_override(capsys, tmp_path, table_file):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# search\ntable = {table_file}\nk = 8\nengine = statevector\n")
    _, doc = run(capsys, "minsearch", "--config", str(cfg))
    assert doc["k"] == 8 and doc["engine"] == "statevector"
    _, doc = run(capsys, "minsearch", "--config", str(cfg), "-k", "16", "--engine", "analytic")
    assert doc["k"] == 16 and doc["engine"] == "analytic"
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert main(["minsearch", "--config", str(bad)]) == 2
    bad.write_text("k = many\n")
    assert main(["minsearch", "--config", str(bad)]) == 2


def test_byte_identical_reruns(tmp_path, table_file):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        args = ["minsearch", "--table", table_file, "--engine", "statevector", "--shots", "500", "--seed", "4"]
        assert main(args + ["--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    for i in range(2):
        assert main(["omega", "--path", "quantum-analytic", "--family", "even-sum", "--out", str(tmp_path / f"o{i}.json")]) == 0
    assert (tmp_path / "o0.json").read_bytes() == (tmp_path / "o1.json").read_bytes()


def test_trace_file(tmp_path, table_file):
    trace = tmp_path / "trace.jsonl"
    assert main(["minsearch", "--table", table_file, "-k", "2", "--engine", "statevector", "--trace", str(trace), "--out", str(tmp_path / "r.json")]) == 0
    records = [json.loads(line) for line in trace.read_text().splitlines()]
    assert records[0] == {"gate": "hadamard_block", "registers": ["x"], "norm_after": 1.0}
    assert all(abs(r["norm_after"] - 1) < 1e-12 for r in records)


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "x.json"
    write_atomic(target, "{}\n")
    write_atomic(target, '{"a": 1}\n')
    assert target.read_text() == '{"a": 1}\n'
    assert [p.name for p in tmp_path.iterdir()] == ["x.json"]


def test_module_entry_point(table_file):
    proc = subprocess.run([sys.executable, "-m", "aqsearch", "rank", "--table", table_file], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["n"] == [1, 3, 2, 4]
