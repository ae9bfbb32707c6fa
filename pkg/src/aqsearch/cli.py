"""Batch front end: ``aqsearch {rank,minsearch,omega,costs}``.

Exit codes: 0 success or match, 1 mismatch against the classical oracle, 2 input error,
3 resource cap exceeded.  Settings come from built-in defaults, then ``--config`` (flat
``key = value`` lines using the long flag names), then explicit flags.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from pathlib import Path

from . import costs, reports
from .amplitude import compute_rank, min_search_analytic
from .diophantine import PATHS, classical_omega, quantum_omega
from .errors import CapExceeded, ContractViolation, DegenerateInput
from .statevector import min_search_statevector
from .table import load_table

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3

DEFAULTS = {
    "table": None,
    "family": "linear-sum",
    "N": 3,
    "M": 2,
    "l": 4,
    "k": None,
    "counting_bits": None,
    "engine": "analytic",
    "path": "classical",
    "seed": 0,
    "shots": 0,
    "out": None,
    "trace": None,
}
INT_KEYS = {"N", "M", "l", "k", "counting_bits", "seed", "shots"}


class InputError(Exception):
    pass


def read_config(path: str) -> dict:
    settings = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lstrip("-").replace("-", "_")
        if not sep or key not in DEFAULTS:
            raise InputError(f"{path}:{lineno}: expected 'key = value' with a known key")
        value = value.strip()
        if key in INT_KEYS:
            try:
                settings[key] = int(value)
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {key} must be an integer") from exc
        else:
            settings[key] = value
    return settings


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; explicit flags override it")
    common.add_argument("--table", help="function table file")
    common.add_argument("--family", help="equation family, e.g. linear-sum-shift:10")
    common.add_argument("-N", type=int, dest="N", help="input width (search) or equation-index width")
    common.add_argument("-M", type=int, dest="M", help="bits per unknown")
    common.add_argument("-l", type=int, dest="l", help="bits of the clamped |D_p| value")
    common.add_argument("-k", type=int, dest="k", help="filter rounds (default 2^(W+3))")
    common.add_argument("--counting-bits", type=int, dest="counting_bits")
    common.add_argument("--engine", choices=("analytic", "statevector"))
    common.add_argument("--path", choices=PATHS)
    common.add_argument("--seed", type=int)
    common.add_argument("--shots", type=int)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--trace", help="JSONL gate trace (statevector runs)")

    parser = argparse.ArgumentParser(prog="aqsearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("rank", parents=[common], help="rank profile n(x) of a table")
    sub.add_parser("minsearch", parents=[common], help="single-measurement minimum search")
    sub.add_parser("omega", parents=[common], help="lower bound on the solvable fraction of a family")
    sub.add_parser("costs", parents=[common], help="query-cost comparison table")
    for action in common._actions:
        action.default = None
    return parser


def resolve(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if args.config:
        settings.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    for key in ("N", "M", "l"):
        if settings[key] is not None and settings[key] < 1:
            raise InputError(f"{key} must be positive")
    for key in ("k", "counting_bits", "shots"):
        if settings[key] is not None and settings[key] < 0:
            raise InputError(f"{key} must be >= 0")
    if settings["engine"] not in ("analytic", "statevector"):
        raise InputError(f"unknown engine {settings['engine']!r}")
    if settings["path"] not in PATHS:
        raise InputError(f"unknown path {settings['path']!r}")
    return settings


def _require_table(cfg: dict):
    if not cfg["table"]:
        raise InputError("--table is required")
    return load_table(cfg["table"])


def cmd_rank(cfg: dict, trace) -> tuple[dict, int]:
    table = _require_table(cfg)
    rank = compute_rank(table)
    return {"widths": [table.in_width, table.out_width], "n": [int(v) for v in rank.n]}, EXIT_OK


def cmd_minsearch(cfg: dict, trace) -> tuple[dict, int]:
    table = _require_table(cfg)
    k = cfg["k"]
    if cfg["engine"] == "statevector":
        report = min_search_statevector(table, k, shots=cfg["shots"], seed=cfg["seed"], trace=trace)
    else:
        report = min_search_analytic(table, k)
    return report.to_json(), EXIT_OK if report.match else EXIT_MISMATCH


def cmd_omega(cfg: dict, trace) -> tuple[dict, int]:
    args = (cfg["family"], cfg["N"], cfg["M"], cfg["l"])
    if cfg["path"] == "classical":
        report = classical_omega(*args)
    else:
        report = quantum_omega(*args, k=cfg["k"], counting_bits=cfg["counting_bits"], path=cfg["path"], trace=trace)
    return report.to_json(), EXIT_OK if report.match else EXIT_MISMATCH


def cmd_costs(cfg: dict, trace) -> tuple[dict, int]:
    return costs.cost_table(cfg["N"], cfg["M"]), EXIT_OK


COMMANDS = {"rank": cmd_rank, "minsearch": cmd_minsearch, "omega": cmd_omega, "costs": cmd_costs}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        with contextlib.ExitStack() as stack:
            trace = stack.enter_context(open(cfg["trace"], "w", encoding="utf-8")) if cfg["trace"] else None
            doc, code = COMMANDS[args.command](cfg, trace)
        text = reports.dumps(doc)
        if cfg["out"]:
            reports.write_atomic(cfg["out"], text)
        else:
            sys.stdout.write(text)
        if args.command == "costs" and cfg["out"]:
            print(costs.format_table(doc))
        return code
    except CapExceeded as exc:
        print(f"aqsearch: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, ContractViolation, DegenerateInput, OSError) as exc:
        print(f"aqsearch: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
