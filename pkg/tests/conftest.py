import itertools

import numpy as np
import pytest

from aqsearch.table import FunctionTable


def brute_rank(values):
    return [sum(1 for w in values if w >= v) for v in values]


def all_tables(in_width, out_width):
    size = 1 << in_width
    for values in itertools.product(range(1 << out_width), repeat=size):
        yield FunctionTable(in_width, out_width, np.array(values))


def injective_tables(in_width):
    size = 1 << in_width
    for perm in itertools.permutations(range(size)):
        yield FunctionTable(in_width, in_width, np.array(perm))


@pytest.fixture
def example_table():
    return FunctionTable.from_values([3, 1, 2, 0], out_width=2)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion; printed in the terminal summary."""

    def record(number: int, passed: bool, detail: str) -> bool:
        _ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
