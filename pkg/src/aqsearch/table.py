"""Explicit function tables ``x -> f(x)`` over fixed-width unsigned integers.

Text format::

    widths W_in W_out
    0 <value>
    1 <value>
    ...

one line per input, ascending, decimal.  Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .errors import ContractViolation, TableFormatError

MAX_OUT_WIDTH = 62


@dataclass(frozen=True, eq=False)
class FunctionTable:
    in_width: int
    out_width: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.in_width < 0 or self.out_width < 1:
            raise ContractViolation(f"bad widths ({self.in_width}, {self.out_width})")
        if self.out_width > MAX_OUT_WIDTH:
            raise ContractViolation(f"out_width {self.out_width} exceeds {MAX_OUT_WIDTH}")
        values = np.asarray(self.values)
        if values.ndim != 1 or values.shape[0] != 1 << self.in_width:
            raise ContractViolation(
                f"expected {1 << self.in_width} values for in_width={self.in_width}, got shape {values.shape}"
            )
        if values.size and not np.issubdtype(values.dtype, np.integer):
            raise ContractViolation("table values must be integers")
        values = values.astype(np.int64, copy=True)
        if values.size and (values.min() < 0 or values.max() >= 1 << self.out_width):
            raise ContractViolation(f"table value outside [0, 2^{self.out_width})")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values: Iterable[int], out_width: int | None = None) -> "FunctionTable":
        """Build a table from a value list, inferring ``in_width`` (and ``out_width`` if omitted)."""
        arr = np.asarray(list(values), dtype=np.int64)
        size = arr.shape[0]
        if size == 0 or size & (size - 1):
            raise ContractViolation(f"table length {size} is not a power of two")
        in_width = size.bit_length() - 1
        if out_width is None:
            out_width = max(1, int(arr.max()).bit_length())
        return cls(in_width, out_width, arr)

    @property
    def size(self) -> int:
        return 1 << self.in_width

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, x: int) -> int:
        return int(self.values[x])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FunctionTable):
            return NotImplemented
        return (
            self.in_width == other.in_width
            and self.out_width == other.out_width
            and np.array_equal(self.values, other.values)
        )

    def argmin_set(self) -> list[int]:
        """All global minimizers, ascending (brute force)."""
        return [int(x) for x in np.flatnonzero(self.values == self.values.min())]

    def to_text(self) -> str:
        lines = [f"widths {self.in_width} {self.out_width}"]
        lines.extend(f"{x} {int(v)}" for x, v in enumerate(self.values))
        return "\n".join(lines) + "\n"


def parse_table(stream: TextIO | str) -> FunctionTable:
    text = stream if isinstance(stream, str) else stream.read()
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise TableFormatError("empty table file")

    lineno, header = rows[0]
    if len(header) != 3 or header[0] != "widths":
        raise TableFormatError(f"line {lineno}: expected 'widths W_in W_out'")
    try:
        in_width, out_width = int(header[1]), int(header[2])
    except ValueError as exc:
        raise TableFormatError(f"line {lineno}: widths must be integers") from exc
    if not 0 <= in_width <= 30:
        raise TableFormatError(f"line {lineno}: unsupported W_in={in_width}")

    body = rows[1:]
    if len(body) != 1 << in_width:
        raise TableFormatError(f"expected {1 << in_width} value lines, found {len(body)}")
    values = []
    for expected_x, (lineno, fields) in enumerate(body):
        if len(fields) != 2:
            raise TableFormatError(f"line {lineno}: expected 'x value'")
        try:
            x, v = int(fields[0]), int(fields[1])
        except ValueError as exc:
            raise TableFormatError(f"line {lineno}: non-integer field") from exc
        if x != expected_x:
            raise TableFormatError(f"line {lineno}: expected x={expected_x}, got {x}")
        values.append(v)
    try:
        return FunctionTable(in_width, out_width, np.asarray(values, dtype=np.int64))
    except ContractViolation as exc:
        raise TableFormatError(str(exc)) from exc


def load_table(path: str | Path) -> FunctionTable:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_table(fh)
    except OSError as exc:
        raise TableFormatError(f"cannot read {path}: {exc}") from exc


def random_table(in_width: int, out_width: int, rng: np.random.Generator, injective: bool = False) -> FunctionTable:
    """Seeded random table; ``injective`` draws distinct values (needs out_width >= in_width)."""
    size = 1 << in_width
    if injective:
        if out_width < in_width:
            raise ContractViolation("injective table needs out_width >= in_width")
        values = rng.choice(1 << out_width, size=size, replace=False)
    else:
        values = rng.integers(0, 1 << out_width, size=size)
    return FunctionTable(in_width, out_width, values.astype(np.int64))
