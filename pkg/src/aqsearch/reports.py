"""JSON report output: canonical serialization, atomic file writes, bundled schemas."""

from __future__ import annotations

import json
import os
import tempfile
from importlib import resources
from pathlib import Path

SCHEMAS = ("rank", "minsearch", "omega", "costs")


def dumps(doc: dict) -> str:
    # sorted keys and fixed float repr keep reruns byte-identical
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over the target."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_schema(name: str) -> dict:
    if name not in SCHEMAS:
        raise KeyError(f"no schema named {name!r}")
    text = resources.files("aqsearch").joinpath("schemas", f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)
