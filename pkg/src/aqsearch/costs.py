"""Query-cost comparison rows: the filter-cascade search against two measurement-heavy baselines.

The cascade row is evaluated numerically from the Grover schedule at ``p_good = 2^-W``.
The baseline rows are fixed asymptotic formulas and are only displayed, never run.
"""

from __future__ import annotations

from .amplitude import default_rounds, grover_schedule

# (name, n1, n2, n3, success) as published for the two baseline minimum-finding algorithms
BASELINE_ROWS = (
    ("LM", "0", "O(2^{N/2})", "O(log(2^N))", "at least 1/2"),
    ("DH", "0", "O(2^{N/2})", "O(log^2(2^N))", "at least 1/2"),
)


def aqs_row(in_width: int, rounds: int | None = None, label: str = "AQS") -> dict:
    """Evaluated cost row for a database of ``2^in_width`` entries with one minimizer."""
    schedule = grover_schedule(2.0 ** -in_width)
    return {
        "algorithm": label,
        "in_width": in_width,
        "n1": default_rounds(in_width) if rounds is None else rounds,
        "n2": schedule.iterations,
        "n3": 1,
        "success": schedule.predicted_success,
    }


def cost_table(N: int | None = None, M: int | None = None) -> dict:
    rows = []
    if N is not None:
        rows.append(aqs_row(N))
    if M is not None:
        # the equation pipeline searches 2^(3M) packed triples per equation
        rows.append(aqs_row(3 * M, label="AQS-diophantine"))
    baselines = [
        {"algorithm": name, "n1": n1, "n2": n2, "n3": n3, "success": s}
        for name, n1, n2, n3, s in BASELINE_ROWS
    ]
    return {"N": N, "M": M, "rows": rows, "baselines": baselines}


def format_table(doc: dict) -> str:
    header = f"{'algorithm':<16}{'N1':>12}{'N2':>14}{'N3':>16}  success"
    lines = [header, "-" * len(header)]
    for r in doc["rows"]:
        lines.append(f"{r['algorithm']:<16}{r['n1']:>12}{r['n2']:>14}{r['n3']:>16}  {r['success']:.12g}")
    for r in doc["baselines"]:
        lines.append(f"{r['algorithm']:<16}{r['n1']:>12}{r['n2']:>14}{r['n3']:>16}  {r['success']}")
    return "\n".join(lines)
