"""Result records and their CSV / JSON renderings.

Numbers are written with 9 significant digits and +inf as ``inf`` so that a
fixed configuration always produces the same bytes.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from pathlib import Path

from parityqht.states import Hypothesis, MaxMixed, PureQubit
from parityqht.types import ExtendedReal, RecordDict

CSV_COLUMNS = (
    "command", "p", "q", "phi", "null_kind", "alt_kind", "n", "eps",
    "beta", "dhe", "dhe_over_n", "case_tag", "n_eps", "oracle_beta", "abs_diff",
)
EXTRA_COLUMNS = (
    "w_even", "w_odd", "chernoff", "qre", "n_formula", "lower_bound", "upper_bound", "in_range",
)
ALL_COLUMNS = CSV_COLUMNS + EXTRA_COLUMNS

DIGITS = 9


def _kind(h: Hypothesis | None) -> str:
    return "" if h is None else h.kind()


def new_record(command: str, h0: Hypothesis | None = None, h1: Hypothesis | None = None) -> RecordDict:
    """A record with every column present and the state columns filled."""
    p = h0.p if isinstance(h0, PureQubit) else None
    q = h1.p if isinstance(h1, PureQubit) else None
    if isinstance(h0, PureQubit) and isinstance(h1, PureQubit):
        phi = math.fmod(h1.phi - h0.phi + 2 * math.pi, 2 * math.pi)
    elif isinstance(h1, PureQubit):
        phi = h1.phi
    elif isinstance(h0, PureQubit) and not isinstance(h1, MaxMixed):
        phi = h0.phi
    else:
        phi = None
    record = {column: None for column in ALL_COLUMNS}
    record.update({
        "command": command,
        "p": p,
        "q": q,
        "phi": phi,
        "null_kind": _kind(h0),
        "alt_kind": _kind(h1),
    })
    return record


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, ExtendedReal):
        return value.format(DIGITS)
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{DIGITS}g}"
    return str(value)


def json_value(value):
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, ExtendedReal):
        return "inf" if value.infinite else float(f"{value.value:.{DIGITS}g}")
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(f"{value:.{DIGITS}g}")
    return str(value)


def tolerance_header(tolerances: dict[str, float]) -> str:
    parts = " ".join(f"{key}={tolerances[key]:g}" for key in sorted(tolerances))
    return f"# tolerances: {parts}"


def render_csv(records: list[RecordDict], tolerances: dict[str, float]) -> str:
    buf = io.StringIO()
    buf.write(tolerance_header(tolerances) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ALL_COLUMNS)
    for record in records:
        writer.writerow([format_value(record.get(column)) for column in ALL_COLUMNS])
    return buf.getvalue()


def render_json(records: list[RecordDict], tolerances: dict[str, float]) -> str:
    payload = {
        "tolerances": {key: tolerances[key] for key in sorted(tolerances)},
        "records": [
            {column: json_value(record.get(column)) for column in ALL_COLUMNS}
            for record in records
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def render(records: list[RecordDict], tolerances: dict[str, float], fmt: str) -> str:
    if fmt == "json":
        return render_json(records, tolerances)
    return render_csv(records, tolerances)


def write_records(path: Path, records: list[RecordDict], tolerances: dict[str, float], fmt: str) -> None:
    path.write_text(render(records, tolerances, fmt))


def read_csv_records(path: Path) -> list[dict[str, str]]:
    """Read back a CSV written by ``render_csv``, skipping ``#`` comment lines."""
    if not path.exists():
        return []
    lines = [line for line in path.read_text().splitlines() if line and not line.startswith("#")]
    return list(csv.DictReader(lines))
