import json
import math

from parityqht.records import (
    ALL_COLUMNS,
    CSV_COLUMNS,
    format_value,
    json_value,
    new_record,
    read_csv_records,
    render,
    render_csv,
    render_json,
    tolerance_header,
    write_records,
)
from parityqht.states import MaxMixed, PureQubit
from parityqht.types import ExtendedReal

TOLERANCES = {"classify": 1e-12, "duality": 1e-8}


def _record(**fields):
    """Helper: a beta record for p=0.75 against I/2 with overrides."""
    record = new_record("beta", PureQubit(0.75), MaxMixed())
    record.update({"n": 4, "eps": 0.1, "beta": 0.11166666666666667})
    record.update(fields)
    return record


# --- new_record ---

def test_new_record_has_every_column():
    record = new_record("twirl", PureQubit(0.3))
    assert set(record) == set(ALL_COLUMNS)
    assert record["null_kind"] == "pure"
    assert record["alt_kind"] == ""
    assert record["beta"] is None


def test_new_record_stores_relative_phase():
    record = new_record("theorem1", PureQubit(0.3, 1.0), PureQubit(0.6, 0.5))
    assert abs(record["phi"] - (2 * math.pi - 0.5)) < 1e-12
    assert record["p"] == 0.3 and record["q"] == 0.6


def test_new_record_maxmixed_kinds():
    record = new_record("beta", MaxMixed(), PureQubit.basis(0))
    assert record["p"] is None
    assert record["q"] == 1.0
    assert (record["null_kind"], record["alt_kind"]) == ("maxmixed", "basis0")


# --- formatting ---

def test_format_value():
    assert format_value(None) == ""
    assert format_value(0.11166666666666667) == "0.111666667"
    assert format_value(7) == "7"
    assert format_value(True) == "true"
    assert format_value(ExtendedReal.infinity()) == "inf"
    assert format_value(ExtendedReal.finite(3.16272)) == "3.16272"
    assert format_value(math.inf) == "inf"


def test_json_value():
    assert json_value(ExtendedReal.infinity()) == "inf"
    assert json_value(0.11166666666666667) == 0.111666667
    assert json_value(None) is None
    assert json_value(False) is False


def test_tolerance_header_sorted():
    assert tolerance_header({"duality": 1e-8, "classify": 1e-12}) == "# tolerances: classify=1e-12 duality=1e-08"


# --- rendering ---

def test_render_csv_layout():
    text = render_csv([_record()], TOLERANCES)
    lines = text.splitlines()
    assert lines[0].startswith("# tolerances:")
    assert lines[1].split(",")[: len(CSV_COLUMNS)] == list(CSV_COLUMNS)
    row = dict(zip(lines[1].split(","), lines[2].split(",")))
    assert row["beta"] == "0.111666667"
    assert row["alt_kind"] == "maxmixed"
    assert row["q"] == ""
    assert text.endswith("\n")


def test_render_json_mirrors_columns():
    payload = json.loads(render_json([_record(dhe=ExtendedReal.infinity())], TOLERANCES))
    assert payload["tolerances"] == TOLERANCES
    assert list(payload["records"][0]) == list(ALL_COLUMNS)
    assert payload["records"][0]["dhe"] == "inf"


def test_render_is_deterministic():
    records = [_record(n=n) for n in (1, 2, 3)]
    assert render(records, TOLERANCES, "csv") == render(records, TOLERANCES, "csv")
    assert render(records, TOLERANCES, "json").startswith("{")


def test_write_and_read_csv(tmp_path):
    path = tmp_path / "out.csv"
    write_records(path, [_record(), _record(n=5)], TOLERANCES, "csv")
    rows = read_csv_records(path)
    assert [row["n"] for row in rows] == ["4", "5"]
    assert rows[0]["command"] == "beta"


def test_read_csv_records_missing_file(tmp_path):
    assert read_csv_records(tmp_path / "none.csv") == []
