import csv
import io
import math
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from rachsim.analyzer import (FIELDS, IE_COLUMNS, AreaClass, IngestError,
                              collision_risk_histogram, format_table, format_usage_by_area,
                              histogram_table, load_records, unique_ie_table,
                              unique_ie_value_counts, write_records)
from rachsim.synthetic import generate_records

FIXTURE = Path(__file__).parent / "data" / "sib2_fixture.csv"

# Preamble format per index by 16-row block; reserved rows have no format.
RESERVED = {30, 46, 60, 61, 62}


def fmt_of(index):
    return None if index in RESERVED else index // 16


def brute_histogram(records):
    """Group sizes and per-location largest group, by nested loops."""
    sizes = []
    done = set()
    for i, a in enumerate(records):
        if i in done:
            continue
        size = 0
        for j, b in enumerate(records):
            if (a.location_id, a.mno, a.earfcn, a.prach_config_index) == \
                    (b.location_id, b.mno, b.earfcn, b.prach_config_index):
                size += 1
                done.add(j)
        sizes.append((a.location_id, size))
    groups, largest = {}, {}
    for loc, size in sizes:
        groups[size] = groups.get(size, 0) + 1
        largest[loc] = max(largest.get(loc, 0), size)
    locations = {}
    for size in largest.values():
        locations[size] = locations.get(size, 0) + 1
    return groups, locations


def brute_formats(records):
    counts = {}
    for area in AreaClass:
        for fmt in range(4):
            n = 0
            for r in records:
                if r.area_class is area and fmt_of(r.prach_config_index) == fmt:
                    n += 1
            if n:
                counts[(area, fmt)] = n
    return counts


def brute_unique(records):
    out = {}
    for ie in IE_COLUMNS:
        seen = []
        for r in records:
            v = getattr(r, ie)
            if v not in seen:
                seen.append(v)
        out[ie] = len(seen)
    return out


@pytest.fixture
def records():
    return load_records(FIXTURE)


def test_fixture_loads(records):
    assert len(records) == 20
    assert records[0].area_class is AreaClass.URBAN
    assert records[9].highspeed_flag is True


def test_histogram_hand_values(records):
    h = collision_risk_histogram(records)
    assert h.group_counts == {1: 11, 2: 3, 3: 1}
    assert h.location_counts == {2: 3, 3: 1}
    assert h.at_risk_fraction == 1.0
    assert sum(h.relative.values()) == pytest.approx(1.0)


def test_histogram_matches_brute_force(records):
    h = collision_risk_histogram(records)
    assert (h.group_counts, h.location_counts) == brute_histogram(records)


def test_format_usage_hand_values(records):
    usage = format_usage_by_area(records)
    assert usage.counts == {
        (AreaClass.URBAN, 0): 9, (AreaClass.URBAN, 1): 1, (AreaClass.URBAN, 3): 1,
        (AreaClass.SUBURBAN, 0): 4,
        (AreaClass.RURAL, 0): 1, (AreaClass.RURAL, 1): 2, (AreaClass.RURAL, 2): 1,
    }
    assert [r.prach_config_index for r in usage.excluded] == [30]
    assert usage.counts == brute_formats(records)


def test_format_shares_sum_to_one(records):
    shares = format_usage_by_area(records).shares
    for area in AreaClass:
        assert math.fsum(v for (a, _), v in shares.items() if a is area) == pytest.approx(1.0)


def test_unique_ies_hand_values(records):
    u = unique_ie_value_counts(records)
    assert u == brute_unique(records)
    assert u["prach_config_index"] == 11
    assert u["preamble_initial_target_power_dbm"] == 3
    assert u["highspeed_flag"] == 2


def _table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_grouped_tables(records):
    rows = _table(histogram_table(records, "country"))
    de = {int(r["group_size"]): int(r["n_groups"]) for r in rows if r["country"] == "DE"}
    nl = {int(r["group_size"]): int(r["n_groups"]) for r in rows if r["country"] == "NL"}
    assert de == {1: 5, 2: 1, 3: 1}
    assert nl == {1: 6, 2: 2}
    text, excluded = format_table(records, "mno")
    assert len(excluded) == 1
    by_mno = {}
    for r in _table(text):
        by_mno.setdefault(r["mno"], 0)
        by_mno[r["mno"]] += int(r["count"])
    assert by_mno == {"OpA": 6, "OpB": 4, "OpC": 5, "OpD": 4}
    ies = _table(unique_ie_table(records, "country"))
    assert {(r["country"], r["ie"]): int(r["unique_values"]) for r in ies}[("NL", "prach_config_index")] == 7


def _csv_with(row_overrides, n=6):
    base = FIXTURE.read_text().splitlines()
    lines = base[: n + 1]
    for i, (col, value) in row_overrides.items():
        cells = lines[i].split(",")
        cells[FIELDS.index(col)] = value
        lines[i] = ",".join(cells)
    return io.StringIO("\n".join(lines) + "\n")


def test_out_of_range_index_reports_row():
    with pytest.raises(IngestError) as err:
        load_records(_csv_with({5: ("prach_config_index", "64")}))
    assert err.value.row == 5
    assert "row 5" in str(err.value)


def test_bad_area_class_reports_row():
    with pytest.raises(IngestError, match="row 2"):
        load_records(_csv_with({2: ("area_class", "jungle")}))


def test_missing_column():
    text = FIXTURE.read_text().replace("zero_correlation_zone_config,", "", 1)
    with pytest.raises(IngestError, match="missing columns"):
        load_records(io.StringIO(text))


def test_extra_column_warns():
    lines = FIXTURE.read_text().splitlines()
    text = "\n".join([lines[0] + ",note"] + [l + ",x" for l in lines[1:]])
    with pytest.warns(UserWarning, match="note"):
        assert len(load_records(io.StringIO(text))) == 20


def test_duplicates_keep_first():
    lines = FIXTURE.read_text().splitlines()
    dup = lines[1].replace(",1,52,2,", ",2,52,2,", 1)
    recs = load_records(io.StringIO("\n".join(lines[:2] + [dup]) + "\n"))
    assert len(recs) == 1 and recs[0].prach_config_index == 1


def test_header_only_and_empty():
    header = FIXTURE.read_text().splitlines()[0]
    assert load_records(io.StringIO(header + "\n")) == []
    assert load_records(io.StringIO("")) == []
    assert histogram_table([]).count("\n") == 1


def test_write_round_trip(tmp_path, records):
    p = tmp_path / "out.csv"
    write_records(records, p)
    assert load_records(p) == records


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_synthetic_matches_brute_force(n_locations, seed):
    recs = generate_records(n_locations, seed)
    h = collision_risk_histogram(recs)
    assert (h.group_counts, h.location_counts) == brute_histogram(recs)
    assert format_usage_by_area(recs).counts == brute_formats(recs)
    assert unique_ie_value_counts(recs) == brute_unique(recs)
    shares = format_usage_by_area(recs).shares
    for area in {a for a, _ in shares}:
        assert math.fsum(v for (a, _), v in shares.items() if a is area) == pytest.approx(1.0)
