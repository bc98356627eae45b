"""Insights over decoded SIB2 capture records.

Input is comma-separated text whose header names the MeasurementRecord
fields. Three tables come out of it: how many cells share location, carrier
and PRACH-ConfigIndex; preamble format usage per area class; and the number
of distinct values seen for each random-access IE.
"""
from __future__ import annotations

import csv
import enum
import io
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field, fields
from pathlib import Path

from .prach import ConfigurationError, format_of_index


class IngestError(ValueError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class AreaClass(enum.Enum):
    URBAN = "urban"
    SUBURBAN = "suburban"
    RURAL = "rural"


@dataclass(frozen=True)
class MeasurementRecord:
    country: str
    mno: str
    location_id: str
    area_class: AreaClass
    band: int
    earfcn: int
    enodeb_id: int
    cell_id: int
    prach_config_index: int
    num_ra_preambles: int
    power_ramping_step_db: float
    preamble_initial_target_power_dbm: float
    preamble_trans_max: int
    ra_response_window_sf: int
    contention_resolution_timer_sf: int
    highspeed_flag: bool
    zero_correlation_zone_config: int
    prach_freq_offset: int

    @property
    def dedup_key(self):
        return (self.location_id, self.mno, self.earfcn, self.cell_id)


FIELDS = tuple(f.name for f in fields(MeasurementRecord))

#: Random-access IEs whose distinct values are counted.
IE_COLUMNS = (
    "num_ra_preambles",
    "power_ramping_step_db",
    "preamble_initial_target_power_dbm",
    "preamble_trans_max",
    "ra_response_window_sf",
    "contention_resolution_timer_sf",
    "prach_config_index",
    "highspeed_flag",
    "zero_correlation_zone_config",
    "prach_freq_offset",
)

_FLOAT_FIELDS = {"power_ramping_step_db", "preamble_initial_target_power_dbm"}
_TEXT_FIELDS = {"country", "mno", "location_id"}
_TRUE = {"true", "1", "yes", "t"}
_FALSE = {"false", "0", "no", "f"}


def _parse_value(name, text):
    text = text.strip()
    if name in _TEXT_FIELDS:
        if not text:
            raise ValueError(f"{name} is empty")
        return text
    if name == "area_class":
        try:
            return AreaClass(text.lower())
        except ValueError:
            raise ValueError(f"unknown area_class {text!r}") from None
    if name == "highspeed_flag":
        low = text.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"highspeed_flag is not boolean: {text!r}")
    if name in _FLOAT_FIELDS:
        value = float(text)
        return int(value) if value.is_integer() else value
    return int(text)


def _open_text(source):
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8")
    return source


def load_records(source) -> list:
    """Parse and validate records; duplicate cells keep their first row.

    ``source`` is a path or an open text stream. Row numbers in errors count
    data rows from 1 (the header is row 0).
    """
    stream = _open_text(source)
    try:
        reader = csv.DictReader(stream)
        header = reader.fieldnames or []
        if not header:
            return []
        missing = [f for f in FIELDS if f not in header]
        if missing:
            raise IngestError(0, f"missing columns: {', '.join(missing)}")
        extra = [h for h in header if h not in FIELDS]
        if extra:
            warnings.warn(f"ignoring unknown columns: {', '.join(extra)}", stacklevel=2)

        records, seen = [], set()
        for row_no, row in enumerate(reader, start=1):
            values = {}
            for name in FIELDS:
                raw = row.get(name)
                if raw is None:
                    raise IngestError(row_no, f"missing value for {name}")
                try:
                    values[name] = _parse_value(name, raw)
                except ValueError as exc:
                    raise IngestError(row_no, f"{name}: {exc}") from None
            if not 0 <= values["prach_config_index"] <= 63:
                raise IngestError(row_no, f"prach_config_index out of range 0..63: "
                                          f"{values['prach_config_index']}")
            rec = MeasurementRecord(**values)
            if rec.dedup_key in seen:
                continue
            seen.add(rec.dedup_key)
            records.append(rec)
        return records
    finally:
        if stream is not source:
            stream.close()


def write_records(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIELDS)
        for r in records:
            row = []
            for name in FIELDS:
                v = getattr(r, name)
                if isinstance(v, AreaClass):
                    v = v.value
                elif isinstance(v, bool):
                    v = "true" if v else "false"
                row.append(v)
            w.writerow(row)


def split_by(records, key):
    """Partition records by an attribute name; ``None`` keeps one group ''."""
    if key is None:
        return {"": list(records)}
    groups = defaultdict(list)
    for r in records:
        groups[getattr(r, key)].append(r)
    return dict(sorted(groups.items()))


@dataclass
class RiskHistogram:
    """Sizes of groups of cells sharing location, operator, carrier and index.

    ``group_counts`` counts groups by size. ``location_counts`` counts
    locations by the size of their largest group.
    """

    group_counts: dict = field(default_factory=dict)
    location_counts: dict = field(default_factory=dict)

    @property
    def n_groups(self) -> int:
        return sum(self.group_counts.values())

    @property
    def n_locations(self) -> int:
        return sum(self.location_counts.values())

    @property
    def relative(self) -> dict:
        n = self.n_groups
        return {s: c / n for s, c in sorted(self.group_counts.items())} if n else {}

    @property
    def location_relative(self) -> dict:
        n = self.n_locations
        return {s: c / n for s, c in sorted(self.location_counts.items())} if n else {}

    @property
    def at_risk_fraction(self) -> float:
        n = self.n_locations
        if not n:
            return 0.0
        return sum(c for s, c in self.location_counts.items() if s >= 2) / n


def collision_risk_histogram(records) -> RiskHistogram:
    groups = Counter((r.location_id, r.mno, r.earfcn, r.prach_config_index) for r in records)
    largest = {}
    for (loc, _, _, _), size in groups.items():
        largest[loc] = max(largest.get(loc, 0), size)
    return RiskHistogram(dict(sorted(Counter(groups.values()).items())),
                         dict(sorted(Counter(largest.values()).items())))


@dataclass
class FormatUsage:
    counts: dict
    excluded: list

    @property
    def shares(self) -> dict:
        totals = Counter()
        for (area, _), c in self.counts.items():
            totals[area] += c
        return {k: c / totals[k[0]] for k, c in self.counts.items()}


_AREA_ORDER = {a: i for i, a in enumerate(AreaClass)}


def format_usage_by_area(records) -> FormatUsage:
    """Count cells per (area class, preamble format); reserved indices are set aside."""
    counts, excluded = Counter(), []
    for r in records:
        try:
            fmt = format_of_index(r.prach_config_index)
        except ConfigurationError:
            excluded.append(r)
            continue
        counts[(r.area_class, fmt)] += 1
    ordered = dict(sorted(counts.items(), key=lambda kv: (_AREA_ORDER[kv[0][0]], kv[0][1])))
    return FormatUsage(ordered, excluded)


def unique_ie_value_counts(records) -> dict:
    return {ie: len({getattr(r, ie) for r in records}) for ie in IE_COLUMNS}


def _fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


def histogram_table(records, by=None) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(([by] if by else []) + ["group_size", "n_groups", "group_share", "n_locations",
                                       "location_share", "at_risk_fraction"])
    for key, recs in split_by(records, by).items():
        h = collision_risk_histogram(recs)
        rel, loc_rel = h.relative, h.location_relative
        for size in sorted(set(h.group_counts) | set(h.location_counts)):
            w.writerow(([key] if by else []) + [
                size, h.group_counts.get(size, 0), _fmt(rel.get(size, 0.0)),
                h.location_counts.get(size, 0), _fmt(loc_rel.get(size, 0.0)),
                _fmt(h.at_risk_fraction)])
    return out.getvalue()


def format_table(records, by=None):
    """CSV text of format usage plus the records skipped for reserved indices."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(([by] if by else []) + ["area_class", "format", "count", "share"])
    excluded = []
    for key, recs in split_by(records, by).items():
        usage = format_usage_by_area(recs)
        excluded.extend(usage.excluded)
        shares = usage.shares
        for (area, fmt), c in usage.counts.items():
            w.writerow(([key] if by else []) + [area.value, fmt, c, _fmt(shares[(area, fmt)])])
    return out.getvalue(), excluded


def unique_ie_table(records, by=None) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(([by] if by else []) + ["ie", "unique_values"])
    for key, recs in split_by(records, by).items():
        for ie, n in unique_ie_value_counts(recs).items():
            w.writerow(([key] if by else []) + [ie, n])
    return out.getvalue()
