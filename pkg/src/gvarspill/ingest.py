"""Readers and writers for the input tables.

Three delimited-text tables feed the pipeline: disaster declarations, bilateral
trade flows and the state activity panel. A fourth, optional, table maps states
to climate regions. Parsers validate rows into immutable records; rows that
cannot be used are collected in a rejects list instead of being dropped, so
``len(records) + len(rejects)`` always equals the number of data rows read.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import geography
from .errors import (
    DuplicateEntry,
    EmptyFile,
    InteriorGap,
    MalformedDate,
    MissingColumn,
    NegativeValue,
    UnknownLabel,
    UnknownRegion,
    UnknownState,
    WindowEmpty,
)

logger = logging.getLogger(__name__)

EVENT_GROUPS = ("winter", "tropical_storm", "storm", "fire", "flood", "drought")
NON_WEATHER = "non_weather"

# FEMA incidentType labels -> event group. Matching is case-insensitive.
DEFAULT_TAXONOMY: dict[str, str] = {
    "freezing": "winter",
    "severe ice storm": "winter",
    "snow": "winter",
    "snowstorm": "winter",
    "winter storm": "winter",
    "hurricane": "tropical_storm",
    "typhoon": "tropical_storm",
    "tornado": "tropical_storm",
    "tropical storm": "tropical_storm",
    "tropical depression": "tropical_storm",
    "coastal storm": "storm",
    "severe storm": "storm",
    "severe storm(s)": "storm",
    "fire": "fire",
    "flood": "flood",
    "drought": "drought",
    "biological": NON_WEATHER,
    "chemical": NON_WEATHER,
    "dam/levee break": NON_WEATHER,
    "earthquake": NON_WEATHER,
    "fishing losses": NON_WEATHER,
    "human cause": NON_WEATHER,
    "mud/landslide": NON_WEATHER,
    "other": NON_WEATHER,
    "terrorist": NON_WEATHER,
    "toxic substances": NON_WEATHER,
    "tsunami": NON_WEATHER,
    "volcanic eruption": NON_WEATHER,
}

DEFAULT_WINDOW = (np.datetime64("1990-01", "M"), np.datetime64("2019-12", "M"))


@dataclass(frozen=True)
class IngestConfig:
    """Column names, taxonomy, state universe and sample window."""

    delimiter: str = ","
    declaration_columns: Mapping[str, str] = field(
        default_factory=lambda: {
            "id": "declaration_id",
            "state": "state",
            "incident_type": "incident_type",
            "begin_date": "begin_date",
            "end_date": "end_date",
            "counties": "counties",
        }
    )
    trade_columns: Mapping[str, str] = field(
        default_factory=lambda: {"origin": "origin", "destination": "destination", "value": "value"}
    )
    activity_layout: str = "wide"
    activity_columns: Mapping[str, str] = field(
        default_factory=lambda: {"date": "date", "state": "state", "value": "value"}
    )
    taxonomy: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_TAXONOMY))
    states: tuple[str, ...] = geography.STATES
    window: tuple[np.datetime64, np.datetime64] = DEFAULT_WINDOW


@dataclass(frozen=True)
class Reject:
    line: int
    reason: str
    row: Mapping[str, str]


@dataclass(frozen=True)
class DeclarationRecord:
    declaration_id: str
    state: str
    incident_type: str
    group: str
    begin_date: dt.date
    end_date: dt.date | None
    counties_hit: int
    counties: tuple[str, ...] | None = None

    @property
    def month(self) -> np.datetime64:
        return np.datetime64(self.begin_date, "M")


@dataclass(frozen=True)
class DeclarationTable:
    records: tuple[DeclarationRecord, ...]
    rejects: tuple[Reject, ...]
    n_rows: int

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class TradeFlow:
    origin: str
    destination: str
    value: float
    self_flow: bool


@dataclass(frozen=True)
class TradeFlowTable:
    entries: tuple[TradeFlow, ...]
    rejects: tuple[Reject, ...] = ()
    n_rows: int = 0

    def matrix(self, labels: Sequence[str], ignore_unknown: bool = False) -> np.ndarray:
        """Dense flow matrix ``M[o, d]`` with self-flows zeroed."""
        index = {s: k for k, s in enumerate(labels)}
        m = np.zeros((len(labels), len(labels)))
        for e in self.entries:
            if e.self_flow:
                continue
            if e.origin not in index or e.destination not in index:
                if ignore_unknown:
                    continue
                raise UnknownLabel(f"flow {e.origin}->{e.destination} outside label set")
            m[index[e.origin], index[e.destination]] += e.value
        return m


@dataclass(frozen=True)
class ActivityPanel:
    dates: np.ndarray  # datetime64[M], strictly increasing, monthly
    states: tuple[str, ...]
    values: np.ndarray  # T x N

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]

    def differences(self) -> "ActivityPanel":
        return ActivityPanel(self.dates[1:], self.states, np.diff(self.values, axis=0))


@dataclass(frozen=True)
class RegionMap:
    """State -> climate region (``None`` for unassigned states)."""

    regions: Mapping[str, str | None]
    order: tuple[str, ...] = geography.REGION_ORDER

    def members(self, region: str, states: Sequence[str] | None = None) -> list[str]:
        if region not in self.order:
            raise UnknownRegion(region)
        pool = self.regions if states is None else states
        return [s for s in pool if self.regions.get(s) == region]

    def region_of(self, state: str) -> str | None:
        return self.regions.get(state)

    def check_us(self) -> None:
        """Check the 48-assigned / AK-HI-unassigned layout of the NOAA map."""
        assigned = [s for s, r in self.regions.items() if r is not None]
        if len(assigned) != 48 or self.regions.get("AK") or self.regions.get("HI"):
            raise ValueError("region map must assign exactly 48 states and leave AK, HI unassigned")


def default_region_map() -> RegionMap:
    return RegionMap(dict(geography.CLIMATE_REGIONS))


# ---------------------------------------------------------------------------
# helpers


def parse_month(text: str) -> np.datetime64:
    """Parse ``YYYY-MM`` or an ISO date (``YYYY-MM-DD[...]``) to a month."""
    return np.datetime64(parse_date(text), "M")


def parse_date(text: str) -> dt.date:
    s = text.strip()
    try:
        if len(s) == 7:
            year, month = s.split("-")
            return dt.date(int(year), int(month), 1)
        return dt.date.fromisoformat(s[:10])
    except ValueError as exc:
        raise MalformedDate(f"cannot parse date {text!r}") from exc


def _read_rows(path: str | Path, delimiter: str) -> tuple[list[str], list[tuple[int, dict[str, str]]]]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        lines = (ln for ln in fh if not ln.startswith("#"))
        reader = csv.reader(lines, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyFile(f"{path} is empty") from None
        rows = []
        for k, raw in enumerate(reader, start=2):
            if not raw or all(not c.strip() for c in raw):
                continue
            rows.append((k, dict(zip(header, (c.strip() for c in raw)))))
    if not header or header == [""]:
        raise EmptyFile(f"{path} has no header")
    return header, rows


def _require(header: Sequence[str], columns: Iterable[str], path) -> None:
    missing = [c for c in columns if c not in header]
    if missing:
        raise MissingColumn(f"{path}: missing column(s) {missing}")


def classify_incident(label: str, taxonomy: Mapping[str, str]) -> str:
    key = label.strip().casefold()
    lowered = {k.casefold(): v for k, v in taxonomy.items()}
    group = lowered.get(key)
    if group is None:
        warnings.warn(f"unmapped incident type {label!r}; treated as {NON_WEATHER}", stacklevel=3)
        return NON_WEATHER
    if group not in EVENT_GROUPS and group != NON_WEATHER:
        raise ValueError(f"taxonomy maps {label!r} to unknown group {group!r}")
    return group


def _parse_counties(text: str) -> tuple[int, tuple[str, ...] | None]:
    s = text.strip()
    try:
        n = int(s)
    except ValueError:
        names = tuple(dict.fromkeys(x.strip() for x in s.split(";") if x.strip()))
        if not names:
            raise ValueError("empty county field") from None
        return len(names), names
    if n < 0:
        raise ValueError("negative county count")
    return n, None


# ---------------------------------------------------------------------------
# declarations


def parse_declarations(
    path: str | Path, config: IngestConfig | None = None, strict: bool = False
) -> DeclarationTable:
    """Read a declarations table.

    The ``counties`` column holds either a non-negative integer count or a
    ``;``-separated list of county names. With ``strict=True`` an unparseable
    date raises :class:`MalformedDate` instead of being rejected.
    """
    config = config or IngestConfig()
    cols = config.declaration_columns
    header, rows = _read_rows(path, config.delimiter)
    required = [cols[k] for k in ("id", "state", "incident_type", "begin_date", "counties")]
    _require(header, required, path)
    has_end = cols.get("end_date") in header
    universe = set(config.states)

    records: list[DeclarationRecord] = []
    rejects: list[Reject] = []
    for line, row in rows:
        state = row.get(cols["state"], "").upper()
        if state not in universe:
            rejects.append(Reject(line, f"unknown state {state!r}", row))
            continue
        try:
            begin = parse_date(row.get(cols["begin_date"], ""))
            end_text = row.get(cols["end_date"], "") if has_end else ""
            end = parse_date(end_text) if end_text else None
        except MalformedDate as exc:
            if strict:
                raise MalformedDate(f"line {line}: {exc}") from exc
            rejects.append(Reject(line, str(exc), row))
            continue
        if end is not None and end < begin:
            rejects.append(Reject(line, "end_date before begin_date", row))
            continue
        try:
            n_hit, names = _parse_counties(row.get(cols["counties"], ""))
        except ValueError as exc:
            rejects.append(Reject(line, str(exc), row))
            continue
        label = row.get(cols["incident_type"], "")
        records.append(
            DeclarationRecord(
                declaration_id=row.get(cols["id"], ""),
                state=state,
                incident_type=label,
                group=classify_incident(label, config.taxonomy),
                begin_date=begin,
                end_date=end,
                counties_hit=n_hit,
                counties=names,
            )
        )
    if rejects:
        logger.warning("%s: %d row(s) rejected", path, len(rejects))
    return DeclarationTable(tuple(records), tuple(rejects), len(rows))


def write_declarations(
    records: Iterable[DeclarationRecord], path: str | Path, config: IngestConfig | None = None
) -> None:
    config = config or IngestConfig()
    cols = config.declaration_columns
    keys = ("id", "state", "incident_type", "begin_date", "end_date", "counties")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=config.delimiter, lineterminator="\n")
        w.writerow([cols[k] for k in keys])
        for r in records:
            county_field = ";".join(r.counties) if r.counties is not None else str(r.counties_hit)
            w.writerow(
                [
                    r.declaration_id,
                    r.state,
                    r.incident_type,
                    r.begin_date.isoformat(),
                    r.end_date.isoformat() if r.end_date else "",
                    county_field,
                ]
            )


# ---------------------------------------------------------------------------
# trade flows


def parse_trade_flows(path: str | Path, config: IngestConfig | None = None) -> TradeFlowTable:
    """Read bilateral flows; duplicate pairs are summed, self-flows flagged."""
    config = config or IngestConfig()
    cols = config.trade_columns
    header, rows = _read_rows(path, config.delimiter)
    _require(header, [cols["origin"], cols["destination"], cols["value"]], path)
    universe = set(config.states)

    totals: dict[tuple[str, str], float] = {}
    rejects: list[Reject] = []
    for line, row in rows:
        o = row.get(cols["origin"], "").upper()
        d = row.get(cols["destination"], "").upper()
        if o not in universe or d not in universe:
            rejects.append(Reject(line, f"unknown state in pair ({o!r}, {d!r})", row))
            continue
        try:
            v = float(row.get(cols["value"], ""))
        except ValueError:
            rejects.append(Reject(line, "non-numeric value", row))
            continue
        if not np.isfinite(v):
            rejects.append(Reject(line, "non-finite value", row))
            continue
        if v < 0:
            raise NegativeValue(f"{path} line {line}: negative flow {o}->{d} = {v}")
        totals[(o, d)] = totals.get((o, d), 0.0) + v
    entries = tuple(TradeFlow(o, d, v, o == d) for (o, d), v in totals.items())
    return TradeFlowTable(entries, tuple(rejects), len(rows))


def write_trade_flows(table: TradeFlowTable, path: str | Path, config: IngestConfig | None = None) -> None:
    config = config or IngestConfig()
    cols = config.trade_columns
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=config.delimiter, lineterminator="\n")
        w.writerow([cols["origin"], cols["destination"], cols["value"]])
        for e in table.entries:
            w.writerow([e.origin, e.destination, repr(float(e.value))])


# ---------------------------------------------------------------------------
# activity panel


def parse_activity_panel(path: str | Path, config: IngestConfig | None = None) -> ActivityPanel:
    """Read the state activity panel (wide or long layout) within the window.

    Months where some state is missing at the very start or end of the
    windowed sample are trimmed with a warning; anything missing strictly
    inside raises :class:`InteriorGap`.
    """
    config = config or IngestConfig()
    header, rows = _read_rows(path, config.delimiter)
    cols = config.activity_columns
    universe = tuple(sorted(config.states))
    index = {s: k for k, s in enumerate(universe)}
    cells: dict[np.datetime64, np.ndarray] = {}

    def slot(month):
        if month not in cells:
            cells[month] = np.full(len(universe), np.nan)
        return cells[month]

    if config.activity_layout == "wide":
        _require(header, [cols["date"]], path)
        state_cols = [h for h in header if h != cols["date"]]
        unknown = [h for h in state_cols if h.upper() not in index]
        if unknown:
            raise UnknownState(f"{path}: unknown state column(s) {unknown}")
        missing = [s for s in universe if s not in {h.upper() for h in state_cols}]
        if missing:
            raise MissingColumn(f"{path}: no column for state(s) {missing}")
        for line, row in rows:
            month = parse_month(row[cols["date"]])
            if month in cells:
                raise DuplicateEntry(f"{path} line {line}: duplicate month {month}")
            vec = slot(month)
            for h in state_cols:
                text = row.get(h, "")
                vec[index[h.upper()]] = float(text) if text not in ("", "NA", "nan", "NaN") else np.nan
    elif config.activity_layout == "long":
        _require(header, [cols["date"], cols["state"], cols["value"]], path)
        seen = set()
        for line, row in rows:
            state = row[cols["state"]].upper()
            if state not in index:
                raise UnknownState(f"{path} line {line}: unknown state {state!r}")
            month = parse_month(row[cols["date"]])
            if (month, state) in seen:
                raise DuplicateEntry(f"{path} line {line}: duplicate ({month}, {state})")
            seen.add((month, state))
            text = row[cols["value"]]
            slot(month)[index[state]] = float(text) if text not in ("", "NA", "nan", "NaN") else np.nan
    else:
        raise ValueError(f"unknown activity layout {config.activity_layout!r}")

    lo, hi = config.window
    months = sorted(m for m in cells if lo <= m <= hi)
    if not months:
        raise WindowEmpty(f"{path}: no observations between {lo} and {hi}")
    values = np.vstack([cells[m] for m in months])
    dates = np.array(months, dtype="datetime64[M]")

    complete = ~np.isnan(values).any(axis=1)
    if not complete.any():
        raise InteriorGap(f"{path}: no month with complete data inside the window")
    first, last = np.argmax(complete), len(complete) - 1 - np.argmax(complete[::-1])
    if first > 0 or last < len(complete) - 1:
        warnings.warn(f"trimming incomplete edge months: {dates[0]}..{dates[first]} / {dates[last]}..{dates[-1]}")
    dates, values = dates[first : last + 1], values[first : last + 1]

    steps = np.diff(dates).astype(int)
    if np.any(steps != 1):
        gap = dates[:-1][steps != 1][0]
        raise InteriorGap(f"{path}: missing month(s) after {gap}")
    if np.isnan(values).any():
        t, i = np.argwhere(np.isnan(values))[0]
        raise InteriorGap(f"{path}: missing value for {universe[i]} in {dates[t]}")
    return ActivityPanel(dates, universe, values)


def write_activity_panel(
    panel: ActivityPanel, path: str | Path, config: IngestConfig | None = None, layout: str | None = None
) -> None:
    config = config or IngestConfig()
    layout = layout or config.activity_layout
    cols = config.activity_columns
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=config.delimiter, lineterminator="\n")
        if layout == "wide":
            w.writerow([cols["date"], *panel.states])
            for m, row in zip(panel.dates, panel.values):
                w.writerow([str(m), *(repr(float(v)) for v in row)])
        else:
            w.writerow([cols["date"], cols["state"], cols["value"]])
            for m, row in zip(panel.dates, panel.values):
                for s, v in zip(panel.states, row):
                    w.writerow([str(m), s, repr(float(v))])


# ---------------------------------------------------------------------------
# small static tables


def parse_region_map(path: str | Path, config: IngestConfig | None = None) -> RegionMap:
    """Read a ``state,region`` table; blank or ``unassigned`` means no region."""
    config = config or IngestConfig()
    header, rows = _read_rows(path, config.delimiter)
    _require(header, ["state", "region"], path)
    regions: dict[str, str | None] = {s: None for s in config.states}
    for line, row in rows:
        s = row["state"].upper()
        if s not in regions:
            raise UnknownState(f"{path} line {line}: {s!r}")
        r = row["region"].strip()
        if r and r.lower() != "unassigned":
            if r not in geography.REGION_ORDER:
                raise UnknownRegion(f"{path} line {line}: {r!r}")
            regions[s] = r
        else:
            regions[s] = None
    return RegionMap(regions)


def parse_borders(path: str | Path, config: IngestConfig | None = None) -> frozenset[frozenset[str]]:
    """Read an unordered border list with columns ``a,b``."""
    config = config or IngestConfig()
    header, rows = _read_rows(path, config.delimiter)
    _require(header, ["a", "b"], path)
    universe = set(config.states)
    pairs = set()
    for line, row in rows:
        a, b = row["a"].upper(), row["b"].upper()
        if a not in universe or b not in universe:
            raise UnknownState(f"{path} line {line}: ({a}, {b})")
        if a != b:
            pairs.add(frozenset((a, b)))
    return frozenset(pairs)


def parse_county_counts(path: str | Path, config: IngestConfig | None = None) -> dict[str, int]:
    """Read ``state,counties`` (number of counties or county equivalents)."""
    config = config or IngestConfig()
    header, rows = _read_rows(path, config.delimiter)
    _require(header, ["state", "counties"], path)
    out = {}
    for line, row in rows:
        s = row["state"].upper()
        if s not in config.states:
            raise UnknownState(f"{path} line {line}: {s!r}")
        out[s] = int(row["counties"])
    return out
