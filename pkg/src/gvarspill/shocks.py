"""Weather-shock proxies built from disaster declarations.

For state ``i`` and month ``t`` the shock is the share of the state's counties
under a weather-related declaration that began in that month::

    s_it = emergency_it * hit_it / counties_i
    s_t  = sum_i emergency_it * hit_it / N_c

County hits are de-duplicated within a state-month when declarations carry
county names; bare integer counts are summed. Either way the total is capped
at ``counties_i`` so that ``s_it <= 1``.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import geography
from .errors import EmptyFilter, InconsistentMeta, UnknownState
from .ingest import DEFAULT_WINDOW, EVENT_GROUPS, DeclarationRecord, classify_incident

SEASONS = ("DJF", "MAM", "JJA", "SON")


@dataclass(frozen=True)
class StateMeta:
    state: str
    counties: int

    def __post_init__(self):
        if self.counties < 1:
            raise ValueError(f"{self.state}: counties must be >= 1")


def default_meta(states: Sequence[str] = geography.STATES) -> list[StateMeta]:
    return [StateMeta(s, geography.COUNTIES[s]) for s in states]


@dataclass(frozen=True)
class ShockPanel:
    dates: np.ndarray  # datetime64[M]
    states: tuple[str, ...]
    s: np.ndarray  # T x N shares in [0, 1]
    emergency: np.ndarray  # T x N, 0/1
    hit: np.ndarray  # T x N county counts
    national: np.ndarray | None = None


def _month_grid(window) -> np.ndarray:
    lo, hi = (np.datetime64(w, "M") for w in window)
    return np.arange(lo, hi + 1, dtype="datetime64[M]")


def build_state_shocks(
    records: Iterable[DeclarationRecord],
    meta: Sequence[StateMeta] | None = None,
    groups: Iterable[str] | None = None,
    window=DEFAULT_WINDOW,
    n_counties: int | None = None,
) -> ShockPanel:
    """State-by-month shock panel from declaration records.

    Only declarations whose group is in ``groups`` (default: all six weather
    groups) count, and each one contributes to the month of its begin date.
    The national series is filled in with :func:`build_national_shock`.
    """
    meta = list(meta) if meta is not None else default_meta()
    groups = set(EVENT_GROUPS if groups is None else groups)
    if not groups:
        raise EmptyFilter("event-group filter is empty")
    bad = groups - set(EVENT_GROUPS)
    if bad:
        raise ValueError(f"unknown event group(s) {sorted(bad)}")

    dates = _month_grid(window)
    states = tuple(m.state for m in meta)
    col = {s: k for k, s in enumerate(states)}
    cap = np.array([m.counties for m in meta])
    row0 = dates[0]

    named: dict[tuple[int, int], set[str]] = {}
    counted: Counter = Counter()
    statewide: set[tuple[int, int]] = set()
    for r in records:
        if r.state not in col:
            raise UnknownState(f"declaration {r.declaration_id}: state {r.state!r} not in meta")
        if r.group not in groups:
            continue
        t = int((r.month - row0).astype(int))
        if t < 0 or t >= len(dates):
            continue
        key = (t, col[r.state])
        if r.counties is None:
            counted[key] += r.counties_hit
        elif any(c.casefold() == "statewide" for c in r.counties):
            statewide.add(key)
        else:
            named.setdefault(key, set()).update(r.counties)

    hit = np.zeros((len(dates), len(states)), dtype=np.int64)
    for key in set(named) | set(counted) | statewide:
        t, i = key
        if key in statewide:
            hit[t, i] = cap[i]
        else:
            hit[t, i] = min(len(named.get(key, ())) + counted[key], cap[i])
    emergency = (hit > 0).astype(np.int8)
    s = emergency * hit / cap
    panel = ShockPanel(dates, states, s, emergency, hit)
    return ShockPanel(dates, states, s, emergency, hit, build_national_shock(panel, meta, n_counties))


def build_national_shock(
    panel: ShockPanel, meta: Sequence[StateMeta] | None = None, n_counties: int | None = None
) -> np.ndarray:
    """Share of all counties hit in each month.

    ``n_counties`` defaults to the sum over ``meta``; passing a value that does
    not match that sum raises :class:`InconsistentMeta`.
    """
    meta = list(meta) if meta is not None else default_meta(panel.states)
    if tuple(m.state for m in meta) != tuple(panel.states):
        raise InconsistentMeta("meta state order differs from the shock panel")
    total = sum(m.counties for m in meta)
    if n_counties is not None and n_counties != total:
        raise InconsistentMeta(f"counties sum to {total}, expected N_c = {n_counties}")
    return (panel.emergency * panel.hit).sum(axis=1) / total


def season_of(month: int) -> str:
    return SEASONS[(month % 12) // 3]


@dataclass(frozen=True)
class DeclarationSummary:
    by_group: dict[str, int]
    by_season: dict[str, int]
    by_group_season: dict[tuple[str, str], int]
    by_state_group: dict[tuple[str, str], int]
    total: int


def summarize_declarations(
    records: Iterable[DeclarationRecord],
    taxonomy: Mapping[str, str] | None = None,
    groups: Iterable[str] = EVENT_GROUPS,
) -> DeclarationSummary:
    """Count declarations by event group, season (of the begin month) and state."""
    groups = set(groups)
    by_group: Counter = Counter()
    by_season: Counter = Counter()
    by_gs: Counter = Counter()
    by_sg: Counter = Counter()
    n = 0
    for r in records:
        g = classify_incident(r.incident_type, taxonomy) if taxonomy is not None else r.group
        if g not in groups:
            continue
        season = season_of(r.begin_date.month)
        by_group[g] += 1
        by_season[season] += 1
        by_gs[(g, season)] += 1
        by_sg[(r.state, g)] += 1
        n += 1
    return DeclarationSummary(dict(by_group), dict(by_season), dict(by_gs), dict(by_sg), n)


# ---------------------------------------------------------------------------
# export


def write_shock_panel(panel: ShockPanel, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "state", "s", "hit"])
        for t, m in enumerate(panel.dates):
            for i, st in enumerate(panel.states):
                w.writerow([str(m), st, repr(float(panel.s[t, i])), int(panel.hit[t, i])])


def write_national_shock(panel: ShockPanel, path: str | Path) -> None:
    if panel.national is None:
        raise ValueError("shock panel has no national series")
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "s"])
        for m, v in zip(panel.dates, panel.national):
            w.writerow([str(m), repr(float(v))])


def read_shock_panel(path: str | Path) -> tuple[np.ndarray, tuple[str, ...], np.ndarray]:
    """Read a long-format shock table back into (dates, states, T x N matrix)."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    dates = np.array(sorted({r["date"] for r in rows}), dtype="datetime64[M]")
    states = tuple(sorted({r["state"] for r in rows}))
    ti = {d: k for k, d in enumerate(dates)}
    si = {s: k for k, s in enumerate(states)}
    out = np.zeros((len(dates), len(states)))
    for r in rows:
        out[ti[np.datetime64(r["date"], "M")], si[r["state"]]] = float(r["s"])
    return dates, states, out


def write_summary(summary: DeclarationSummary, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    p = out_dir / "declarations_by_group.csv"
    with p.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "count"])
        for g in EVENT_GROUPS:
            w.writerow([g, summary.by_group.get(g, 0)])
    paths.append(p)
    p = out_dir / "declarations_by_season.csv"
    with p.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", *SEASONS])
        for g in EVENT_GROUPS:
            w.writerow([g, *(summary.by_group_season.get((g, s), 0) for s in SEASONS)])
    paths.append(p)
    p = out_dir / "declarations_by_state.csv"
    states = sorted({s for s, _ in summary.by_state_group})
    with p.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["state", *EVENT_GROUPS, "total"])
        for s in states:
            counts = [summary.by_state_group.get((s, g), 0) for g in EVENT_GROUPS]
            w.writerow([s, *counts, sum(counts)])
    paths.append(p)
    return paths
