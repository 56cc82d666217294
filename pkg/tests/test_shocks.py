import datetime as dt

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gvarspill import geography
from gvarspill.errors import EmptyFilter, InconsistentMeta, UnknownState
from gvarspill.ingest import DeclarationRecord
from gvarspill.shocks import (
    StateMeta,
    build_national_shock,
    build_state_shocks,
    read_shock_panel,
    season_of,
    summarize_declarations,
    write_national_shock,
    write_shock_panel,
)

WINDOW = (np.datetime64("2005-01", "M"), np.datetime64("2005-12", "M"))
META = [StateMeta("AA", 10), StateMeta("BB", 20), StateMeta("CC", 5)]


def rec(state, day, n=None, names=None, group="flood", rid="x"):
    return DeclarationRecord(rid, state, group, group, day, None,
                             len(names) if names else n, tuple(names) if names else None)


def test_single_declaration_share():
    panel = build_state_shocks([rec("AA", dt.date(2005, 3, 4), 4)], META, window=WINDOW)
    assert panel.s[2, 0] == 0.4
    assert panel.s.sum() == 0.4 and panel.emergency.sum() == 1
    assert panel.s[0].tolist() == [0.0, 0.0, 0.0]


def test_dedup_named_vs_counted():
    named = [rec("AA", dt.date(2005, 5, 1), names=["A", "B"]), rec("AA", dt.date(2005, 5, 20), names=["B", "C"])]
    p = build_state_shocks(named, META, window=WINDOW)
    assert p.hit[4, 0] == 3 and p.s[4, 0] == 0.3
    counted = [rec("AA", dt.date(2005, 5, 1), 2), rec("AA", dt.date(2005, 5, 20), 2)]
    p = build_state_shocks(counted, META, window=WINDOW)
    assert p.hit[4, 0] == 4 and p.s[4, 0] == 0.4


def test_cap_and_statewide():
    p = build_state_shocks([rec("CC", dt.date(2005, 1, 1), 4), rec("CC", dt.date(2005, 1, 9), 4),
                            rec("BB", dt.date(2005, 2, 1), names=["Statewide"])], META, window=WINDOW)
    assert p.s[0, 2] == 1.0 and p.hit[0, 2] == 5
    assert p.s[1, 1] == 1.0


def test_begin_month_assignment_and_window():
    p = build_state_shocks([rec("AA", dt.date(2004, 12, 30), 5), rec("AA", dt.date(2005, 12, 31), 5)],
                           META, window=WINDOW)
    assert p.s[:, 0].tolist() == [0.0] * 11 + [0.5]


def test_group_filter():
    recs = [rec("AA", dt.date(2005, 3, 1), 4, group="fire"), rec("AA", dt.date(2005, 3, 1), 3, group="winter"),
            rec("AA", dt.date(2005, 3, 1), 9, group="non_weather")]
    assert build_state_shocks(recs, META, window=WINDOW).hit[2, 0] == 7
    assert build_state_shocks(recs, META, ["fire"], window=WINDOW).hit[2, 0] == 4
    with pytest.raises(EmptyFilter):
        build_state_shocks(recs, META, [], window=WINDOW)


def test_unknown_state():
    with pytest.raises(UnknownState):
        build_state_shocks([rec("ZZ", dt.date(2005, 3, 1), 1)], META, window=WINDOW)


def test_national_shock_arithmetic():
    meta = [StateMeta(s, geography.COUNTIES[s]) for s in geography.STATES]
    recs = [rec("IA", dt.date(2005, 6, 2), 4), rec("TX", dt.date(2005, 6, 9), 6)]
    p = build_state_shocks(recs, meta, window=WINDOW, n_counties=3142)
    assert p.national[5] == 10 / 3142
    assert abs(p.national[5] - 0.003183) < 5e-7
    assert np.all(np.delete(p.national, 5) == 0)


def test_national_meta_checks():
    panel = build_state_shocks([], META, window=WINDOW)
    assert np.all(panel.national == 0)
    with pytest.raises(InconsistentMeta):
        build_national_shock(panel, META, n_counties=3142)
    with pytest.raises(InconsistentMeta):
        build_national_shock(panel, META[::-1])


def test_all_hit_national_is_one():
    recs = [rec(m.state, dt.date(2005, 4, 1), m.counties) for m in META]
    p = build_state_shocks(recs, META, window=WINDOW)
    assert p.national[3] == 1.0 and np.all(p.s[3] == 1.0)


def test_summary_tables():
    recs = [rec("AA", dt.date(2005, 8, 1), 1, group="fire")] * 3 + [rec("BB", dt.date(2005, 1, 1), 1)] * 2
    summ = summarize_declarations(recs)
    assert summ.by_group == {"fire": 3, "flood": 2}
    assert summ.by_season == {"JJA": 3, "DJF": 2}
    assert summ.by_state_group[("AA", "fire")] == 3 and summ.total == 5
    assert summarize_declarations([]).total == 0
    assert season_of(8) == "JJA" and season_of(12) == "DJF" and season_of(3) == "MAM" and season_of(11) == "SON"


def test_export_round_trip(tmp_path):
    p = build_state_shocks([rec("AA", dt.date(2005, 3, 4), 4), rec("BB", dt.date(2005, 7, 4), 3)], META,
                           window=WINDOW)
    write_shock_panel(p, tmp_path / "s.csv")
    write_national_shock(p, tmp_path / "n.csv")
    dates, states, s = read_shock_panel(tmp_path / "s.csv")
    assert np.array_equal(dates, p.dates) and states == p.states and np.array_equal(s, p.s)
    assert (tmp_path / "n.csv").read_text().splitlines()[0] == "date,s"


# ---------------------------------------------------------------------------
# properties

GROUPS = ["winter", "tropical_storm", "storm", "fire", "flood", "drought"]


@st.composite
def records(draw, max_size=25):
    out = []
    for k in range(draw(st.integers(0, max_size))):
        m = draw(st.sampled_from(META))
        day = dt.date(2005, draw(st.integers(1, 12)), draw(st.integers(1, 28)))
        g = draw(st.sampled_from(GROUPS))
        if draw(st.booleans()):
            names = draw(st.lists(st.integers(0, m.counties - 1).map(lambda c: f"c{c}"), min_size=1,
                                  max_size=m.counties, unique=True))
            out.append(rec(m.state, day, names=names, group=g, rid=str(k)))
        else:
            out.append(rec(m.state, day, draw(st.integers(0, 2 * m.counties)), group=g, rid=str(k)))
    return out


@given(records())
def test_bounds_and_emergency(recs):
    p = build_state_shocks(recs, META, window=WINDOW)
    assert np.all((p.s >= 0) & (p.s <= 1))
    assert np.all(p.s[p.emergency == 0] == 0)
    assert np.all((p.national >= 0) & (p.national <= 1))
    cap = np.array([m.counties for m in META])
    assert np.array_equal(p.s == 1, p.hit == cap)


@given(records(), records(max_size=3))
def test_monotone_in_declarations(base, extra):
    a = build_state_shocks(base, META, window=WINDOW)
    b = build_state_shocks(base + extra, META, window=WINDOW)
    assert np.all(b.s >= a.s) and np.all(b.national >= a.national)


@given(records(), st.sets(st.sampled_from(GROUPS), min_size=1), st.sets(st.sampled_from(GROUPS), min_size=1))
def test_filter_subadditive(recs, ga, gb):
    ga, gb = ga, gb - ga
    if not gb:
        return
    both = build_state_shocks(recs, META, ga | gb, window=WINDOW).hit
    a = build_state_shocks(recs, META, ga, window=WINDOW).hit
    b = build_state_shocks(recs, META, gb, window=WINDOW).hit
    assert np.all(both <= a + b)


def test_filter_additive_when_disjoint():
    recs = [rec("BB", dt.date(2005, 2, 1), names=["a", "b"], group="fire"),
            rec("BB", dt.date(2005, 2, 3), names=["c"], group="flood")]
    both = build_state_shocks(recs, META, ["fire", "flood"], window=WINDOW).hit
    a = build_state_shocks(recs, META, ["fire"], window=WINDOW).hit
    b = build_state_shocks(recs, META, ["flood"], window=WINDOW).hit
    assert np.array_equal(both, a + b) and both[1, 1] == 3
