import numpy as np
import pytest
from hypothesis import given, strategies as st

from _support import make_estimate, random_stable_system
from gvarspill.errors import EmptyRegion, MultiStateScenario, UnknownRegion, WeightMismatch
from gvarspill.gvar import StackedSystem, assemble, solve_reduced_form
from gvarspill.ingest import RegionMap, default_region_map
from gvarspill import geography
from gvarspill.irf import (
    IrfResult,
    ShockScenario,
    aggregate_to_regions,
    compute_irf,
    make_region_scenario,
    make_state_scenario,
    muted_response,
    second_round,
    write_long,
)
from gvarspill.weights import WeightScheme


def one_unit_system(beta, theta):
    est = make_estimate(0.0, beta, 0.0, 0.0, theta)
    scheme = WeightScheme(np.zeros((1, 1)), ("A",))
    return solve_reduced_form(assemble([est], scheme)), est


def simulate_path(system, X0, shock_row, H, shift=None):
    """Reduced-form VAR written as a plain loop; ``shift`` is added at row ``shock_row``."""
    T, N = X0.shape
    y = np.zeros((T, N))
    for t in range(T):
        y[t] = X0[t]
        if shift is not None and t == shock_row:
            y[t] = y[t] + shift
        for l in range(system.p):
            if t - l - 1 >= 0:
                y[t] = y[t] + system.F[l] @ y[t - l - 1]
    return y


def test_closed_form_one_unit():
    beta, theta = 0.6, -0.8
    system, _ = one_unit_system(beta, theta)
    res = compute_irf(system, np.array([1.0]), 40)
    h = np.arange(41)
    np.testing.assert_allclose(res.responses[:, 0], theta * beta**h, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(res.cumulated[:, 0], theta * (1 - beta ** (h + 1)) / (1 - beta), rtol=1e-12)


def test_zero_scenario():
    rng = np.random.default_rng(0)
    _, _, system = random_stable_system(rng, 5, 2)
    res = compute_irf(system, np.zeros(5), 24)
    assert not res.responses.any() and not res.cumulated.any()
    assert res.horizon == 24


def test_simulation_difference_oracle():
    rng = np.random.default_rng(42)
    for _ in range(20):
        n, p = int(rng.integers(2, 7)), int(rng.integers(1, 4))
        _, _, system = random_stable_system(rng, n, p)
        s = rng.random(n)
        T, t0, H = 120, 30, 48
        X0 = system.c + rng.normal(size=(T, n)) @ np.linalg.cholesky(system.Sigma_eps).T
        base = simulate_path(system, X0, t0, H)
        hit = simulate_path(system, X0, t0, H, shift=system.Lambda @ s)
        diff = (hit - base)[t0 : t0 + H + 1]
        res = compute_irf(system, s, H)
        np.testing.assert_allclose(res.responses, diff, rtol=0, atol=1e-10)


@given(st.integers(0, 2**32 - 1), st.floats(0, 1), st.floats(0, 1))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    _, _, system = random_stable_system(rng, 4, 2)
    s1, s2 = rng.random(4) * 0.5, rng.random(4) * 0.5
    r1 = compute_irf(system, s1, 12).responses
    r2 = compute_irf(system, s2, 12).responses
    r12 = compute_irf(system, s1 + s2, 12).responses
    np.testing.assert_allclose(r12, r1 + r2, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(compute_irf(system, a * s1, 12).responses, a * r1, rtol=1e-10, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_impact_and_cumulation(seed):
    rng = np.random.default_rng(seed)
    _, _, system = random_stable_system(rng, 5, 2)
    s = rng.random(5)
    res = compute_irf(system, s, 30)
    np.testing.assert_array_equal(res.responses[0], system.Lambda @ s)
    np.testing.assert_allclose(res.cumulated, np.cumsum(res.responses, axis=0), rtol=1e-14, atol=1e-15)


def test_decay_on_stable_systems():
    rng = np.random.default_rng(3)
    for _ in range(10):
        _, _, system = random_stable_system(rng, 5, 2, max_radius=0.95)
        res = compute_irf(system, np.ones(5), 600)
        assert np.linalg.norm(res.responses[-1]) < 1e-6
        assert np.linalg.norm(res.cumulated[-1] - res.cumulated[-50]) < 1e-6


def test_negative_horizon():
    system, _ = one_unit_system(0.5, -1.0)
    with pytest.raises(ValueError):
        compute_irf(system, np.array([1.0]), -1)


# ---------------------------------------------------------------------------
# scenarios and aggregation


def test_region_scenarios():
    rm = default_region_map()
    states = geography.STATES
    ne = make_region_scenario("NE", rm, states)
    members = set(rm.members("NE"))
    assert all((v == 1.0) == (s in members) for s, v in zip(states, ne.intensity))
    assert not make_region_scenario("NE", rm, states, 0.0).intensity.any()
    total = sum(make_region_scenario(r, rm, states).intensity for r in rm.order)
    assert total.sum() == 48
    assert total[states.index("AK")] == 0 and total[states.index("HI")] == 0
    assert set(total) == {0.0, 1.0}
    with pytest.raises(UnknownRegion):
        make_region_scenario("XX", rm, states)
    with pytest.raises(EmptyRegion):
        make_region_scenario("NE", rm, ("CA", "TX"))


def test_scenario_validation():
    with pytest.raises(ValueError):
        ShockScenario(np.array([1.5]), ("A",))
    with pytest.raises(ValueError):
        ShockScenario(np.array([0.5, 0.5]), ("A",))
    assert make_state_scenario("B", ("A", "B"), 0.3).intensity.tolist() == [0.0, 0.3]


def small_map():
    return RegionMap({"A": "NE", "B": "NE", "C": "SE", "D": None})


def test_aggregate_examples():
    rm = small_map()
    arr = np.array([[-1.0, -3.0, 5.0, 9.0]])
    out = aggregate_to_regions(arr, rm, ["A", "B", "C", "D"], regions=["NE", "SE"])
    assert out.tolist() == [[-2.0, 5.0]]
    wtd = aggregate_to_regions(arr, rm, ["A", "B", "C", "D"], weights=np.array([3.0, 1.0, 1.0, 1.0]),
                               regions=["NE", "SE"])
    assert wtd.tolist() == [[-1.5, 5.0]]
    with pytest.raises(EmptyRegion):
        aggregate_to_regions(arr, rm, ["A", "B", "C", "D"], regions=["NE", "W"])
    with pytest.raises(WeightMismatch):
        aggregate_to_regions(arr, rm, ["A", "B", "C", "D"], weights=np.ones(3), regions=["NE"])
    with pytest.raises(WeightMismatch):
        aggregate_to_regions(arr, rm, ["A", "B", "C", "D"], weights=np.array([0.0, 0.0, 1.0, 1.0]), regions=["NE"])


@given(st.floats(-10, 10), st.lists(st.floats(0.01, 5), min_size=4, max_size=4))
def test_aggregate_convexity(c, wts):
    arr = np.full((3, 4), c)
    out = aggregate_to_regions(arr, small_map(), ["A", "B", "C", "D"], weights=np.array(wts), regions=["NE", "SE"])
    np.testing.assert_allclose(out, c, rtol=1e-12, atol=1e-12)


def test_aggregate_irf_result_uses_cumulated():
    res = IrfResult(np.ones((3, 4)), np.cumsum(np.ones((3, 4)), axis=0), ("A", "B", "C", "D"))
    out = aggregate_to_regions(res, small_map(), regions=["SE"])
    assert out[:, 0].tolist() == [1.0, 2.0, 3.0]
    assert aggregate_to_regions(res, small_map(), regions=["SE"], cumulated=False)[:, 0].tolist() == [1.0] * 3


# ---------------------------------------------------------------------------
# second round


def test_second_round_nullity():
    rng = np.random.default_rng(5)
    n = 5
    m = rng.random((n, n))
    np.fill_diagonal(m, 0.0)
    m[:, 0] = 0.0  # nobody weights unit 0
    w = WeightScheme(m / m.sum(axis=1, keepdims=True), tuple("ABCDE"))
    ests = [make_estimate(0.0, [0.5, 0.1], 0.0, [0.0, 0.0], -0.7)]
    ests += [make_estimate(0.0, [0.3, 0.1], 0.4, [0.1, 0.05], -0.5) for _ in range(n - 1)]
    system = solve_reduced_form(assemble(ests, w))
    sr = second_round(system, ests, make_state_scenario("A", w.labels), 48)
    assert np.max(np.abs(sr.effect)) <= 1e-12


def test_second_round_single_unit():
    system, est = one_unit_system(0.7, -0.3)
    sr = second_round(system, [est], make_state_scenario("A", ("A",)), 24)
    np.testing.assert_allclose(sr.gvar, sr.muted, rtol=1e-14)
    assert sr.headline == pytest.approx(0.0, abs=1e-15)


def test_second_round_rejects_multi_state():
    system, est = one_unit_system(0.7, -0.3)
    with pytest.raises(MultiStateScenario):
        second_round(system, [est], ShockScenario(np.zeros(1), ("A",)), 24)


def test_second_round_surgery_oracle():
    rng = np.random.default_rng(17)
    for _ in range(10):
        n, p = 5, 2
        scheme, coefs, system = random_stable_system(rng, n, p)
        ests = [make_estimate(coefs["alpha"][i], coefs["beta"][i], coefs["gamma0"][i], coefs["gamma"][i],
                              coefs["theta"][i], coefs["sigma2"][i]) for i in range(n)]
        i = int(rng.integers(n))
        st_ = system.stacked
        G, H = st_.G.copy(), st_.H.copy()
        G[i] = np.eye(n)[i]
        G[np.arange(n) != i, i] = 0.0
        for l in range(p):
            H[l, i] = coefs["beta"][i, l] * np.eye(n)[i]
            H[l, np.arange(n) != i, i] = 0.0
        cut = solve_reduced_form(StackedSystem(G, H, st_.Theta, st_.alpha, st_.sigma2, st_.labels))
        scen = make_state_scenario(scheme.labels[i], scheme.labels, 0.8)
        oracle = compute_irf(cut, scen, 36).responses[:, i]
        sr = second_round(system, ests, scen, 36)
        np.testing.assert_allclose(sr.muted, oracle, rtol=0, atol=1e-10)
        np.testing.assert_allclose(muted_response(ests[i], 0.8, 36), oracle, rtol=0, atol=1e-10)
        assert sr.headline == pytest.approx(sr.gvar_cumulated[12] - sr.muted_cumulated[12])


def test_write_long(tmp_path):
    cols = {"mean": np.arange(6.0).reshape(3, 2), "p10": np.zeros((3, 2))}
    write_long(tmp_path / "x.csv", ["A", "B"], cols, "region")
    lines = (tmp_path / "x.csv").read_text().splitlines()
    assert lines[0] == "horizon,region,mean,p10"
    assert lines[1:3] == ["0,A,0.0,0.0", "0,B,1.0,0.0"] and len(lines) == 7
