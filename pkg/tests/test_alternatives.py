import numpy as np
import pytest
from hypothesis import given, strategies as st

from gvarspill.alternatives import (
    bias_correct,
    estimate_ardl_us,
    estimate_sdpm,
    render_table,
    sdpm_loglik,
    simulate_sdpm,
    stable_interval,
    theta_summary,
    within,
)
from gvarspill.errors import NonConcaveLikelihood, SingularDesign, TooFewStates
from gvarspill.estimation import ArxSpec, estimate_arx

from _support import random_scheme

TRUE = np.array([0.3, 0.4, 0.1, -0.5])


def sdpm_panel(seed, N=10, T=200, params=TRUE, sigma2=0.5):
    rng = np.random.default_rng(seed)
    w = random_scheme(rng, N).w
    s = (rng.random((T, N)) < 0.3) * rng.beta(2, 2, (T, N))
    fe = rng.normal(scale=0.5, size=N)
    y = simulate_sdpm(params, fe, sigma2, w, s, np.zeros(N), rng.standard_normal((T, N)))
    return y, w, s


@given(st.integers(0, 2**32 - 1), st.integers(1, 30), st.integers(1, 6))
def test_within_is_idempotent_and_mean_free(seed, T, N):
    x = np.random.default_rng(seed).normal(size=(T, N)) * 10
    once = within(x)
    np.testing.assert_allclose(within(once), once, atol=1e-12)
    np.testing.assert_allclose(once.mean(axis=0), 0.0, atol=1e-12)


def test_stable_interval_row_normalized():
    w = random_scheme(np.random.default_rng(0), 6).w
    lo, hi = stable_interval(w)
    assert hi == pytest.approx(1.0, abs=1e-5)
    assert lo <= -1.0 + 1e-5 or np.linalg.eigvals(w).real.min() > -1


def test_estimate_dominates_grid():
    y, w, s = sdpm_panel(1)
    est = estimate_sdpm(y, w, s)
    lo, hi = est.interval
    for p in np.linspace(lo, hi, 21)[1:-1]:
        assert estimate_sdpm(y, w, s, fixed_p=p).loglik <= est.loglik + 1e-9


def test_reported_loglik_matches_full_likelihood():
    y, w, s = sdpm_panel(2)
    est = estimate_sdpm(y, w, s)
    full = sdpm_loglik(est.p, est.gamma, est.rho, est.beta, est.sigma2, y, w, s)
    assert full == pytest.approx(est.loglik, rel=1e-10)


def test_zero_spatial_lag_matches_dummy_variable_regression():
    y, w, s = sdpm_panel(3, N=6, T=80)
    est = estimate_sdpm(y, w, s, fixed_p=0.0)
    T, N = y.shape
    wy = y @ w.T
    X = np.column_stack([y[:-1].ravel(), wy[:-1].ravel(), s[1:].ravel(), np.tile(np.eye(N), (T - 1, 1))])
    b, *_ = np.linalg.lstsq(X, y[1:].ravel(), rcond=None)
    np.testing.assert_allclose([est.gamma, est.rho, est.beta], b[:3], rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(est.fixed_effects, b[3:], rtol=1e-6, atol=1e-9)
    assert est.p == 0.0 and est.se["p"] == 0.0


def test_standard_errors_match_numerical_hessian():
    y, w, s = sdpm_panel(4, N=8, T=150)
    est = estimate_sdpm(y, w, s)
    x0 = np.array([*est.params, est.sigma2])

    def f(x):
        return sdpm_loglik(*x, y, w, s)

    h = 1e-4 * np.maximum(np.abs(x0), 0.1)
    H = np.zeros((5, 5))
    for i in range(5):
        for j in range(5):
            ei, ej = np.eye(5)[i] * h[i], np.eye(5)[j] * h[j]
            H[i, j] = (f(x0 + ei + ej) - f(x0 + ei - ej) - f(x0 - ei + ej) + f(x0 - ei - ej)) / (4 * h[i] * h[j])
    se = np.sqrt(np.diag(np.linalg.inv(-H)))
    analytic = [est.se[k] for k in ("p", "gamma", "rho", "beta", "sigma2")]
    np.testing.assert_allclose(analytic, se, rtol=1e-3)


def test_recovery_in_moderate_panel():
    est = np.array([estimate_sdpm(*sdpm_panel(seed, N=20, T=300)).params for seed in range(10)])
    np.testing.assert_allclose(est.mean(axis=0), TRUE, atol=0.03)


def test_boundary_maximum_raises():
    rng = np.random.default_rng(5)
    w = random_scheme(rng, 5).w
    # every state moves with one common series, so W y reproduces y and p runs to 1
    y = rng.normal(size=(60, 1)) + 1e-6 * rng.normal(size=(60, 5))
    with pytest.raises(NonConcaveLikelihood):
        estimate_sdpm(y, w, rng.random((60, 5)))


def test_bias_correction_zero_iterations_returns_input():
    y, w, s = sdpm_panel(6, N=6, T=40)
    est = estimate_sdpm(y, w, s)
    assert bias_correct(est, y, w, s, iterations=0) is est


def test_bias_correction_noise_free_panel_is_fixed_point():
    rng = np.random.default_rng(7)
    N, T = 5, 30
    w = random_scheme(rng, N).w
    s = rng.random((T, N))
    y = simulate_sdpm(TRUE, rng.normal(size=N), 0.0, w, s, rng.normal(size=N), np.zeros((T, N)))
    est = estimate_sdpm(y, w, s)
    np.testing.assert_allclose(est.params, TRUE, atol=1e-8)
    out = bias_correct(est, y, w, s, n_sim=3)
    assert out.bias_corrected
    np.testing.assert_allclose(out.bias, 0.0, atol=1e-8)


def test_bias_correction_reduces_short_panel_bias():
    raw, fixed = [], []
    for seed in range(20):
        y, w, s = sdpm_panel(100 + seed, N=10, T=30)
        est = estimate_sdpm(y, w, s)
        raw.append(est.gamma)
        fixed.append(bias_correct(est, y, w, s, n_sim=20, seed=seed).gamma)
    assert abs(np.mean(fixed) - TRUE[1]) < abs(np.mean(raw) - TRUE[1])


def test_ardl_is_arx_without_foreign_block():
    rng = np.random.default_rng(8)
    levels = np.cumsum(rng.normal(size=120))
    shock = rng.random(120)
    est = estimate_ardl_us(levels, shock, lags=2)
    ref = estimate_arx(np.diff(levels), None, shock[1:], ArxSpec(2, 0, foreign=False))
    np.testing.assert_allclose(est.params, ref.params, rtol=1e-12)
    assert est.names == ("alpha", "beta_1", "beta_2", "theta")


def test_ardl_recovers_coefficients():
    rng = np.random.default_rng(9)
    T = 5000
    s = (rng.random(T) < 0.4) * rng.random(T)
    dy = np.zeros(T)
    for t in range(2, T):
        dy[t] = 0.1 + 0.4 * dy[t - 1] - 0.2 * dy[t - 2] - 0.7 * s[t] + rng.normal(scale=0.5)
    est = estimate_ardl_us(np.concatenate([[0.0], np.cumsum(dy)]), np.concatenate([[0.0], s]))
    np.testing.assert_allclose(est.params, [0.1, 0.4, -0.2, -0.7], atol=4 * est.se.max())


def test_ardl_constant_shock_is_singular():
    levels = np.cumsum(np.random.default_rng(10).normal(size=50))
    with pytest.raises(SingularDesign):
        estimate_ardl_us(levels, np.zeros(50))


def test_theta_summary():
    out = theta_summary([-1.0, 1.0], labels=["AA", "BB"], ddof=0)
    assert (out.mean, out.sd, out.min, out.max, out.argmin, out.argmax) == (0.0, 1.0, -1.0, 1.0, "AA", "BB")
    assert theta_summary([-1.0, 1.0]).sd == pytest.approx(np.sqrt(2.0))
    assert theta_summary([0.3] * 4).sd == 0.0
    with pytest.raises(TooFewStates):
        theta_summary([0.5])


def test_render_table_panels():
    y, w, s = sdpm_panel(11, N=6, T=60)
    sdpm = estimate_sdpm(y, w, s)
    rng = np.random.default_rng(11)
    ardl = estimate_ardl_us(np.cumsum(rng.normal(size=80)), rng.random(80))
    text = render_table(sdpm, ardl, theta_summary([-0.2, -0.4, -0.9], labels=["AL", "FL", "TX"]))
    for needle in ("(a) Spatial dynamic panel", "(b) Aggregate ARDL", "(c) State shock", "W y_t-1", "TX"):
        assert needle in text
    assert f"{sdpm.beta:.4f}" in text


def test_bias_correction_settles_when_simulated_mean_jumps():
    # this short panel sends the undamped iteration into a two-cycle in rho
    rng = np.random.default_rng(10_047)
    N, T = 25, 80
    w = random_scheme(rng, N).w
    s = (rng.random((T, N)) < 0.3) * rng.beta(2, 2, (T, N))
    fe = rng.normal(scale=0.5, size=N)
    y = simulate_sdpm(TRUE, fe, 1.0, w, s, np.zeros(N), rng.standard_normal((T, N)))[50:]
    s = s[50:]
    est = estimate_sdpm(y, w, s)
    out = bias_correct(est, y, w, s, n_sim=20, seed=47)
    assert out.bias_corrected and np.all(np.isfinite(out.params))
