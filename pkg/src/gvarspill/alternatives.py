"""Comparison estimators: spatial dynamic panel, aggregate ARDL, theta spread.

The spatial dynamic panel shares one set of parameters across states::

    y_it = p (W y_t)_i + gamma y_i,t-1 + rho (W y_{t-1})_i + beta s_it + c_i + e_it

Fixed effects are removed by demeaning each state's series over time. For a
given ``p`` the remaining coefficients are least squares, so the likelihood is
maximised over ``p`` alone, including the Jacobian term
``(T-1) log|I - p W|``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NonConcaveLikelihood, NonConvergence, SampleTooShort, SingularDesign, TooFewStates
from .estimation import ArxEstimate, ArxSpec, estimate_arx, ols
from .kernels import var_recursion_batch
from .weights import WeightScheme

SDPM_NAMES = ("p", "gamma", "rho", "beta")


def within(x: np.ndarray) -> np.ndarray:
    """Remove each column's time mean (rows are periods, columns units)."""
    return x - x.mean(axis=0, keepdims=True)


@dataclass(frozen=True)
class SdpmEstimate:
    p: float
    gamma: float
    rho: float
    beta: float
    sigma2: float
    fixed_effects: np.ndarray
    se: dict
    loglik: float
    interval: tuple[float, float]
    nobs: int
    bias_corrected: bool = False
    bias: np.ndarray | None = None

    @property
    def params(self) -> np.ndarray:
        return np.array([self.p, self.gamma, self.rho, self.beta])

    def with_params(self, params: Sequence[float], **kw) -> "SdpmEstimate":
        p, g, r, b = (float(v) for v in params)
        return replace(self, p=p, gamma=g, rho=r, beta=b, **kw)


@dataclass(frozen=True)
class _SdpmMoments:
    yd: np.ndarray  # stacked within-transformed y_t
    wyd: np.ndarray  # stacked within-transformed (W y)_t
    X: np.ndarray  # [y_{t-1}, (W y)_{t-1}, s_t], within-transformed
    eig: np.ndarray  # eigenvalues of W
    n_periods: int


def _moments(y: np.ndarray, w: np.ndarray, s: np.ndarray) -> _SdpmMoments:
    wy = y @ w.T
    cur = slice(1, None)
    lag = slice(None, -1)
    parts = [within(a) for a in (y[cur], wy[cur], y[lag], wy[lag], s[cur])]
    flat = [a.ravel() for a in parts]
    return _SdpmMoments(flat[0], flat[1], np.column_stack(flat[2:]), np.linalg.eigvals(w), y.shape[0] - 1)


def stable_interval(w: np.ndarray, margin: float = 1e-6) -> tuple[float, float]:
    """Interval of ``p`` where ``I - p W`` stays invertible (bounded by 1/max row sum)."""
    bound = 1.0 / np.abs(w).sum(axis=1).max()
    real = np.linalg.eigvals(w)
    real = real[np.abs(real.imag) < 1e-10].real
    lo, hi = -bound, bound
    if np.any(real < 0):
        lo = max(lo, 1.0 / real.min())
    if np.any(real > 0):
        hi = min(hi, 1.0 / real.max())
    return lo + margin, hi - margin


def _logdet(p: float, eig: np.ndarray) -> float:
    return float(np.sum(np.log(1.0 - p * eig + 0j)).real)


def sdpm_loglik(p: float, gamma: float, rho: float, beta: float, sigma2: float,
                y: np.ndarray, w: np.ndarray, s: np.ndarray) -> float:
    """Full Gaussian log-likelihood of the within-transformed model."""
    m = _moments(y, w, s)
    e = m.yd - p * m.wyd - m.X @ np.array([gamma, rho, beta])
    n = len(e)
    return float(-0.5 * n * np.log(2 * np.pi * sigma2) + m.n_periods * _logdet(p, m.eig) - e @ e / (2 * sigma2))


def estimate_sdpm(
    panel: np.ndarray,
    scheme: WeightScheme | np.ndarray,
    shocks: np.ndarray,
    fixed_p: float | None = None,
    grid_points: int = 41,
) -> SdpmEstimate:
    """Quasi-maximum likelihood for the spatial dynamic panel with fixed effects.

    ``panel`` and ``shocks`` are (T, N) with rows as periods. With ``fixed_p``
    the spatial coefficient is held at that value and only the remaining
    parameters are estimated.
    """
    y = np.asarray(panel, dtype=float)
    s = np.asarray(shocks, dtype=float)
    w = scheme.w if isinstance(scheme, WeightScheme) else np.asarray(scheme, dtype=float)
    T, N = y.shape
    if s.shape != y.shape or w.shape != (N, N):
        raise ValueError("panel, shocks and weights have inconsistent shapes")
    if T < 3:
        raise SampleTooShort("need at least three periods")
    m = _moments(y, w, s)
    n = len(m.yd)
    fit0 = ols(m.yd, m.X)
    fit1 = ols(m.wyd, m.X)
    e0, e1 = fit0.resid, fit1.resid
    lo, hi = stable_interval(w)

    def sig2(p):
        e = e0 - p * e1
        return float(e @ e) / n

    def negll(p):
        s2 = sig2(p)
        if s2 <= 0:
            return -np.inf
        return 0.5 * n * np.log(s2) - m.n_periods * _logdet(p, m.eig)

    if fixed_p is not None:
        p_hat = float(fixed_p)
    else:
        grid = list(np.linspace(lo, hi, grid_points))
        denom = float(e1 @ e1)
        if denom > 0:
            p_ssr = float(e0 @ e1) / denom
            if lo < p_ssr < hi:
                grid.append(p_ssr)
        grid = np.sort(np.array(grid))
        vals = np.array([negll(p) for p in grid])
        k = int(np.argmin(vals))
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        p_hat = float(grid[k])
        if b > a and np.isfinite(vals[k]):
            res = minimize_scalar(negll, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
            if res.fun <= vals[k]:
                p_hat = float(res.x)
        span = hi - lo
        if p_hat - lo < 1e-4 * span or hi - p_hat < 1e-4 * span:
            raise NonConcaveLikelihood(f"likelihood maximised at the boundary (p = {p_hat:.6f})")

    b = fit0.params - p_hat * fit1.params
    s2 = sig2(p_hat)
    resid_raw = y[1:] - p_hat * (y[1:] @ w.T) - np.stack(
        [y[:-1], y[:-1] @ w.T, s[1:]], axis=-1
    ) @ b
    fe = resid_raw.mean(axis=0)
    if s2 > 0:
        loglik = -0.5 * n * (np.log(2 * np.pi * s2) + 1.0) + m.n_periods * _logdet(p_hat, m.eig)
        se = _sdpm_se(p_hat, s2, m, w, fixed_p is not None)
    else:  # exact fit
        loglik = np.inf
        se = dict.fromkeys((*SDPM_NAMES, "sigma2"), 0.0)
    return SdpmEstimate(p_hat, *map(float, b), s2, fe, se, float(loglik), (lo, hi), n)


def _sdpm_se(p: float, s2: float, m: _SdpmMoments, w: np.ndarray, p_fixed: bool) -> dict:
    """Standard errors from the analytic information matrix at the optimum."""
    n, Tn = len(m.yd), m.n_periods
    XtX = m.X.T @ m.X
    if p_fixed:
        cov = s2 * np.linalg.inv(XtX)
        se = np.sqrt(np.diag(cov))
        return {"p": 0.0, "gamma": se[0], "rho": se[1], "beta": se[2]}
    A_inv = np.linalg.inv(np.eye(w.shape[0]) - p * w)
    WA = w @ A_inv
    info = np.zeros((5, 5))
    info[0, 0] = Tn * np.trace(WA @ WA) + m.wyd @ m.wyd / s2
    info[0, 1:4] = info[1:4, 0] = m.X.T @ m.wyd / s2
    info[1:4, 1:4] = XtX / s2
    info[0, 4] = info[4, 0] = Tn * np.trace(WA) / s2
    info[4, 4] = n / (2 * s2**2)
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError as exc:
        raise SingularDesign("singular information matrix") from exc
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return dict(zip((*SDPM_NAMES, "sigma2"), map(float, se)))


def simulate_sdpm(
    params: Sequence[float],
    fixed_effects: np.ndarray,
    sigma2: float,
    w: np.ndarray,
    shocks: np.ndarray,
    y0: np.ndarray,
    errors: np.ndarray,
) -> np.ndarray:
    """Simulate panels from the spatial dynamic model.

    ``errors`` holds standard-normal draws of shape (R, T, N) (or (T, N));
    row 0 is ignored because period 0 is fixed at ``y0``.
    """
    p, gamma, rho, beta = params
    N = w.shape[0]
    A = np.eye(N) - p * w
    F = np.linalg.solve(A, gamma * np.eye(N) + rho * w)[None]
    errs = np.asarray(errors, dtype=float)
    single = errs.ndim == 2
    errs = errs[None] if single else errs
    forcing = beta * shocks[None] + fixed_effects + np.sqrt(sigma2) * errs
    X = np.linalg.solve(A, forcing.reshape(-1, N).T).T.reshape(forcing.shape)
    X[:, 0] = y0
    out = var_recursion_batch(F, X, 1)
    return out[0] if single else out


def bias_correct(
    estimate: SdpmEstimate,
    panel: np.ndarray,
    scheme: WeightScheme | np.ndarray,
    shocks: np.ndarray,
    iterations: int = 1000,
    n_sim: int = 50,
    seed: int = 0,
    tol: float = 1e-6,
) -> SdpmEstimate:
    """Iterative simulation-based bias correction of ``(p, gamma, rho, beta)``.

    With ``theta_hat`` the original estimate, each step simulates ``n_sim``
    panels at the current value ``theta_k`` (same random numbers every step),
    re-estimates them, and moves ``theta_k`` toward
    ``theta_hat - (mean - theta_k)``. The step is halved whenever the residual
    ``theta_hat - mean`` fails to shrink, which stops two-cycles where the
    simulated mean jumps between likelihood peaks. Stops once successive
    values differ by less than ``tol``; ``iterations`` is the cap.
    """
    if iterations <= 0:
        return estimate
    y = np.asarray(panel, dtype=float)
    s = np.asarray(shocks, dtype=float)
    w = scheme.w if isinstance(scheme, WeightScheme) else np.asarray(scheme, dtype=float)
    rng = np.random.default_rng(seed)
    errors = rng.standard_normal((n_sim, *y.shape))
    target = estimate.params
    current = target.copy()
    lo, hi = estimate.interval
    damping, last = 1.0, np.inf
    for _ in range(iterations):
        sims = simulate_sdpm(current, estimate.fixed_effects, estimate.sigma2, w, s, y[0], errors)
        means = np.mean([estimate_sdpm(panel_k, w, s).params for panel_k in sims], axis=0)
        resid = target - means
        size = np.max(np.abs(resid))
        if size >= last:
            damping *= 0.5
        last = size
        nxt = current + damping * resid
        if not lo < nxt[0] < hi:
            raise NonConvergence(f"bias-corrected p = {nxt[0]:.4f} left the stable interval")
        step = np.max(np.abs(nxt - current))
        current = nxt
        if step < tol:
            return estimate.with_params(current, bias_corrected=True, bias=target - current)
    raise NonConvergence(f"no fixed point within {iterations} iterations (last step {step:.2e})")


# ---------------------------------------------------------------------------
# aggregate ARDL and theta spread

ArdlEstimate = ArxEstimate


def estimate_ardl_us(
    activity: np.ndarray,
    shock: np.ndarray,
    lags: int = 2,
    difference: bool = True,
    include_shock: bool = True,
) -> ArdlEstimate:
    """Least squares of activity (differenced by default) on its own lags,
    the national shock and a constant."""
    y = np.asarray(activity, dtype=float)
    s = np.asarray(shock, dtype=float)
    if len(y) != len(s):
        raise ValueError("activity and shock series must be aligned")
    if difference:
        y, s = np.diff(y), s[1:]
    spec = ArxSpec(p_dom=lags, p_star=0, foreign=False, shock_included=include_shock, max_lag=max(12, lags))
    return estimate_arx(y, None, s, spec)


@dataclass(frozen=True)
class ThetaSummary:
    mean: float
    sd: float
    min: float
    max: float
    argmin: str
    argmax: str
    n: int


def theta_summary(
    estimates: Sequence[ArxEstimate] | np.ndarray, labels: Sequence[str] | None = None, ddof: int = 1
) -> ThetaSummary:
    """Cross-state moments of the shock coefficients (sample sd by default)."""
    thetas = np.array([e.theta for e in estimates]) if len(estimates) and isinstance(
        estimates[0], ArxEstimate) else np.asarray(estimates, dtype=float)
    if len(thetas) < 2:
        raise TooFewStates("need at least two states")
    labels = list(labels) if labels is not None else [str(k) for k in range(len(thetas))]
    return ThetaSummary(
        float(thetas.mean()), float(thetas.std(ddof=ddof)), float(thetas.min()), float(thetas.max()),
        labels[int(np.argmin(thetas))], labels[int(np.argmax(thetas))], len(thetas),
    )


def render_table(sdpm: SdpmEstimate | None, ardl: ArdlEstimate | None, theta: ThetaSummary | None) -> str:
    """Three-panel text table: spatial panel, aggregate ARDL, theta spread."""
    lines = []
    rule = "-" * 56
    if sdpm is not None:
        title = "(a) Spatial dynamic panel" + (" (bias-corrected)" if sdpm.bias_corrected else "")
        lines += [rule, title, rule, f"{'variable':<18}{'coefficient':>14}{'std. error':>14}", rule]
        rows = [("W y_t", "p"), ("y_t-1", "gamma"), ("W y_t-1", "rho"), ("s_t", "beta")]
        for label, key in rows:
            lines.append(f"{label:<18}{getattr(sdpm, key):>14.4f}{sdpm.se[key]:>14.4f}")
    if ardl is not None:
        lines += [rule, "(b) Aggregate ARDL", rule, f"{'variable':<18}{'coefficient':>14}{'std. error':>14}", rule]
        for name, b, se in zip(ardl.names, ardl.params, ardl.se):
            label = {"alpha": "const", "theta": "s_t"}.get(name, name.replace("beta_", "y_t-"))
            lines.append(f"{label:<18}{b:>14.4f}{se:>14.4f}")
    if theta is not None:
        lines += [rule, "(c) State shock coefficients theta_i", rule,
                  f"{'average':>10}{'std. dev.':>11}{'min':>11}{'max':>11}", rule,
                  f"{theta.mean:>10.3f}{theta.sd:>11.3f}{theta.min:>11.3f}{theta.max:>11.3f}",
                  f"{'':>10}{'':>11}{theta.argmin:>11}{theta.argmax:>11}"]
    lines.append(rule)
    return "\n".join(lines) + "\n"
