"""State-level ARX* estimation, lag selection and diagnostics.

Each state's equation (generalised to ``p_dom`` own lags and ``p_star`` foreign
lags) is::

    y_it = alpha_i + sum_l beta_il y_i,t-l + gamma_0i y*_it
           + sum_l gamma_li y*_i,t-l + theta_i s_it + u_it

where ``y*_it = sum_j w_ij y_jt`` is the trade-weighted rest-of-country
average. All regressions are plain OLS with ``sigma^2 = SSR / (T_eff - k)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import linalg, stats

from .errors import SampleTooShort, SingularDesign
from .ingest import ActivityPanel
from .shocks import ShockPanel
from .weights import WeightScheme

ADF_CRITICAL_5PCT = {"c": -2.86, "ct": -3.41}


@dataclass(frozen=True)
class OlsFit:
    params: np.ndarray
    resid: np.ndarray
    ssr: float
    sigma2: float
    cov: np.ndarray
    nobs: int

    @property
    def k(self) -> int:
        return len(self.params)

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov))


def ols(y: np.ndarray, X: np.ndarray, min_dof: int = 1) -> OlsFit:
    """Least squares via QR, refusing rank-deficient designs."""
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    n, k = X.shape
    if n - k < min_dof:
        raise SampleTooShort(f"{n} observations for {k} regressors")
    sv = np.linalg.svd(X, compute_uv=False)
    if k and (sv[-1] <= sv[0] * max(n, k) * np.finfo(float).eps * 16 or sv[0] == 0):
        raise SingularDesign("regressors are collinear")
    q, r = np.linalg.qr(X)
    params = linalg.solve_triangular(r, q.T @ y)
    resid = y - X @ params
    ssr = float(resid @ resid)
    sigma2 = ssr / (n - k)
    r_inv = linalg.solve_triangular(r, np.eye(k))
    cov = sigma2 * (r_inv @ r_inv.T)
    return OlsFit(params, resid, ssr, sigma2, cov, n)


def lagged(x: np.ndarray, lag: int, start: int) -> np.ndarray:
    """``x[t - lag]`` for ``t = start .. len(x) - 1``."""
    return x[start - lag : len(x) - lag]


# ---------------------------------------------------------------------------
# ARX*


@dataclass(frozen=True)
class ArxSpec:
    p_dom: int = 2
    p_star: int = 2
    include_constant: bool = True
    shock_included: bool = True
    foreign: bool = True
    max_lag: int = 12

    def __post_init__(self):
        if not (0 <= self.p_dom <= self.max_lag and 0 <= self.p_star <= self.max_lag):
            raise ValueError(f"lag orders must lie in 0..{self.max_lag}")

    @property
    def max_order(self) -> int:
        return max(self.p_dom, self.p_star if self.foreign else 0)

    def names(self) -> list[str]:
        out = ["alpha"] if self.include_constant else []
        out += [f"beta_{l}" for l in range(1, self.p_dom + 1)]
        if self.foreign:
            out += ["gamma_0"] + [f"gamma_{l}" for l in range(1, self.p_star + 1)]
        if self.shock_included:
            out.append("theta")
        return out


@dataclass(frozen=True)
class ArxEstimate:
    spec: ArxSpec
    names: tuple[str, ...]
    params: np.ndarray
    se: np.ndarray
    residuals: np.ndarray
    sigma2: float
    nobs: int
    start: int

    def get(self, name: str, default: float = 0.0) -> float:
        try:
            return float(self.params[self.names.index(name)])
        except ValueError:
            return default

    @property
    def alpha(self) -> float:
        return self.get("alpha")

    @property
    def beta(self) -> np.ndarray:
        return np.array([self.get(f"beta_{l}") for l in range(1, self.spec.p_dom + 1)])

    @property
    def gamma0(self) -> float:
        return self.get("gamma_0")

    @property
    def gamma_lags(self) -> np.ndarray:
        if not self.spec.foreign:
            return np.zeros(0)
        return np.array([self.get(f"gamma_{l}") for l in range(1, self.spec.p_star + 1)])

    @property
    def theta(self) -> float:
        return self.get("theta")

    @property
    def k(self) -> int:
        return len(self.params)

    @property
    def bic(self) -> float:
        return bic(self.sigma2, self.nobs, self.k)


def bic(sigma2: float, nobs: int, k: int) -> float:
    """Schwarz criterion from the unbiased residual variance."""
    return nobs * math.log(sigma2 * (nobs - k) / nobs) + k * math.log(nobs)


def arx_design(
    y: np.ndarray, y_star: np.ndarray | None, s: np.ndarray | None, spec: ArxSpec, start: int
) -> tuple[np.ndarray, np.ndarray]:
    T = len(y)
    cols = []
    if spec.include_constant:
        cols.append(np.ones(T - start))
    cols += [lagged(y, l, start) for l in range(1, spec.p_dom + 1)]
    if spec.foreign:
        cols += [lagged(y_star, l, start) for l in range(0, spec.p_star + 1)]
    if spec.shock_included:
        cols.append(s[start:])
    X = np.column_stack(cols) if cols else np.empty((T - start, 0))
    return y[start:], X


def estimate_arx(
    y: np.ndarray,
    y_star: np.ndarray | None,
    s: np.ndarray | None,
    spec: ArxSpec = ArxSpec(),
    start: int | None = None,
) -> ArxEstimate:
    """OLS fit of one ARX* equation.

    ``start`` is the first time index used as a dependent observation; it
    defaults to the largest lag and may be set higher to align samples across
    equations or candidate lag orders.
    """
    y = np.asarray(y, dtype=float)
    y_star = None if y_star is None else np.asarray(y_star, dtype=float)
    s = None if s is None else np.asarray(s, dtype=float)
    for name, x in (("y_star", y_star if spec.foreign else None), ("s", s if spec.shock_included else None)):
        if x is not None and len(x) != len(y):
            raise ValueError(f"{name} has length {len(x)}, expected {len(y)}")
    if spec.foreign and y_star is None or spec.shock_included and s is None:
        raise ValueError("spec requires y_star / s series that were not supplied")
    start = spec.max_order if start is None else start
    if start < spec.max_order:
        raise ValueError("start precedes the largest lag")
    k = len(spec.names())
    if len(y) - start <= k + 5:
        raise SampleTooShort(f"{len(y) - start} usable observations for {k} regressors")
    dep, X = arx_design(y, y_star, s, spec, start)
    fit = ols(dep, X)
    return ArxEstimate(
        spec, tuple(spec.names()), fit.params, fit.se, fit.resid, fit.sigma2, fit.nobs, start
    )


@dataclass(frozen=True)
class LagSelection:
    p_dom: int
    p_star: int
    table: dict[tuple[int, int], float] = field(repr=False)


def select_lag_bic(
    y: np.ndarray,
    y_star: np.ndarray,
    s: np.ndarray,
    max_p: int,
    include_constant: bool = True,
    shock_included: bool = True,
) -> LagSelection:
    """Pick ``(p_dom, p_star)`` in ``0..max_p`` minimising BIC.

    Every candidate is fitted on the same sample, starting at ``max_p``. Ties
    go to the smaller total lag count, then the smaller ``p_dom``.
    """
    if max_p < 1:
        raise ValueError("max_p must be >= 1")
    table = {}
    for pd_ in range(max_p + 1):
        for ps in range(max_p + 1):
            spec = ArxSpec(pd_, ps, include_constant, shock_included, max_lag=max(12, max_p))
            est = estimate_arx(y, y_star, s, spec, start=max_p)
            table[(pd_, ps)] = bic(est.sigma2, est.nobs, est.k)
    best = min(table, key=lambda key: (table[key], key[0] + key[1], key[0]))
    return LagSelection(best[0], best[1], table)


# ---------------------------------------------------------------------------
# system-level helpers


@dataclass(frozen=True)
class ModelData:
    """Aligned estimation inputs: activity (usually differenced) and shocks."""

    dates: np.ndarray
    states: tuple[str, ...]
    y: np.ndarray  # T x N
    s: np.ndarray  # T x N
    differenced: bool = True

    @property
    def T(self) -> int:
        return self.y.shape[0]


def align(activity: ActivityPanel, shocks: ShockPanel, difference: bool = True) -> ModelData:
    """Difference the activity panel (by default) and line shocks up with it."""
    if tuple(activity.states) != tuple(shocks.states):
        raise ValueError("activity and shock panels cover different states")
    panel = activity.differences() if difference else activity
    pos = {d: k for k, d in enumerate(shocks.dates)}
    missing = [d for d in panel.dates if d not in pos]
    if missing:
        raise ValueError(f"no shock observation for {missing[0]} (and {len(missing) - 1} more)")
    idx = np.array([pos[d] for d in panel.dates])
    return ModelData(panel.dates, panel.states, panel.values, shocks.s[idx], difference)


def foreign_series(y: np.ndarray, scheme: WeightScheme) -> np.ndarray:
    """``y*_t = W y_t`` for every state (T x N)."""
    return y @ scheme.w.T


def estimate_system(
    y: np.ndarray, s: np.ndarray, scheme: WeightScheme, spec: ArxSpec | Sequence[ArxSpec]
) -> list[ArxEstimate]:
    """Fit every state's ARX* on a common sample.

    All equations start at the largest lag in the system so residual rows are
    time-aligned across states.
    """
    y = np.asarray(y, dtype=float)
    s = np.asarray(s, dtype=float)
    N = y.shape[1]
    specs = list(spec) if isinstance(spec, (list, tuple)) else [spec] * N
    if len(specs) != N:
        raise ValueError("one spec per state required")
    ystar = foreign_series(y, scheme)
    start = max(sp.max_order for sp in specs)
    return [estimate_arx(y[:, i], ystar[:, i], s[:, i], specs[i], start=start) for i in range(N)]


def residual_matrix(estimates: Sequence[ArxEstimate]) -> np.ndarray:
    starts = {e.start for e in estimates}
    if len(starts) != 1:
        raise ValueError("estimates are not on a common sample")
    return np.column_stack([e.residuals for e in estimates])


def write_coefficients(estimates: Sequence[ArxEstimate], states: Sequence[str], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["state", "parameter", "estimate", "std_error"])
        for st, e in zip(states, estimates):
            for name, b, se in zip(e.names, e.params, e.se):
                w.writerow([st, name, repr(float(b)), repr(float(se))])
            w.writerow([st, "sigma2", repr(float(e.sigma2)), ""])


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    critical_value: float
    reject: bool
    lags: int
    nobs: int


def adf_test(x: np.ndarray, lags: int = 0, deterministic: str = "c") -> AdfResult:
    """Augmented Dickey-Fuller t-test on the lagged level.

    Uses large-sample 5% critical values only (-2.86 with a constant, -3.41
    with constant and trend).
    """
    x = np.asarray(x, dtype=float)
    if deterministic not in ADF_CRITICAL_5PCT:
        raise ValueError("deterministic must be 'c' or 'ct'")
    if len(x) <= 25:
        raise SampleTooShort("ADF needs more than 25 observations")
    dx = np.diff(x)
    start = lags
    dep = dx[start:]
    n = len(dep)
    cols = [np.ones(n)]
    if deterministic == "ct":
        cols.append(np.arange(start + 1, start + 1 + n, dtype=float))
    cols.append(x[start : start + n])
    cols += [lagged(dx, l, start) for l in range(1, lags + 1)]
    X = np.column_stack(cols)
    fit = ols(dep, X)
    j = 2 if deterministic == "ct" else 1
    stat = float(fit.params[j] / fit.se[j])
    crit = ADF_CRITICAL_5PCT[deterministic]
    return AdfResult(stat, crit, stat < crit, lags, n)


def f_test(y: np.ndarray, X: np.ndarray, restrict: Sequence[int]) -> tuple[float, float]:
    """F-test that the coefficients on columns ``restrict`` are jointly zero."""
    full = ols(y, X)
    if full.ssr <= 0 or not np.isfinite(full.ssr):
        raise SingularDesign("zero residual variance in unrestricted regression")
    keep = [k for k in range(X.shape[1]) if k not in set(restrict)]
    small = ols(y, X[:, keep])
    q = len(restrict)
    dof = full.nobs - full.k
    F = ((small.ssr - full.ssr) / q) / (full.ssr / dof)
    return float(F), float(stats.f.sf(F, q, dof))


def seasonality_ftest(x: np.ndarray, ar_order: int = 1, first_month: int = 1) -> tuple[float, float]:
    """Joint F-test of 11 month-of-year dummies added to an AR(``ar_order``).

    ``first_month`` is the calendar month (1-12) of ``x[0]``.
    """
    x = np.asarray(x, dtype=float)
    if len(x) - ar_order < 36:
        raise SampleTooShort("need at least three full years beyond the AR lags")
    start = ar_order
    n = len(x) - start
    months = (np.arange(start, len(x)) + first_month - 1) % 12
    dummies = np.column_stack([(months == m).astype(float) for m in range(1, 12)])
    X = np.column_stack([np.ones(n), *(lagged(x, l, start) for l in range(1, ar_order + 1)), dummies])
    return f_test(x[start:], X, list(range(1 + ar_order, X.shape[1])))


@dataclass(frozen=True)
class GrangerResult:
    y_to_ystar: tuple[float, float]
    ystar_to_y: tuple[float, float]
    lags: int


def granger_test(y: np.ndarray, y_star: np.ndarray, lags: int = 2, difference: bool = False) -> GrangerResult:
    """Bivariate Granger-causality F-tests in both directions.

    The estimation pipeline already works on first differences, so by default
    the inputs are used as given; ``difference=True`` differences them first.
    """
    y = np.asarray(y, dtype=float)
    y_star = np.asarray(y_star, dtype=float)
    if difference:
        y, y_star = np.diff(y), np.diff(y_star)
    if len(y) != len(y_star):
        raise ValueError("series must be aligned")
    if lags < 1 or len(y) <= 4 * lags:
        raise SampleTooShort("series too short for the lag order")

    def one_way(target, source):
        n = len(target) - lags
        X = np.column_stack(
            [np.ones(n)]
            + [lagged(target, l, lags) for l in range(1, lags + 1)]
            + [lagged(source, l, lags) for l in range(1, lags + 1)]
        )
        return f_test(target[lags:], X, list(range(1 + lags, 1 + 2 * lags)))

    return GrangerResult(one_way(y_star, y), one_way(y, y_star), lags)
