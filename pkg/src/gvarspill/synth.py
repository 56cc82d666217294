"""Synthetic GVAR panels with known coefficients.

Data are generated from the reduced form with state errors ``u_t`` mapped
through ``G^-1``; the first ``burn_in`` periods are discarded. Shocks follow a
Bernoulli hit indicator times a Beta-distributed county share, optionally
rounded to whole counties so that the exported declarations reproduce the
shock panel exactly.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solve_discrete_lyapunov

from . import geography
from .errors import GvarError, UnstableSpec
from .gvar import (
    GvarSystem,
    StackedSystem,
    companion,
    solve_reduced_form,
    stability,
    stacked_from_coefficients,
)
from .ingest import (
    ActivityPanel,
    DeclarationRecord,
    TradeFlow,
    TradeFlowTable,
    write_activity_panel,
    write_declarations,
    write_trade_flows,
)
from .irf import IrfResult, ShockScenario, compute_irf
from .kernels import var_recursion
from .weights import WeightScheme, trade_weights

Range = tuple[float, float]


@dataclass(frozen=True)
class DgpSpec:
    """Data-generating process. Coefficients given as ``None`` are drawn
    uniformly from the matching ``*_range``; explicit values broadcast to
    ``(N,)`` or, for ``beta``/``gamma``, to ``(N, p)``."""

    N: int = 5
    T: int = 200
    p: int = 1
    seed: int = 0
    states: tuple[str, ...] | None = None
    alpha: object = None
    beta: object = None
    gamma0: object = None
    gamma: object = None
    theta: object = None
    sigma2: object = None
    alpha_range: Range = (-0.05, 0.05)
    beta_range: Range = (0.1, 0.5)
    gamma0_range: Range = (0.1, 0.6)
    gamma_range: Range = (-0.2, 0.2)
    theta_range: Range = (-0.8, -0.1)
    sigma2_range: Range = (0.5, 1.5)
    weights: WeightScheme | None = None
    link_prob: float = 0.5
    shock_prob: float = 0.1
    share_ab: tuple[float, float] = (2.0, 5.0)
    quantize: bool = True
    errors: str = "gaussian"
    t_df: float = 5.0
    burn_in: int = 200
    max_radius: float = 0.98
    max_tries: int = 200
    start_month: str = "1990-01"

    def labels(self) -> tuple[str, ...]:
        if self.states is not None:
            if len(self.states) != self.N:
                raise ValueError("states must have N entries")
            return tuple(self.states)
        if self.N <= len(geography.STATES):
            return geography.STATES[: self.N]
        return tuple(f"U{k:03d}" for k in range(self.N))


@dataclass(frozen=True)
class SyntheticData:
    spec: DgpSpec
    states: tuple[str, ...]
    dates: np.ndarray  # months of the differenced sample
    y: np.ndarray  # (T, N) differences
    s: np.ndarray  # (T, N) shocks
    hits: np.ndarray  # (T, N) counties hit (zero unless quantized)
    counties: np.ndarray
    flows: np.ndarray | None
    scheme: WeightScheme
    stacked: StackedSystem
    system: GvarSystem
    coefficients: dict = field(repr=False)

    @property
    def levels(self) -> np.ndarray:
        """(T+1, N) levels starting from zero; differencing recovers ``y``."""
        return np.vstack([np.zeros(self.y.shape[1]), np.cumsum(self.y, axis=0)])

    def true_irf(self, scenario: ShockScenario | np.ndarray, H: int = 48) -> IrfResult:
        return compute_irf(self.system, scenario, H)


def random_flows(N: int, rng: np.random.Generator, link_prob: float = 0.5) -> np.ndarray:
    """Sparse positive flow matrix with every unit linked to at least one other."""
    flows = rng.lognormal(0.0, 1.0, size=(N, N)) * (rng.random((N, N)) < link_prob)
    np.fill_diagonal(flows, 0.0)
    if N > 1:
        ring = np.arange(N)
        flows[ring, (ring + 1) % N] += rng.lognormal(0.0, 1.0, size=N)
    return flows


def _coef(value, default_range: Range, shape, rng) -> tuple[np.ndarray, bool]:
    if value is None:
        return rng.uniform(*default_range, size=shape), True
    return np.broadcast_to(np.asarray(value, dtype=float), shape).copy(), False


def draw_system(spec: DgpSpec, scheme: WeightScheme, rng: np.random.Generator) -> tuple[StackedSystem, dict]:
    """Draw coefficients until the reduced form is invertible and stable."""
    N, p = spec.N, spec.p
    for _ in range(spec.max_tries):
        alpha, _ = _coef(spec.alpha, spec.alpha_range, (N,), rng)
        beta, d1 = _coef(spec.beta, spec.beta_range, (N, p), rng)
        if spec.beta is None and p > 1:
            beta[:, 1:] *= 0.3
        gamma0, d2 = _coef(spec.gamma0, spec.gamma0_range, (N,), rng)
        gamma, d3 = _coef(spec.gamma, spec.gamma_range, (N, p), rng)
        theta, _ = _coef(spec.theta, spec.theta_range, (N,), rng)
        sigma2, _ = _coef(spec.sigma2, spec.sigma2_range, (N,), rng)
        stacked = stacked_from_coefficients(scheme, alpha, beta, gamma0, gamma, theta, sigma2)
        coefs = dict(alpha=alpha, beta=beta, gamma0=gamma0, gamma=gamma, theta=theta, sigma2=sigma2)
        try:
            system = solve_reduced_form(stacked)
        except GvarError:
            system = None
        if system is not None and stability(system).radius < spec.max_radius:
            return stacked, coefs
        if not (d1 or d2 or d3):
            break
    raise UnstableSpec(f"no stable system with spectral radius < {spec.max_radius}")


def draw_shocks(spec: DgpSpec, n_periods: int, counties: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    hit = rng.random((n_periods, spec.N)) < spec.shock_prob
    share = rng.beta(*spec.share_ab, size=(n_periods, spec.N))
    if not spec.quantize:
        return hit * share, np.zeros((n_periods, spec.N), dtype=np.int64)
    n_hit = np.where(hit, np.clip(np.rint(share * counties), 1, counties), 0).astype(np.int64)
    return n_hit / counties, n_hit


def draw_errors(spec: DgpSpec, n_periods: int, sigma2: np.ndarray, rng) -> np.ndarray:
    if spec.errors == "gaussian":
        z = rng.standard_normal((n_periods, spec.N))
    elif spec.errors == "t":
        if spec.t_df <= 2:
            raise ValueError("t errors need df > 2 for a finite variance")
        z = rng.standard_t(spec.t_df, size=(n_periods, spec.N)) * np.sqrt((spec.t_df - 2) / spec.t_df)
    else:
        raise ValueError(f"unknown error distribution {spec.errors!r}")
    return z * np.sqrt(sigma2)


def simulate_gvar(spec: DgpSpec) -> SyntheticData:
    rng = np.random.default_rng(spec.seed)
    states = spec.labels()
    flows = None
    if spec.weights is None:
        flows = random_flows(spec.N, rng, spec.link_prob)
        scheme = trade_weights(flows, states)
    else:
        scheme = spec.weights
        if scheme.labels != states:
            raise ValueError("weight scheme labels differ from the spec's states")
    stacked, coefs = draw_system(spec, scheme, rng)
    system = solve_reduced_form(stacked)

    counties = np.array([geography.COUNTIES.get(s, 100) for s in states])
    total = spec.T + spec.burn_in
    s, hits = draw_shocks(spec, total, counties, rng)
    u = draw_errors(spec, total, stacked.sigma2, rng)
    X = system.c + s @ system.Lambda.T + system.to_reduced_shocks(u)
    y = var_recursion(system.F, X, 0)[spec.burn_in :]
    s, hits = s[spec.burn_in :], hits[spec.burn_in :]
    start = np.datetime64(spec.start_month, "M")
    dates = np.arange(start + 1, start + 1 + spec.T, dtype="datetime64[M]")
    return SyntheticData(spec, states, dates, y, s, hits, counties, flows, scheme, stacked, system, coefs)


def stationary_covariance(system: GvarSystem, shock_cov: np.ndarray | None = None) -> np.ndarray:
    """Unconditional covariance of ``y_t`` via the discrete Lyapunov equation.

    ``shock_cov`` is the covariance of an i.i.d. shock vector ``s_t``; its
    contribution enters through ``Lambda``.
    """
    N, p = system.N, system.p
    Q = system.Sigma_eps.copy()
    if shock_cov is not None:
        Q = Q + system.Lambda @ shock_cov @ system.Lambda.T
    A = companion(system.F) if p else np.zeros((N, N))
    Qc = np.zeros((N * max(p, 1), N * max(p, 1)))
    Qc[:N, :N] = Q
    return solve_discrete_lyapunov(A, Qc)[:N, :N]


def write_ingest_files(data: SyntheticData, out_dir: str | Path) -> dict[str, Path]:
    """Export activity levels, declarations and trade flows in ingest formats."""
    if not data.spec.quantize:
        raise ValueError("declarations need quantized shocks (spec.quantize=True)")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    level_dates = np.concatenate([[data.dates[0] - 1], data.dates])
    paths = {
        "activity": out / "activity.csv",
        "declarations": out / "declarations.csv",
        "trade_flows": out / "trade_flows.csv",
    }
    write_activity_panel(ActivityPanel(level_dates, data.states, data.levels), paths["activity"])

    records = []
    for t, i in zip(*np.nonzero(data.hits)):
        month = data.dates[t].astype(object)
        records.append(
            DeclarationRecord(
                declaration_id=f"SYN-{len(records) + 1}",
                state=data.states[i],
                incident_type="Severe Storm",
                group="storm",
                begin_date=dt.date(month.year, month.month, 1),
                end_date=None,
                counties_hit=int(data.hits[t, i]),
            )
        )
    write_declarations(records, paths["declarations"])

    flows = data.flows if data.flows is not None else data.scheme.w
    entries = tuple(
        TradeFlow(data.states[i], data.states[j], float(flows[i, j]), False)
        for i, j in zip(*np.nonzero(flows))
    )
    write_trade_flows(TradeFlowTable(entries), paths["trade_flows"])
    return paths


def shock_moments(spec: DgpSpec) -> np.ndarray:
    """Diagonal covariance of the (unquantized) shock process."""
    a, b = spec.share_ab
    q = spec.shock_prob
    m1 = q * a / (a + b)
    m2 = q * a * (a + 1) / ((a + b) * (a + b + 1))
    return np.eye(spec.N) * (m2 - m1**2)
