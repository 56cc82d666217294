"""Recursive-design residual bootstrap for GVAR impulse responses.

Each replication resamples whole cross-sectional rows of the state residuals
(keeping their contemporaneous correlation), regenerates the panel from the
estimated reduced form with the observed shocks as fixed exogenous input,
re-estimates every ARX*, rebuilds the system and recomputes the statistic of
interest. Replications whose rebuilt system is unstable are discarded.

With ``n_jobs > 1`` replications run in worker processes rather than threads:
concurrent BLAS calls from several threads of one process have been seen to
corrupt the OpenBLAS heap, and most of each replication holds the GIL anyway.
"""

from __future__ import annotations

import logging
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyResiduals, TooManyUnstableReplications, UnstableSystem
from .estimation import ArxEstimate, ArxSpec, estimate_system, residual_matrix
from .gvar import GvarSystem, assemble, solve_reduced_form, stability
from .ingest import RegionMap
from .irf import (
    DEFAULT_HORIZON,
    HEADLINE_HORIZON,
    IrfResult,
    ShockScenario,
    compute_irf,
    make_state_scenario,
    muted_response,
    region_weight_matrix,
)
from .kernels import var_recursion
from .weights import WeightScheme

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BootstrapConfig:
    replications: int = 1000
    percentiles: tuple[float, ...] = (10.0, 90.0)
    seed: int = 0
    horizon: int = DEFAULT_HORIZON
    allow_unstable: bool = False
    max_unstable_share: float = 0.2
    n_jobs: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be positive")
        pct = tuple(float(q) for q in self.percentiles)
        if any(not 0 < q < 100 for q in pct) or list(pct) != sorted(pct):
            raise ValueError("percentiles must be sorted and inside (0, 100)")
        object.__setattr__(self, "percentiles", pct)


def resample_residuals(residuals: np.ndarray, seed: int | np.random.Generator | None = None) -> np.ndarray:
    """Draw rows of a (T_eff, N) residual matrix i.i.d. with replacement."""
    U = np.asarray(residuals, dtype=float)
    if U.ndim != 2 or U.shape[0] == 0:
        raise EmptyResiduals("residual matrix is empty")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return U[rng.integers(0, U.shape[0], size=U.shape[0])]


@dataclass(frozen=True)
class FittedGvar:
    estimates: list[ArxEstimate]
    system: GvarSystem
    radius: float
    stable: bool


def fit_gvar(y: np.ndarray, s: np.ndarray, scheme: WeightScheme, spec: ArxSpec | Sequence[ArxSpec]) -> FittedGvar:
    ests = estimate_system(y, s, scheme, spec)
    system = solve_reduced_form(assemble(ests, scheme))
    rep = stability(system)
    return FittedGvar(ests, system, rep.radius, rep.stable)


def regenerate(system: GvarSystem, y: np.ndarray, s: np.ndarray, u: np.ndarray, start: int) -> np.ndarray:
    """Rebuild a panel from the reduced form with structural residual rows ``u``.

    The first ``start`` observations are kept at their sample values.
    """
    X = system.c + s @ system.Lambda.T
    X[:start] = y[:start]
    X[start:] += system.to_reduced_shocks(u)
    return var_recursion(system.F, X, start)


_JOB: tuple | None = None


def _set_job(*job) -> None:
    global _JOB
    _JOB = job or None


def _replicate(child: np.random.SeedSequence):
    point, y, s, scheme, spec, U, start, allow_unstable, statistic = _JOB
    rng = np.random.default_rng(child)
    y_b = regenerate(point.system, y, s, resample_residuals(U, rng), start)
    fit_b = fit_gvar(y_b, s, scheme, spec)
    if not fit_b.stable and not allow_unstable:
        return None
    return statistic(fit_b)


def run_replications(
    y: np.ndarray,
    s: np.ndarray,
    scheme: WeightScheme,
    spec: ArxSpec | Sequence[ArxSpec],
    config: BootstrapConfig,
    statistic: Callable[[FittedGvar], np.ndarray],
    point: FittedGvar | None = None,
) -> tuple[FittedGvar, np.ndarray, int]:
    """Apply ``statistic`` to every stable replication.

    Returns the point fit, the stacked statistics of kept replications (in
    replication order) and the number discarded as unstable. With
    ``config.n_jobs > 1`` the inputs and ``statistic`` must be picklable.
    """
    y = np.asarray(y, dtype=float)
    s = np.asarray(s, dtype=float)
    point = point or fit_gvar(y, s, scheme, spec)
    if not point.stable and not config.allow_unstable:
        raise UnstableSystem(f"point estimate has spectral radius {point.radius:.4f}")
    U = residual_matrix(point.estimates)
    start = point.estimates[0].start
    children = np.random.SeedSequence(config.seed).spawn(config.replications)
    job = (point, y, s, scheme, spec, U, start, config.allow_unstable, statistic)

    if config.n_jobs > 1:
        ctx = multiprocessing.get_context("spawn")
        chunk = max(1, config.replications // (4 * config.n_jobs))
        with ProcessPoolExecutor(config.n_jobs, mp_context=ctx, initializer=_set_job, initargs=job) as pool:
            results = list(pool.map(_replicate, children, chunksize=chunk))
    else:
        _set_job(*job)
        try:
            results = [_replicate(c) for c in children]
        finally:
            _set_job()
    kept = [r for r in results if r is not None]
    discarded = len(results) - len(kept)
    if discarded > config.max_unstable_share * config.replications:
        raise TooManyUnstableReplications(
            f"{discarded} of {config.replications} replications unstable"
        )
    if discarded:
        logger.info("discarded %d unstable replications", discarded)
    return point, np.stack(kept), discarded


def _irf_responses(fit: FittedGvar, scenario, horizon: int) -> np.ndarray:
    return compute_irf(fit.system, scenario, horizon).responses


@dataclass(frozen=True)
class BandedIrf:
    point: IrfResult
    draws: np.ndarray  # (R, H+1, N), cumulated (level) responses
    draws_diff: np.ndarray  # (R, H+1, N), difference responses
    percentiles: tuple[float, ...]
    n_discarded: int
    region_draws: np.ndarray | None = None  # (R, H+1, regions)
    regions: tuple[str, ...] = ()

    @property
    def labels(self) -> tuple[str, ...]:
        return self.point.labels

    @property
    def mean(self) -> np.ndarray:
        return self.draws.mean(axis=0)

    def band(self, q: float) -> np.ndarray:
        return np.percentile(self.draws, q, axis=0)

    @property
    def bands(self) -> dict[float, np.ndarray]:
        return {q: self.band(q) for q in self.percentiles}

    @property
    def region_mean(self) -> np.ndarray:
        return self.region_draws.mean(axis=0)

    def region_band(self, q: float) -> np.ndarray:
        return np.percentile(self.region_draws, q, axis=0)

    def table(self, regional: bool = False) -> dict[str, np.ndarray]:
        """Columns ``mean``, ``p10``, ``p90``... for :func:`irf.write_long`."""
        if regional:
            cols = {"mean": self.region_mean}
            cols.update({f"p{q:g}": self.region_band(q) for q in self.percentiles})
        else:
            cols = {"mean": self.mean}
            cols.update({f"p{q:g}": b for q, b in self.bands.items()})
        return cols


def bootstrap_irf(
    y: np.ndarray,
    s: np.ndarray,
    scheme: WeightScheme,
    spec: ArxSpec | Sequence[ArxSpec],
    scenario: ShockScenario | np.ndarray,
    config: BootstrapConfig = BootstrapConfig(),
    region_map: RegionMap | None = None,
    regions: Sequence[str] | None = None,
) -> BandedIrf:
    """Percentile bands and bootstrap mean of a scenario's impulse responses.

    ``y`` is the (differenced) activity panel and ``s`` the shock panel, both
    (T, N). With a ``region_map``, regional aggregates are computed per draw.
    """
    H = config.horizon
    stat = partial(_irf_responses, scenario=scenario, horizon=H)
    point, diffs, discarded = run_replications(y, s, scheme, spec, config, stat)
    cum = np.cumsum(diffs, axis=1)
    region_draws, reg = None, ()
    if region_map is not None:
        reg = tuple(region_map.order if regions is None else regions)
        region_draws = cum @ region_weight_matrix(region_map, scheme.labels, regions=reg)
    return BandedIrf(
        compute_irf(point.system, scenario, H), cum, diffs, config.percentiles, discarded, region_draws, reg
    )


@dataclass(frozen=True)
class BandedSecondRound:
    states: tuple[str, ...]
    gvar_draws: np.ndarray  # (R, N) cumulated own response at the headline horizon
    muted_draws: np.ndarray
    percentiles: tuple[float, ...]
    horizon: int

    def summary(self) -> dict[str, np.ndarray]:
        out = {"gvar_mean": self.gvar_draws.mean(axis=0), "muted_mean": self.muted_draws.mean(axis=0)}
        for q in self.percentiles:
            out[f"gvar_p{q:g}"] = np.percentile(self.gvar_draws, q, axis=0)
            out[f"muted_p{q:g}"] = np.percentile(self.muted_draws, q, axis=0)
        out["second_round_mean"] = (self.gvar_draws - self.muted_draws).mean(axis=0)
        return out


def own_shock_responses(fit: FittedGvar, horizon: int, intensity: float = 1.0) -> np.ndarray:
    """Cumulated own response of every state to its own shock: (2, N) = (gvar, muted)."""
    labels = fit.system.labels
    out = np.empty((2, len(labels)))
    for i, st in enumerate(labels):
        sc = make_state_scenario(st, labels, intensity)
        out[0, i] = compute_irf(fit.system, sc, horizon).cumulated[horizon, i]
        out[1, i] = muted_response(fit.estimates[i], intensity, horizon).sum()
    return out


def bootstrap_second_round(
    y: np.ndarray,
    s: np.ndarray,
    scheme: WeightScheme,
    spec: ArxSpec | Sequence[ArxSpec],
    config: BootstrapConfig = BootstrapConfig(),
    horizon: int = HEADLINE_HORIZON,
) -> BandedSecondRound:
    """Bootstrap distribution of own-shock GVAR vs muted responses for all states."""
    _, draws, _ = run_replications(y, s, scheme, spec, config, partial(own_shock_responses, horizon=horizon))
    return BandedSecondRound(tuple(scheme.labels), draws[:, 0], draws[:, 1], config.percentiles, horizon)
