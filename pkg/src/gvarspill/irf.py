"""Impulse responses to one-period weather-shock scenarios.

A scenario is a vector of shock intensities applied at horizon 0 only. The
response in differences follows ``r_0 = Lambda s`` and
``r_h = sum_l F_l r_{h-l}``; level responses are running sums of ``r``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyRegion, MultiStateScenario, UnknownRegion, WeightMismatch
from .estimation import ArxEstimate
from .gvar import GvarSystem
from .ingest import RegionMap
from .kernels import var_recursion

DEFAULT_HORIZON = 48
HEADLINE_HORIZON = 12


@dataclass(frozen=True)
class ShockScenario:
    intensity: np.ndarray
    labels: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        s = np.asarray(self.intensity, dtype=float)
        if s.shape != (len(self.labels),):
            raise ValueError("intensity must have one entry per unit")
        if np.any((s < 0) | (s > 1)):
            raise ValueError("intensities must lie in [0, 1]")
        object.__setattr__(self, "intensity", s)


def make_region_scenario(
    region: str, region_map: RegionMap, states: Sequence[str], intensity: float = 1.0
) -> ShockScenario:
    """All member states of ``region`` hit with the same intensity."""
    if region not in region_map.order:
        raise UnknownRegion(f"unknown region {region!r}")
    members = set(region_map.members(region, states))
    if not members:
        raise EmptyRegion(f"region {region} has no members")
    s = np.array([intensity if st in members else 0.0 for st in states])
    return ShockScenario(s, tuple(states), region)


def make_state_scenario(state: str, states: Sequence[str], intensity: float = 1.0) -> ShockScenario:
    s = np.zeros(len(states))
    s[list(states).index(state)] = intensity
    return ShockScenario(s, tuple(states), state)


@dataclass(frozen=True)
class IrfResult:
    responses: np.ndarray  # (H+1, N), difference scale
    cumulated: np.ndarray  # (H+1, N), level scale
    labels: tuple[str, ...]

    @property
    def horizon(self) -> int:
        return self.responses.shape[0] - 1


def irf_path(F: np.ndarray, impact: np.ndarray, H: int) -> np.ndarray:
    """Difference-scale responses for an impact vector (array-level helper)."""
    X = np.zeros((H + 1, len(impact)))
    X[0] = impact
    return var_recursion(F, X, 1)


def compute_irf(system: GvarSystem, scenario: ShockScenario | np.ndarray, H: int = DEFAULT_HORIZON) -> IrfResult:
    if H < 0:
        raise ValueError("horizon must be >= 0")
    s = scenario.intensity if isinstance(scenario, ShockScenario) else np.asarray(scenario, dtype=float)
    r = irf_path(system.F, system.Lambda @ s, H)
    return IrfResult(r, np.cumsum(r, axis=0), system.labels)


def region_weight_matrix(
    region_map: RegionMap,
    states: Sequence[str],
    weights: np.ndarray | None = None,
    regions: Sequence[str] | None = None,
) -> np.ndarray:
    """(N, R) matrix whose columns average member states of each region."""
    regions = tuple(region_map.order if regions is None else regions)
    wts = np.ones(len(states)) if weights is None else np.asarray(weights, dtype=float)
    if wts.shape != (len(states),) or np.any(wts < 0):
        raise WeightMismatch("aggregation weights need one non-negative entry per state")
    A = np.zeros((len(states), len(regions)))
    for k, reg in enumerate(regions):
        if reg not in region_map.order:
            raise UnknownRegion(reg)
        idx = [i for i, st in enumerate(states) if region_map.region_of(st) == reg]
        if not idx:
            raise EmptyRegion(f"region {reg} has no members")
        total = wts[idx].sum()
        if total <= 0:
            raise WeightMismatch(f"weights of region {reg} sum to zero")
        A[idx, k] = wts[idx] / total
    return A


def aggregate_to_regions(
    irf: IrfResult | np.ndarray,
    region_map: RegionMap,
    states: Sequence[str] | None = None,
    weights: np.ndarray | None = None,
    regions: Sequence[str] | None = None,
    cumulated: bool = True,
) -> np.ndarray:
    """Weighted mean of member-state responses for each region (last axis).

    Accepts an :class:`IrfResult` (cumulated responses by default) or any
    array whose last axis runs over states.
    """
    if isinstance(irf, IrfResult):
        states = irf.labels if states is None else states
        arr = irf.cumulated if cumulated else irf.responses
    else:
        arr = np.asarray(irf, dtype=float)
        if states is None:
            raise ValueError("states are required for array input")
    return arr @ region_weight_matrix(region_map, states, weights, regions)


@dataclass(frozen=True)
class SecondRound:
    state: str
    gvar: np.ndarray  # (H+1,) difference responses of the shocked state
    muted: np.ndarray
    gvar_cumulated: np.ndarray
    muted_cumulated: np.ndarray
    horizon: int

    @property
    def effect(self) -> np.ndarray:
        """Second-round effect at every horizon (cumulated GVAR minus muted)."""
        return self.gvar_cumulated - self.muted_cumulated

    @property
    def headline(self) -> float:
        return float(self.effect[self.horizon])


def muted_response(estimate: ArxEstimate, intensity: float, H: int) -> np.ndarray:
    """Own-equation response with the foreign average held at baseline."""
    beta = estimate.beta
    F = beta.reshape(-1, 1, 1) if len(beta) else np.zeros((0, 1, 1))
    return irf_path(F, np.array([estimate.theta * intensity]), H)[:, 0]


def second_round(
    system: GvarSystem,
    estimates: Sequence[ArxEstimate],
    scenario: ShockScenario,
    H: int = DEFAULT_HORIZON,
    horizon: int = HEADLINE_HORIZON,
) -> SecondRound:
    """Compare a state's GVAR response to its own shock with the muted ARX* one."""
    hit = np.flatnonzero(scenario.intensity)
    if len(hit) != 1:
        raise MultiStateScenario(f"scenario hits {len(hit)} states; exactly one required")
    i = int(hit[0])
    if horizon > H:
        raise ValueError("headline horizon exceeds H")
    g = compute_irf(system, scenario, H).responses[:, i]
    m = muted_response(estimates[i], scenario.intensity[i], H)
    return SecondRound(system.labels[i], g, m, np.cumsum(g), np.cumsum(m), horizon)


def write_long(
    path: str | Path,
    units: Sequence[str],
    columns: Mapping[str, np.ndarray],
    unit_header: str = "unit",
) -> None:
    """Long-format table: one row per (horizon, unit); each column is (H+1, U)."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["horizon", unit_header, *names])
        for h in range(arrays[0].shape[0]):
            for k, u in enumerate(units):
                w.writerow([h, u, *(repr(float(a[h, k])) for a in arrays)])
