"""Stacking state equations into the country-wide system and solving it.

Stacked (structural) form::

    G y_t = alpha + sum_l H_l y_{t-l} + Theta s_t + u_t

Reduced form, obtained by solving with ``G`` (never by forming its inverse)::

    y_t = c + sum_l F_l y_{t-l} + Lambda s_t + eps_t
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, IllConditioned, SingularG
from .estimation import ArxEstimate
from .weights import WeightScheme, link_matrix


@dataclass(frozen=True)
class StackedSystem:
    G: np.ndarray
    H: np.ndarray  # (p, N, N)
    Theta: np.ndarray
    alpha: np.ndarray
    sigma2: np.ndarray
    labels: tuple[str, ...]

    @property
    def N(self) -> int:
        return self.G.shape[0]

    @property
    def p(self) -> int:
        return self.H.shape[0]


@dataclass(frozen=True)
class GvarSystem:
    stacked: StackedSystem
    c: np.ndarray
    F: np.ndarray  # (p, N, N)
    Lambda: np.ndarray
    Sigma_eps: np.ndarray
    lu: tuple = None  # LU factors of G

    @property
    def N(self) -> int:
        return self.stacked.N

    @property
    def p(self) -> int:
        return self.F.shape[0]

    @property
    def labels(self) -> tuple[str, ...]:
        return self.stacked.labels

    def solve_G(self, x: np.ndarray) -> np.ndarray:
        """``G^{-1} x`` for a vector or a (N, k) matrix."""
        return linalg.lu_solve(self.lu, x)

    def to_reduced_shocks(self, u: np.ndarray) -> np.ndarray:
        """Map structural residual rows (T x N) to reduced-form rows."""
        return linalg.lu_solve(self.lu, np.asarray(u, dtype=float).T).T


def assemble(
    estimates: Sequence[ArxEstimate], scheme: WeightScheme, p: int | None = None
) -> StackedSystem:
    """Stack per-state estimates using each state's link matrix.

    Row ``i`` of ``G`` is ``(1, -gamma_0i) W_i`` and row ``i`` of ``H_l`` is
    ``(beta_il, gamma_li) W_i``; shorter lag structures are padded with zeros
    up to ``p`` (default: the largest lag among the estimates).
    """
    N = scheme.N
    if len(estimates) != N:
        raise DimensionMismatch(f"{len(estimates)} estimates for {N} units")
    if p is None:
        p = max((max(len(e.beta), len(e.gamma_lags)) for e in estimates), default=0)
    G = np.zeros((N, N))
    H = np.zeros((p, N, N))
    for i, e in enumerate(estimates):
        W = link_matrix(scheme, i)
        G[i] = np.array([1.0, -e.gamma0]) @ W
        beta, gam = e.beta, e.gamma_lags
        if max(len(beta), len(gam)) > p:
            raise DimensionMismatch(f"unit {i} has more lags than p={p}")
        for l in range(p):
            b = beta[l] if l < len(beta) else 0.0
            g = gam[l] if l < len(gam) else 0.0
            H[l, i] = np.array([b, g]) @ W
    Theta = np.diag([e.theta for e in estimates])
    alpha = np.array([e.alpha for e in estimates])
    sigma2 = np.array([e.sigma2 for e in estimates])
    return StackedSystem(G, H, Theta, alpha, sigma2, scheme.labels)


def stacked_from_coefficients(
    scheme: WeightScheme,
    alpha: np.ndarray,
    beta: np.ndarray,
    gamma0: np.ndarray,
    gamma: np.ndarray,
    theta: np.ndarray,
    sigma2: np.ndarray,
) -> StackedSystem:
    """Stack explicit coefficient arrays; ``beta`` and ``gamma`` are (N, p)."""
    N = scheme.N
    beta = np.asarray(beta, dtype=float).reshape(N, -1)
    gamma = np.asarray(gamma, dtype=float).reshape(N, -1)
    p = max(beta.shape[1], gamma.shape[1])
    w = scheme.w
    G = np.eye(N) - np.asarray(gamma0, dtype=float)[:, None] * w
    H = np.zeros((p, N, N))
    for l in range(p):
        if l < beta.shape[1]:
            H[l] += np.diag(beta[:, l])
        if l < gamma.shape[1]:
            H[l] += gamma[:, l][:, None] * w
    return StackedSystem(
        G, H, np.diag(np.asarray(theta, dtype=float)), np.asarray(alpha, dtype=float),
        np.asarray(sigma2, dtype=float), scheme.labels,
    )


def solve_reduced_form(stacked: StackedSystem, cond_bound: float = 1e10) -> GvarSystem:
    """Solve out ``G``: ``c = G^-1 alpha``, ``F_l = G^-1 H_l``, ``Lambda = G^-1 Theta``.

    ``Sigma_eps = G^-1 diag(sigma2) G^-T``.
    """
    G = stacked.G
    cond = np.linalg.cond(G)
    if not np.isfinite(cond):
        raise SingularG("G is singular")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu = linalg.lu_factor(G, check_finite=True)
    if np.any(np.diag(lu[0]) == 0):
        raise SingularG("G is singular")
    if cond > cond_bound:
        raise IllConditioned(f"condition number of G is {cond:.3g} > {cond_bound:.3g}")
    N, p = stacked.N, stacked.p
    c = linalg.lu_solve(lu, stacked.alpha)
    F = np.empty((p, N, N))
    for l in range(p):
        F[l] = linalg.lu_solve(lu, stacked.H[l])
    Lam = linalg.lu_solve(lu, stacked.Theta)
    A = linalg.lu_solve(lu, np.diag(stacked.sigma2))
    Sigma = linalg.lu_solve(lu, A.T).T
    Sigma = 0.5 * (Sigma + Sigma.T)
    return GvarSystem(stacked, c, F, Lam, Sigma, lu)


def companion(F: np.ndarray) -> np.ndarray:
    """Companion matrix of a VAR(p) with lag matrices ``F`` (p, N, N)."""
    p, N, _ = F.shape
    C = np.zeros((N * p, N * p))
    C[:N] = np.hstack(list(F))
    if p > 1:
        C[N:, : N * (p - 1)] = np.eye(N * (p - 1))
    return C


@dataclass(frozen=True)
class StabilityReport:
    radius: float
    stable: bool


def stability(system: GvarSystem | np.ndarray, tol: float = 1e-8) -> StabilityReport:
    """Spectral radius of the companion matrix; stable iff below ``1 - tol``."""
    F = system.F if isinstance(system, GvarSystem) else np.asarray(system, dtype=float)
    if F.shape[0] == 0:
        return StabilityReport(0.0, True)
    radius = float(np.max(np.abs(np.linalg.eigvals(companion(F)))))
    return StabilityReport(radius, radius < 1.0 - tol)


def _write_matrix(path: Path, m: np.ndarray, labels: Sequence[str]) -> None:
    m = np.atleast_2d(m)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if m.shape[0] == 1:
            w.writerow(list(labels))
            w.writerow([repr(float(v)) for v in m[0]])
            return
        w.writerow(["state", *labels])
        for s, row in zip(labels, m):
            w.writerow([s, *(repr(float(v)) for v in row)])


def write_system(system: GvarSystem, out_dir: str | Path, manifest: dict | None = None) -> list[Path]:
    """Dense CSV export of every system matrix plus a ``system.json`` manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    st, labels = system.stacked, system.labels
    items = {"G": st.G, "Theta": st.Theta, "alpha": st.alpha, "c": system.c,
             "Lambda": system.Lambda, "Sigma_eps": system.Sigma_eps}
    for l in range(system.p):
        items[f"H_{l + 1}"] = st.H[l]
        items[f"F_{l + 1}"] = system.F[l]
    paths = []
    for name, m in items.items():
        path = out_dir / f"{name}.csv"
        _write_matrix(path, m, labels)
        paths.append(path)
    info = {"states": list(labels), "lags": system.p}
    info.update(manifest or {})
    path = out_dir / "system.json"
    path.write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    paths.append(path)
    return paths
