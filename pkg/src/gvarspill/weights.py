"""Cross-state weight matrices and per-state link matrices.

The weight of state ``j`` in the network of state ``i`` is the bilateral trade
between the two (flows in both directions) divided by the total trade of
``i`` with all other states. Adjacency weights give equal weight to every
bordering state.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import IndexOutOfRange, IsolatedUnit, UnknownLabel
from .ingest import TradeFlowTable


@dataclass(frozen=True)
class WeightScheme:
    w: np.ndarray
    labels: tuple[str, ...]
    name: str = "custom"

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        n = len(self.labels)
        if w.shape != (n, n):
            raise ValueError(f"weight matrix shape {w.shape} does not match {n} labels")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if np.any(np.diag(w) != 0):
            raise ValueError("weights must have a zero diagonal")
        if n > 1 and np.any(np.abs(w.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("weight rows must sum to one")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def N(self) -> int:
        return len(self.labels)


def normalize_rows(m: np.ndarray, labels: Sequence[str], name: str = "custom") -> WeightScheme:
    """Zero the diagonal and scale every row to sum to one."""
    m = np.array(m, dtype=float)
    np.fill_diagonal(m, 0.0)
    totals = m.sum(axis=1)
    isolated = [labels[k] for k in np.flatnonzero(totals <= 0)]
    if isolated:
        raise IsolatedUnit(f"no links for {isolated}")
    return WeightScheme(m / totals[:, None], tuple(labels), name)


def trade_weights(
    table: TradeFlowTable | np.ndarray, labels: Sequence[str], ignore_unknown: bool = False
) -> WeightScheme:
    """Trade-share weights from a flow table or a dense ``flows[origin, dest]``.

    Self-flows are ignored. Every state needs at least one non-zero bilateral
    flow, otherwise :class:`IsolatedUnit` is raised.
    """
    flows = table if isinstance(table, np.ndarray) else table.matrix(labels, ignore_unknown)
    if flows.shape != (len(labels), len(labels)):
        raise UnknownLabel("flow matrix does not match labels")
    if np.any(flows < 0):
        raise ValueError("flows must be non-negative")
    bilateral = flows + flows.T
    if len(labels) == 1:
        return WeightScheme(np.zeros((1, 1)), tuple(labels), "trade")
    return normalize_rows(bilateral, labels, "trade")


def adjacency_weights(
    borders: Iterable[Iterable[str]],
    labels: Sequence[str],
    fallback: Mapping[str, str] | None = None,
) -> WeightScheme:
    """Equal weights on bordering states.

    ``fallback`` maps a state without borders (e.g. AK, HI) to a single
    partner that receives weight one. It is a counterfactual device only.
    """
    index = {s: k for k, s in enumerate(labels)}
    m = np.zeros((len(labels), len(labels)))
    for pair in borders:
        a, b = tuple(pair)
        if a not in index or b not in index:
            continue
        m[index[a], index[b]] = m[index[b], index[a]] = 1.0
    for state, partner in (fallback or {}).items():
        if state not in index:
            continue
        i = index[state]
        if m[i].sum() == 0:
            if partner not in index:
                raise UnknownLabel(f"fallback partner {partner!r} for {state} not in labels")
            m[i, index[partner]] = 1.0
    return normalize_rows(m, labels, "adjacency")


def link_matrix(scheme: WeightScheme, i: int) -> np.ndarray:
    """The 2 x N matrix mapping ``y`` to ``(y_i, sum_j w_ij y_j)``."""
    if not 0 <= i < scheme.N:
        raise IndexOutOfRange(f"unit {i} outside 0..{scheme.N - 1}")
    out = np.zeros((2, scheme.N))
    out[0, i] = 1.0
    out[1] = scheme.w[i]
    return out


def write_weights(scheme: WeightScheme, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["state", *scheme.labels])
        for s, row in zip(scheme.labels, scheme.w):
            w.writerow([s, *(repr(float(v)) for v in row)])


def read_weights(path: str | Path, name: str = "custom") -> WeightScheme:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    labels = tuple(rows[0][1:])
    if [r[0] for r in rows[1:]] != list(labels):
        raise UnknownLabel("row labels do not match the header")
    return WeightScheme(np.array([[float(v) for v in r[1:]] for r in rows[1:]]), labels, name)


def write_edge_list(scheme: WeightScheme, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "target", "weight"])
        for i, j in zip(*np.nonzero(scheme.w)):
            w.writerow([scheme.labels[i], scheme.labels[j], repr(float(scheme.w[i, j]))])
