"""Pure-numpy VAR recursion, used when the compiled extension is unavailable.

Both kernels run the recursion

    Y[t] = X[t] + sum_{l=1..p} F[l-1] @ Y[t-l]        for t >= n_init

with ``Y[t] = X[t]`` for ``t < n_init`` and lags before the start of the
sample treated as zero. Impulse responses use ``n_init=0`` with the impact
vector in ``X[0]``; simulation passes initial observations in the first
``n_init`` rows of ``X`` and ``c + Lambda s_t + eps_t`` in the rest.
"""

from __future__ import annotations

import numpy as np


def var_recursion(F: np.ndarray, X: np.ndarray, n_init: int) -> np.ndarray:
    F = np.ascontiguousarray(F, dtype=float)
    Y = np.array(X, dtype=float, copy=True)
    p = F.shape[0]
    if F.shape[1:] != (Y.shape[1], Y.shape[1]):
        raise ValueError("shape mismatch between F and X")
    for t in range(n_init, Y.shape[0]):
        for lag in range(1, min(p, t) + 1):
            Y[t] += F[lag - 1] @ Y[t - lag]
    return Y


def var_recursion_batch(F: np.ndarray, X: np.ndarray, n_init: int) -> np.ndarray:
    F = np.ascontiguousarray(F, dtype=float)
    Y = np.array(X, dtype=float, copy=True)
    p = F.shape[0]
    if F.shape[1:] != (Y.shape[2], Y.shape[2]):
        raise ValueError("shape mismatch between F and X")
    for t in range(n_init, Y.shape[1]):
        for lag in range(1, min(p, t) + 1):
            Y[:, t] += Y[:, t - lag] @ F[lag - 1].T
    return Y
