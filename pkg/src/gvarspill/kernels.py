"""Backend selection for the VAR recursion kernels.

The compiled extension is used when it imports; setting the environment
variable ``GVARSPILL_PURE_PYTHON=1`` forces the numpy fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("GVARSPILL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _kernels_py
        BACKEND = "python"

import numpy as np

# Above this many units a batched step is a (R, N) x (N, N) product that BLAS
# does faster than the compiled scalar loop.
BATCH_BLAS_MIN_N = 18


def var_recursion(F: np.ndarray, X: np.ndarray, n_init: int = 0) -> np.ndarray:
    """Run ``Y[t] = X[t] + sum_l F[l-1] Y[t-l]`` for ``t >= n_init``.

    Parameters
    ----------
    F : ndarray, shape (p, N, N)
        Lag coefficient matrices.
    X : ndarray, shape (T, N)
        Forcing terms; rows before ``n_init`` are copied through unchanged.
    n_init : int
        Number of leading rows treated as given initial conditions.
    """
    F = np.ascontiguousarray(F, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    if F.ndim != 3 or X.ndim != 2:
        raise ValueError("F must be (p, N, N) and X must be (T, N)")
    if F.shape[0] == 0:
        return X.copy()
    return _impl.var_recursion(F, X, int(n_init))


def var_recursion_batch(F: np.ndarray, X: np.ndarray, n_init: int = 0) -> np.ndarray:
    """Batched :func:`var_recursion` over a leading replication axis of ``X``.

    Large cross-sections go through the numpy kernel (see ``BATCH_BLAS_MIN_N``).
    """
    F = np.ascontiguousarray(F, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    if F.ndim != 3 or X.ndim != 3:
        raise ValueError("F must be (p, N, N) and X must be (R, T, N)")
    if F.shape[0] == 0:
        return X.copy()
    impl = _kernels_py if F.shape[1] >= BATCH_BLAS_MIN_N else _impl
    return impl.var_recursion_batch(F, X, int(n_init))
