import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gvarspill import _kernels_py, kernels

try:
    from gvarspill import _kernels
except ImportError:  # pragma: no cover
    _kernels = None

compiled = pytest.mark.skipif(_kernels is None, reason="extension not built")


def reference(F, X, n_init):
    Y = X.copy()
    p = len(F)
    for t in range(n_init, len(Y)):
        for l in range(1, p + 1):
            if t - l >= 0:
                Y[t] = Y[t] + F[l - 1] @ Y[t - l]
    return Y


@given(st.integers(0, 2**32 - 1), st.integers(0, 4), st.integers(1, 7), st.integers(0, 60), st.integers(0, 5))
def test_python_kernel_matches_loop(seed, p, n, T, n_init):
    rng = np.random.default_rng(seed)
    F = rng.normal(scale=0.3, size=(p, n, n))
    X = rng.normal(size=(T, n))
    np.testing.assert_allclose(kernels.var_recursion(F, X, n_init), reference(F, X, n_init), rtol=1e-12, atol=1e-12)


@compiled
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 30), st.integers(0, 60), st.integers(0, 5))
def test_backends_agree(seed, p, n, T, n_init):
    rng = np.random.default_rng(seed)
    F = rng.normal(scale=0.5 / np.sqrt(n * p), size=(p, n, n))
    X = rng.normal(size=(T, n))
    np.testing.assert_allclose(_kernels.var_recursion(F, X, n_init), _kernels_py.var_recursion(F, X, n_init),
                               rtol=1e-12, atol=1e-12)
    XB = rng.normal(size=(3, T, n))
    np.testing.assert_allclose(_kernels.var_recursion_batch(F, XB, n_init),
                               _kernels_py.var_recursion_batch(F, XB, n_init), rtol=1e-12, atol=1e-12)


def test_batch_equals_loop_over_replications():
    rng = np.random.default_rng(0)
    for n in (3, 25):
        F = rng.normal(scale=0.1, size=(2, n, n))
        X = rng.normal(size=(4, 50, n))
        out = kernels.var_recursion_batch(F, X, 2)
        for r in range(4):
            np.testing.assert_allclose(out[r], reference(F, X[r], 2), rtol=1e-12, atol=1e-12)


def test_zero_lags_and_shape_checks():
    X = np.arange(6.0).reshape(3, 2)
    out = kernels.var_recursion(np.zeros((0, 2, 2)), X)
    assert np.array_equal(out, X) and out is not X
    with pytest.raises(ValueError):
        kernels.var_recursion(np.zeros((1, 3, 3)), X)
    with pytest.raises(ValueError):
        kernels.var_recursion(np.zeros((3, 3)), X)
    with pytest.raises(ValueError):
        kernels.var_recursion_batch(np.zeros((1, 2, 2)), X)


def test_input_not_modified():
    rng = np.random.default_rng(1)
    F, X = rng.normal(size=(1, 3, 3)), rng.normal(size=(10, 3))
    keep = X.copy()
    kernels.var_recursion(F, X, 1)
    assert np.array_equal(X, keep)


def test_env_var_forces_python_backend():
    code = "from gvarspill import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, GVARSPILL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    if _kernels is not None:
        env["GVARSPILL_PURE_PYTHON"] = "0"
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "cython"
