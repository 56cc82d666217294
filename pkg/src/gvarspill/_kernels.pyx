# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled VAR recursion kernels.

Both functions mirror :mod:`gvarspill._kernels_py` exactly; see there for the
contract.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def var_recursion(const double[:, :, ::1] F, const double[:, ::1] X, Py_ssize_t n_init):
    cdef Py_ssize_t p = F.shape[0]
    cdef Py_ssize_t n = F.shape[1]
    cdef Py_ssize_t T = X.shape[0]
    cdef Py_ssize_t t, l, i, j, s
    cdef double acc
    if F.shape[2] != n or X.shape[1] != n:
        raise ValueError("shape mismatch between F and X")
    out = np.array(X, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] Y = out
    for t in range(n_init, T):
        for l in range(p):
            s = t - l - 1
            if s < 0:
                break
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc = acc + F[l, i, j] * Y[s, j]
                Y[t, i] += acc
    return out


def var_recursion_batch(const double[:, :, ::1] F, const double[:, :, ::1] X, Py_ssize_t n_init):
    cdef Py_ssize_t p = F.shape[0]
    cdef Py_ssize_t n = F.shape[1]
    cdef Py_ssize_t R = X.shape[0]
    cdef Py_ssize_t T = X.shape[1]
    cdef Py_ssize_t r, t, l, i, j, s
    cdef double acc
    if F.shape[2] != n or X.shape[2] != n:
        raise ValueError("shape mismatch between F and X")
    out = np.array(X, dtype=np.float64, copy=True, order="C")
    cdef double[:, :, ::1] Y = out
    for r in range(R):
        for t in range(n_init, T):
            for l in range(p):
                s = t - l - 1
                if s < 0:
                    break
                for i in range(n):
                    acc = 0.0
                    for j in range(n):
                        acc = acc + F[l, i, j] * Y[r, s, j]
                    Y[r, t, i] += acc
    return out
