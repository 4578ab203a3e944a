# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tape interpreter. Mirrors ``_tape_py`` exactly."""

from libc.math cimport sin, cos, exp, log, sqrt, pow, NAN, INFINITY


cdef inline void _run(const int[::1] op, const int[::1] a, const int[::1] b,
                      const double[::1] c, const double[::1] x,
                      double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, m = op.shape[0]
    cdef int o
    cdef double v
    for i in range(m):
        o = op[i]
        if o == 0:
            out[i] = c[i]
        elif o == 1:
            out[i] = x[a[i]]
        elif o == 2:
            out[i] = out[a[i]] + out[b[i]]
        elif o == 3:
            out[i] = out[a[i]] * out[b[i]]
        elif o == 4:
            v = out[a[i]]
            if v == 0.0 and b[i] < 0:
                out[i] = INFINITY
            else:
                out[i] = pow(v, <double>b[i])
        elif o == 5:
            out[i] = sin(out[a[i]])
        elif o == 6:
            out[i] = cos(out[a[i]])
        elif o == 7:
            out[i] = exp(out[a[i]])
        elif o == 8:
            v = out[a[i]]
            if v > 0.0:
                out[i] = log(v)
            elif v == 0.0:
                out[i] = -INFINITY
            else:
                out[i] = NAN
        else:
            v = out[a[i]]
            out[i] = sqrt(v) if v >= 0.0 else NAN


def eval_tape(const int[::1] op, const int[::1] a, const int[::1] b,
              const double[::1] c, const double[::1] x, double[::1] out,
              const int[::1] roots, double[::1] res):
    cdef Py_ssize_t j
    with nogil:
        _run(op, a, b, c, x, out)
        for j in range(roots.shape[0]):
            res[j] = out[roots[j]]


def eval_tape_batch(const int[::1] op, const int[::1] a, const int[::1] b,
                    const double[::1] c, const double[:, ::1] X,
                    const int[::1] roots, double[:, ::1] res):
    import numpy as np
    cdef double[::1] out = np.empty(op.shape[0], dtype=np.float64)
    cdef Py_ssize_t p, j
    with nogil:
        for p in range(X.shape[0]):
            _run(op, a, b, c, X[p], out)
            for j in range(roots.shape[0]):
                res[p, j] = out[roots[j]]
