# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_kernels_py``.

Same signatures and semantics; results agree with the numpy fallback to
rounding (summation order differs).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, M_PI

cnp.import_array()

cdef extern from "complex.h":
    double complex cexp(double complex)

cdef int TAYLOR_TERMS = 40


def airy_table_eval(x, double x_first, double h, double[::1] node_ai, double[::1] node_aip):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t n = xv.shape[0], i, k
    cdef Py_ssize_t nnodes = node_ai.shape[0]
    cdef long idx
    cdef double xc, t, tp, a_m3, a_m2, a_m1, a_n, ai, aip
    out_ai = np.empty(n, dtype=np.float64)
    out_aip = np.empty(n, dtype=np.float64)
    cdef double[::1] oa = out_ai
    cdef double[::1] ob = out_aip
    for i in range(n):
        idx = <long>((xv[i] - x_first) / h + 0.5) if xv[i] >= x_first else 0
        if idx < 0:
            idx = 0
        if idx > nnodes - 1:
            idx = nnodes - 1
        xc = x_first + idx * h
        t = xv[i] - xc
        a_m3 = 0.0
        a_m2 = node_ai[idx]
        a_m1 = node_aip[idx]
        ai = a_m2 + a_m1 * t
        aip = a_m1
        tp = t
        for k in range(2, TAYLOR_TERMS):
            a_n = (xc * a_m2 + a_m3) / (k * (k - 1))
            aip += k * a_n * tp
            tp *= t
            ai += a_n * tp
            a_m3 = a_m2
            a_m2 = a_m1
            a_m1 = a_n
        oa[i] = ai
        ob[i] = aip
    shape = np.shape(x)
    return out_ai.reshape(shape), out_aip.reshape(shape)


def airy_kernel_matrix(u, ai, aip, double h0):
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(ai, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(aip, dtype=np.float64)
    cdef Py_ssize_t n = uv.shape[0], i, j
    cdef double d, val
    K = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] Kv = K
    for i in range(n):
        Kv[i, i] = bv[i] * bv[i] - uv[i] * av[i] * av[i]
        for j in range(i + 1, n):
            d = uv[i] - uv[j]
            if fabs(d) <= h0:
                val = bv[i] * bv[j] - 0.5 * (uv[i] + uv[j]) * av[i] * av[j]
            else:
                val = (av[i] * bv[j] - bv[i] * av[j]) / d
            Kv[i, j] = val
            Kv[j, i] = val
    return K


def theta_sum_real(weights, vecs, z):
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef long long[:, ::1] v = np.ascontiguousarray(vecs, dtype=np.int64)
    cdef double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t m = v.shape[0], g = v.shape[1], k, j
    cdef double acc = 0.0, dot
    for k in range(m):
        dot = 0.0
        for j in range(g):
            dot += v[k, j] * zv[j]
        acc += w[k] * cos(2.0 * M_PI * dot)
    return acc


def theta_pair_sum(coef, vecs, z, bint odd):
    cdef double complex[::1] c = np.ascontiguousarray(coef, dtype=np.complex128)
    cdef long long[:, ::1] v = np.ascontiguousarray(vecs, dtype=np.int64)
    cdef double complex[::1] zv = np.ascontiguousarray(z, dtype=np.complex128)
    cdef Py_ssize_t m = v.shape[0], g = v.shape[1], k, j
    cdef double complex acc = 0.0, dot, e, f
    cdef double complex I = 1j
    for k in range(m):
        dot = 0.0
        for j in range(g):
            dot = dot + v[k, j] * zv[j]
        dot = 2.0 * M_PI * dot
        # cos and i*sin of a complex argument via exponentials
        e = cexp(I * dot)
        f = cexp(-I * dot)
        if odd:
            acc = acc + c[k] * 0.5 * (e - f)
        else:
            acc = acc + c[k] * 0.5 * (e + f)
    return complex(acc)

