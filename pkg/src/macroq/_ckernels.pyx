# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: integer-order Bessel J and cosine-series evaluation.

The algorithms are identical to those in :mod:`macroq._pykernels`; only the
loop structure differs.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, cbrt, cos, exp, log, lgamma

cnp.import_array()

cdef double _SERIES_ZMAX = 1e-6
cdef double _RESCALE = 1e100
cdef double _SEED = 1e-30


cdef long start_order(long nu, double z) nogil:
    cdef double top = z if z > nu else <double>nu
    cdef long m = <long>(top + 30.0 + 25.0 * cbrt(0.5 * z))
    if m % 2:
        m += 1
    return m


cdef double small_arg_series(long nu, double z) nogil:
    cdef double q = -0.25 * z * z
    cdef double lead = exp(nu * log(0.5 * z) - lgamma(nu + 1.0))
    cdef double term = 1.0, total = 1.0
    cdef int k
    for k in range(1, 4):
        term *= q / (k * (nu + k))
        total += term
    return lead * total


cdef double jn_scalar(long nu, double z) nogil:
    cdef double sign = 1.0
    cdef long k, m
    cdef double jp1, jk, jm1, norm, value
    if nu < 0:
        nu = -nu
        if nu % 2:
            sign = -sign
    if z < 0:
        z = -z
        if nu % 2:
            sign = -sign
    if z == 0.0:
        return sign if nu == 0 else 0.0
    if z < _SERIES_ZMAX:
        return sign * small_arg_series(nu, z)

    m = start_order(nu, z)
    jp1 = 0.0
    jk = _SEED
    norm = 0.0
    value = 0.0
    k = m
    while k >= 1:
        if k == nu:
            value = jk
        if k % 2 == 0:
            norm += 2.0 * jk
        jm1 = (2.0 * k / z) * jk - jp1
        jp1 = jk
        jk = jm1
        if fabs(jk) > _RESCALE:
            jk /= _RESCALE
            jp1 /= _RESCALE
            norm /= _RESCALE
            value /= _RESCALE
        k -= 1
    if nu == 0:
        value = jk
    norm += jk
    return sign * value / norm


def besselj(orders, args):
    """Bessel J of integer order, elementwise over broadcast ``orders`` and ``args``."""
    o, a = np.broadcast_arrays(np.asarray(orders, dtype=np.int64), np.asarray(args, dtype=np.float64))
    shape = o.shape
    cdef cnp.int64_t[::1] ov = np.ascontiguousarray(o).ravel()
    cdef double[::1] av = np.ascontiguousarray(a).ravel()
    out = np.empty(ov.shape[0], dtype=np.float64)
    cdef double[::1] outv = out
    cdef Py_ssize_t i, n = ov.shape[0]
    with nogil:
        for i in range(n):
            outv[i] = jn_scalar(ov[i], av[i])
    return out.reshape(shape)


def cosine_series(coeffs, double k, x):
    """Evaluate ``c[0] + 2*sum_{n>=1} c[n]*cos(n*k*x)`` by Clenshaw recurrence."""
    cdef double[::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] xv = xa.ravel()
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] outv = out
    cdef Py_ssize_t i, j, n = xv.shape[0], nc = c.shape[0]
    cdef double ct, b1, b2, b0
    with nogil:
        for i in range(n):
            ct = cos(k * xv[i])
            b1 = 0.0
            b2 = 0.0
            j = nc - 1
            while j >= 1:
                b0 = 2.0 * c[j] + 2.0 * ct * b1 - b2
                b2 = b1
                b1 = b0
                j -= 1
            outv[i] = c[0] + ct * b1 - b2
    return out.reshape(xa.shape)
