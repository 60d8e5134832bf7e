"""Pure-numpy implementations of the hot loops.

Used when the compiled extension is unavailable, and as the reference the
compiled kernels are benchmarked and tested against.
"""
from math import lgamma

import numpy as np

_SERIES_ZMAX = 1e-6
_RESCALE = 1e100
_SEED = 1e-30


def _start_order(nu, z):
    m = (np.maximum(z, nu) + 30.0 + 25.0 * np.cbrt(0.5 * z)).astype(np.int64)
    return m + (m % 2)


def _small_arg_series(nu, z):
    q = -0.25 * z * z
    lead = np.exp(nu * np.log(0.5 * z) - np.array([lgamma(v + 1.0) for v in nu]))
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, 4):
        term = term * q / (k * (nu + k))
        total = total + term
    return lead * total


def _miller(nu, z):
    """Downward recurrence normalised by J_0 + 2*sum J_2k = 1, all pairs in lockstep.

    Every pair runs the same loop from the largest start order; a pair stays
    identically zero until its own start order is reached, where it is seeded.
    """
    start = _start_order(nu, z)
    jp1 = np.zeros_like(z)
    jk = np.zeros_like(z)
    norm = np.zeros_like(z)
    value = np.zeros_like(z)
    for k in range(int(start.max()), 0, -1):
        seed = start == k
        if seed.any():
            jk[seed] = _SEED
            jp1[seed] = 0.0
        hit = nu == k
        if hit.any():
            value[hit] = jk[hit]
        if k % 2 == 0:
            norm += 2.0 * jk
        jm1 = (2.0 * k / z) * jk - jp1
        jp1 = jk
        jk = jm1
        big = np.abs(jk) > _RESCALE
        if big.any():
            jk[big] /= _RESCALE
            jp1[big] /= _RESCALE
            norm[big] /= _RESCALE
            value[big] /= _RESCALE
    zero = nu == 0
    value[zero] = jk[zero]
    norm += jk
    return value / norm


def besselj(orders, args):
    """Bessel J of integer order, elementwise over broadcast ``orders`` and ``args``."""
    o, a = np.broadcast_arrays(np.asarray(orders, dtype=np.int64), np.asarray(args, dtype=np.float64))
    shape = o.shape
    nu = o.ravel().copy()
    z = a.ravel().copy()
    sign = np.ones(z.shape)
    neg = nu < 0
    nu[neg] = -nu[neg]
    sign[neg & (nu % 2 == 1)] *= -1.0
    negz = z < 0
    z[negz] = -z[negz]
    sign[negz & (nu % 2 == 1)] *= -1.0

    out = np.zeros(z.shape)
    at_zero = z == 0.0
    out[at_zero & (nu == 0)] = 1.0
    small = (~at_zero) & (z < _SERIES_ZMAX)
    if small.any():
        out[small] = _small_arg_series(nu[small], z[small])
    rest = z >= _SERIES_ZMAX
    if rest.any():
        out[rest] = _miller(nu[rest], z[rest])
    return (sign * out).reshape(shape)


def cosine_series(coeffs, k, x):
    """Evaluate ``c[0] + 2*sum_{n>=1} c[n]*cos(n*k*x)`` by Clenshaw recurrence."""
    c = np.asarray(coeffs, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    ct = np.cos(k * x)
    b1 = np.zeros_like(ct)
    b2 = np.zeros_like(ct)
    for j in range(len(c) - 1, 0, -1):
        b1, b2 = 2.0 * c[j] + 2.0 * ct * b1 - b2, b1
    return c[0] + ct * b1 - b2
