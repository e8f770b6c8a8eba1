# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Miller backward recurrence for Bessel functions of the first kind.

Hot kernel of the lifted-dictionary construction: every distance-matrix row
needs two runs of J_0..J_n at fixed argument, and grid sweeps repeat that per
grid point.  Same algorithm as ``_miller_py``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, fabs, sqrt

cnp.import_array()

cdef double _BIG = 2.0**832
cdef double _SCALE = 2.0**-832

BACKEND = "compiled"


def miller_start_order(nmax, xmax):
    cdef long m0 = max(<long> nmax, <long> ceil(xmax))
    return m0 + 30 + <long> (3.0 * sqrt(m0 + 1.0))


def miller_rows(long nmax, cnp.ndarray[cnp.float64_t, ndim=1] xs):
    """J_0(x) .. J_nmax(x) for every x in ``xs`` (all entries >= 0).

    Returns an array of shape ``(len(xs), nmax + 1)``.
    """
    cdef Py_ssize_t nx = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((nx, nmax + 1))
    cdef double[:, ::1] o = out
    cdef double[::1] xv = xs
    cdef Py_ssize_t i, c
    cdef long k, m_start
    cdef double x, jk, jkp1, jkm1, norm

    for i in range(nx):
        x = xv[i]
        if x == 0.0:
            o[i, 0] = 1.0
            continue
        m_start = miller_start_order(nmax, x)
        jkp1 = 0.0
        jk = 2.0**-512
        norm = 0.0
        for k in range(m_start, 0, -1):
            jkm1 = (2.0 * k / x) * jk - jkp1
            if k <= nmax:
                o[i, k] = jk
            if k % 2 == 0:
                norm += 2.0 * jk
            jkp1 = jk
            jk = jkm1
            if fabs(jk) > _BIG:
                jk *= _SCALE
                jkp1 *= _SCALE
                norm *= _SCALE
                for c in range(k, nmax + 1):
                    o[i, c] *= _SCALE
        o[i, 0] = jk
        norm += jk
        for c in range(nmax + 1):
            o[i, c] /= norm
    return out
