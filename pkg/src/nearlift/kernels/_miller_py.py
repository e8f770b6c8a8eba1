"""Pure-numpy Miller backward recurrence for Bessel functions of the first kind.

Mirrors the compiled extension in ``_miller.pyx``; selected as a fallback at
import time when the extension is unavailable.
"""

import numpy as np

# Exact power of two so renormalization is lossless.
_BIG = 2.0**832
_SCALE = 2.0**-832

BACKEND = "python"


def miller_start_order(nmax, xmax):
    """Start order for the backward recurrence.

    Far enough above both the largest requested order and the argument that
    the seed contamination decays below double precision by the time the
    oscillatory region is reached.
    """
    m0 = max(int(nmax), int(np.ceil(xmax)))
    return m0 + 30 + int(3.0 * np.sqrt(m0 + 1))


def miller_rows(nmax, xs):
    """J_0(x) .. J_nmax(x) for every x in ``xs`` (all entries >= 0).

    Returns an array of shape ``(len(xs), nmax + 1)``.
    """
    xs = np.asarray(xs, dtype=np.float64)
    out = np.zeros((xs.size, nmax + 1))
    zero = xs == 0.0
    if zero.all():
        out[:, 0] = 1.0
        return out
    x = np.where(zero, 1.0, xs)  # dummy argument, overwritten below

    m_start = miller_start_order(nmax, float(np.max(x)))
    jkp1 = np.zeros_like(x)
    jk = np.full_like(x, 2.0**-512)
    norm = np.zeros_like(x)
    for k in range(m_start, 0, -1):
        jkm1 = (2.0 * k / x) * jk - jkp1
        if k <= nmax:
            out[:, k] = jk
        if k % 2 == 0:
            norm += 2.0 * jk
        jkp1 = jk
        jk = jkm1
        big = np.abs(jk) > _BIG
        if big.any():
            jk[big] *= _SCALE
            jkp1[big] *= _SCALE
            norm[big] *= _SCALE
            out[big] *= _SCALE
    out[:, 0] = jk
    norm += jk
    out /= norm[:, None]
    if zero.any():
        out[zero] = 0.0
        out[zero, 0] = 1.0
    return out
