"""Bessel functions of the first kind via Miller's backward recurrence.

The integer-order J_n is the workhorse of the lifted dictionary: the angular
factor of every dictionary row is a run of J_0..J_L at fixed argument.  The
backward (Miller) recurrence produces the whole run at once and is stable for
all orders below the start order, unlike the forward recurrence.

Validated domain: ``|n| <= 10_000`` and ``|x| <= 10_000`` with absolute error
below 1e-10 (in practice ~1e-13).  Arguments outside raise ``ValueError``.
"""

import numpy as np

from .kernels import backend_name, miller_rows

MAX_ORDER = 10_000
MAX_ARGUMENT = 10_000.0

__all__ = [
    "MAX_ARGUMENT",
    "MAX_ORDER",
    "backend_name",
    "bessel_j",
    "bessel_j_sequence",
    "bessel_j_table",
]


def _check_range(nmax, x_abs_max):
    if nmax > MAX_ORDER:
        raise ValueError(f"Bessel order {nmax} outside validated range |n| <= {MAX_ORDER}")
    if x_abs_max > MAX_ARGUMENT:
        raise ValueError(
            f"Bessel argument magnitude {x_abs_max} outside validated range |x| <= {MAX_ARGUMENT}"
        )


def bessel_j_sequence(nmax, x):
    """``[J_0(x), J_1(x), ..., J_nmax(x)]`` as a 1-D array.

    ``x`` may be negative; J_n(-x) = (-1)^n J_n(x).
    """
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    _check_range(nmax, abs(x))
    row = miller_rows(int(nmax), np.array([abs(float(x))]))[0]
    if x < 0:
        row = row.copy()
        row[1::2] *= -1.0
    return row


def bessel_j_table(nmax, xs):
    """Rows of ``[J_0(x), ..., J_nmax(x)]`` for each x in ``xs``.

    Shape ``(len(xs), nmax + 1)``; negative arguments handled by parity.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    _check_range(nmax, float(np.max(np.abs(xs))) if xs.size else 0.0)
    table = miller_rows(int(nmax), np.abs(xs))
    neg = xs < 0
    if neg.any():
        table[np.ix_(neg, np.arange(1, nmax + 1, 2))] *= -1.0
    return table


def bessel_j(n, x):
    """J_n(x) for integer ``n`` (either sign) and real ``x``.

    Uses J_{-n}(x) = (-1)^n J_n(x) for negative orders.
    """
    n = int(n)
    order = abs(n)
    value = bessel_j_sequence(order, x)[order]
    if n < 0 and order % 2 == 1:
        value = -value
    return float(value)
