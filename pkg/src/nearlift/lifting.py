"""Lifted factorization of the Fresnel steering vector.

The quadratic-phase response factors, per antenna n, into two plane-wave
exponentials, each of which expands into a Bessel-weighted Fourier series in
the angle.  Truncating both series at orders (I1, I2) gives

    a(theta, r)[n] ~= <vec(Gamma_n(r)), vec(V(theta))>   (plain bilinear sum)

with Gamma_n(r)[l, q] = exp(-j*k*n^2 d^2/(4r)) * j^(l+q) * J_l(k*n*d)
* J_q(k*n^2 d^2/(4r)), V(theta)[l, q] = exp(j*(l+2q)*theta), k = 2*pi/lam,
l in [-I1, I1], q in [-I2, I2].  Stacking the vectorized Gamma rows yields the
distance matrix C(r) and the factorization a(theta, r) ~= C(r) @ v(theta).

Vectorization is column-major with l varying fastest; the same traversal is
used for v(theta) and for every Gamma row.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_j_sequence, bessel_j_table

__all__ = [
    "LiftedDictionary",
    "TruncationOrders",
    "distance_matrix",
    "farfield_vector",
    "gamma_matrix",
    "lifted_steering",
    "sigma_max_profile",
    "truncation_orders",
]

_J_POWERS = np.array([1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j])


@dataclass(frozen=True)
class TruncationOrders:
    """Series truncation orders for the angular (I1) and range (I2) factors."""

    i1: int
    i2: int

    def __post_init__(self):
        if self.i1 < 0 or self.i2 < 0:
            raise ValueError("truncation orders must be nonnegative")

    @property
    def i1_prime(self):
        return 2 * self.i1 + 1

    @property
    def i2_prime(self):
        return 2 * self.i2 + 1

    @property
    def width(self):
        """Dimension of v(theta) and column count of C(r)."""
        return self.i1_prime * self.i2_prime

    def l_values(self):
        return np.arange(-self.i1, self.i1 + 1)

    def q_values(self):
        return np.arange(-self.i2, self.i2 + 1)

    def frequencies(self):
        """l + 2q per vectorized index (l fastest, column-major)."""
        l = self.l_values()
        q = self.q_values()
        return (l[:, None] + 2 * q[None, :]).flatten(order="F")


def _series_arguments(geom, r_min):
    n_top = geom.num_antennas - 1
    x1 = 2.0 * np.pi * n_top * geom.spacing / geom.wavelength
    x2 = 2.0 * np.pi * n_top**2 * geom.spacing**2 / (4.0 * r_min * geom.wavelength)
    return x1, x2


def _order_for_tail(x, tol):
    """Smallest order whose omitted tail 2*sum_{n>order} |J_n(x)| is <= tol."""
    if x == 0.0:
        return 0
    cap = int(math.ceil(math.e * x / 2.0)) + 40 + int(4.0 * math.sqrt(x + 1.0))
    js = np.abs(bessel_j_sequence(cap, x))
    tails = 2.0 * (np.cumsum(js[::-1])[::-1] - js)  # tails[k] = 2*sum_{n>k} |J_n|
    ok = np.nonzero(tails <= tol)[0]
    if ok.size == 0:
        raise ValueError(f"tail tolerance {tol} unreachable below order {cap}")
    return int(ok[0])


def truncation_orders(geom, r_min, tail_tol=None):
    """Truncation orders for a dictionary valid on distances >= ``r_min``.

    Default picks the decay onset of each Bessel series at its worst-case
    argument: I1 = ceil(e*pi*(N_r-1)*d/lam) and
    I2 = ceil(e*pi*(N_r-1)^2*d^2/(4*r_min*lam)).  These control the series
    tails only down to roughly the first omitted Bessel value, not to machine
    precision; pass ``tail_tol`` to instead select the smallest orders whose
    omitted tails are each below ``tail_tol / 2`` at the worst-case argument.
    """
    if r_min <= 0:
        raise ValueError("r_min must be positive")
    x1, x2 = _series_arguments(geom, r_min)
    if tail_tol is None:
        i1 = math.ceil(math.e * x1 / 2.0)
        i2 = math.ceil(math.e * x2 / 2.0)
    else:
        i1 = _order_for_tail(x1, tail_tol / 2.0)
        i2 = _order_for_tail(x2, tail_tol / 2.0)
    return TruncationOrders(i1=max(i1, 0), i2=max(i2, 0))


def farfield_vector(orders, theta):
    """vec of V(theta)[l, q] = exp(j*(l+2q)*theta); unit-modulus entries."""
    if not 0.0 < theta < np.pi:
        raise ValueError(f"angle {theta} outside open interval (0, pi)")
    return np.exp(1j * orders.frequencies() * theta)


def _signed_orders(js, count):
    """Extend [J_0 .. J_k] to [J_{-count} .. J_{count}] by parity."""
    pos = js[1 : count + 1]
    neg = pos[::-1] * (-1.0) ** np.arange(count, 0, -1)
    return np.concatenate([neg, js[:1], pos])


def gamma_matrix(geom, orders, r, n):
    """Per-antenna coefficient matrix of the lifted factorization.

    Shape (2*I1+1, 2*I2+1); row index l in [-I1, I1], column q in [-I2, I2].
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if not 0 <= n <= geom.num_antennas - 1:
        raise ValueError(f"antenna index {n} out of range")
    k = 2.0 * np.pi / geom.wavelength
    z1 = k * n * geom.spacing
    z2 = k * n**2 * geom.spacing**2 / (4.0 * r)
    jl = _signed_orders(bessel_j_sequence(orders.i1, z1), orders.i1)
    jq = _signed_orders(bessel_j_sequence(orders.i2, z2), orders.i2)
    lpq = orders.l_values()[:, None] + orders.q_values()[None, :]
    return np.exp(-1j * z2) * _J_POWERS[np.mod(lpq, 4)] * np.outer(jl, jq)


def distance_matrix(geom, orders, r):
    """C(r): vectorized Gamma rows stacked over antennas, shape N_r x W."""
    if r <= 0:
        raise ValueError("r must be positive")
    k = 2.0 * np.pi / geom.wavelength
    n = geom.antenna_indices().astype(float)
    z1 = k * n * geom.spacing
    z2 = k * n**2 * geom.spacing**2 / (4.0 * r)
    jl_tab = bessel_j_table(orders.i1, z1)
    jq_tab = bessel_j_table(orders.i2, z2)
    return _assemble_rows(orders, z2, jl_tab, jq_tab)


def _assemble_rows(orders, z2, jl_tab, jq_tab):
    lpq = orders.l_values()[:, None] + orders.q_values()[None, :]
    phase_tab = _J_POWERS[np.mod(lpq, 4)].flatten(order="F")
    rows = np.empty((jl_tab.shape[0], orders.width), dtype=complex)
    for i in range(jl_tab.shape[0]):
        jl = _signed_orders(jl_tab[i], orders.i1)
        jq = _signed_orders(jq_tab[i], orders.i2)
        rows[i] = np.outer(jl, jq).flatten(order="F")
    return np.exp(-1j * z2)[:, None] * phase_tab[None, :] * rows


def lifted_steering(dictionary, theta, r):
    """C(r) @ v(theta); approximates the Fresnel steering vector."""
    return dictionary.distance_matrix(r) @ dictionary.farfield_vector(theta)


@dataclass(frozen=True)
class LiftedDictionary:
    """Distance-matrix factory for a fixed geometry, order pair, and r-range.

    Immutable and shareable across threads; the angular Bessel table (which
    does not depend on r) is computed once at construction.
    """

    geom: object
    orders: TruncationOrders
    r_min: float
    r_max: float

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise ValueError("need 0 < r_min < r_max")
        k = 2.0 * np.pi / self.geom.wavelength
        n = self.geom.antenna_indices().astype(float)
        object.__setattr__(self, "_z1", k * n * self.geom.spacing)
        object.__setattr__(self, "_quad_coeff", k * n**2 * self.geom.spacing**2 / 4.0)
        object.__setattr__(self, "_jl_tab", bessel_j_table(self.orders.i1, self._z1))

    @classmethod
    def build(cls, geom, r_min, r_max, tail_tol=None):
        """Dictionary with orders selected at ``r_min`` (worst case in range)."""
        return cls(geom, truncation_orders(geom, r_min, tail_tol=tail_tol), r_min, r_max)

    @property
    def width(self):
        return self.orders.width

    def _check_r(self, r):
        if not self.r_min <= r <= self.r_max:
            raise ValueError(f"r={r} outside dictionary range [{self.r_min}, {self.r_max}]")

    def distance_matrix(self, r):
        self._check_r(r)
        z2 = self._quad_coeff / r
        jq_tab = bessel_j_table(self.orders.i2, z2)
        return _assemble_rows(self.orders, z2, self._jl_tab, jq_tab)

    def farfield_vector(self, theta):
        return farfield_vector(self.orders, theta)

    def steering(self, theta, r):
        return self.distance_matrix(r) @ self.farfield_vector(theta)


def sigma_max_profile(dictionary, r_grid):
    """Largest singular value of C(r) per grid point, as (r, sigma) pairs."""
    out = []
    for r in np.asarray(r_grid, dtype=float).ravel():
        c = dictionary.distance_matrix(r)
        out.append((float(r), float(np.linalg.svd(c, compute_uv=False)[0])))
    return out
