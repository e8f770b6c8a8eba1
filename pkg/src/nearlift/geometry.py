"""Near-field uniform-linear-array geometry, steering vectors, and measurements.

Conventions used throughout the package:

* antennas are indexed n = 0 .. N_r - 1 with antenna 0 the phase reference,
  positioned at (n*d, 0) on the array axis;
* a source at angle ``theta`` (radians, measured from the array axis, open
  interval (0, pi)) and range ``r`` (meters, from the reference antenna) sits
  at (r*cos(theta), r*sin(theta));
* steering phases follow exp(-j*(2*pi/wavelength)*(r_n - r)) where r_n is the
  exact source-to-antenna-n distance, so entry 0 is exactly 1.
"""

from dataclasses import dataclass, replace

import numpy as np

SPEED_OF_LIGHT = 3.0e8  # m/s

__all__ = [
    "SPEED_OF_LIGHT",
    "ArrayGeometry",
    "Source",
    "MeasurementSet",
    "aperture_rayleigh_distance",
    "exact_distance",
    "exact_steering",
    "farfield_steering",
    "fresnel_steering",
    "fresnel_steering_two_factor",
    "synthesize_channel",
    "synthesize_measurements",
]


def aperture_rayleigh_distance(aperture, wavelength):
    """Near/far-field boundary 2*D^2/wavelength for an aperture D."""
    return 2.0 * aperture**2 / wavelength


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: antenna count, spacing, carrier frequency.

    ``spacing`` defaults to half the carrier wavelength when constructed via
    :meth:`half_wavelength`.
    """

    num_antennas: int
    spacing: float  # meters
    carrier_freq: float  # Hz

    def __post_init__(self):
        if self.num_antennas < 2:
            raise ValueError("num_antennas must be >= 2")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.carrier_freq <= 0:
            raise ValueError("carrier_freq must be positive")

    @classmethod
    def half_wavelength(cls, num_antennas, carrier_freq):
        wavelength = SPEED_OF_LIGHT / carrier_freq
        return cls(num_antennas, wavelength / 2.0, carrier_freq)

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def aperture(self):
        return (self.num_antennas - 1) * self.spacing

    def rayleigh_distance(self):
        """2*D^2/wavelength, the spherical/planar wavefront boundary."""
        return aperture_rayleigh_distance(self.aperture, self.wavelength)

    def antenna_indices(self):
        return np.arange(self.num_antennas)


def _check_source_params(theta, r):
    if not 0.0 < theta < np.pi:
        raise ValueError(f"angle {theta} outside open interval (0, pi)")
    if r <= 0.0:
        raise ValueError(f"distance {r} must be positive")


@dataclass(frozen=True)
class Source:
    """One radar target or communication scatterer."""

    role: str  # "radar" | "comm"
    gain: complex
    angle: float  # radians, in (0, pi)
    distance: float  # meters, > 0

    def __post_init__(self):
        if self.role not in ("radar", "comm"):
            raise ValueError(f"role must be 'radar' or 'comm', got {self.role!r}")
        _check_source_params(self.angle, self.distance)

    def with_gain(self, gain):
        return replace(self, gain=gain)


def exact_distance(geom, r, theta, n):
    """Distance from a source at (theta, r) to antenna ``n``.

    sqrt(r^2 + n^2 d^2 - 2 r n d cos(theta)); n = 0 returns r exactly.
    """
    if r <= 0.0:
        raise ValueError(f"distance {r} must be positive")
    if not 0 <= n <= geom.num_antennas - 1:
        raise ValueError(f"antenna index {n} out of range 0..{geom.num_antennas - 1}")
    nd = n * geom.spacing
    return float(np.sqrt(r * r + nd * nd - 2.0 * r * nd * np.cos(theta)))


def exact_steering(geom, theta, r):
    """Spherical-wavefront array response; unit-modulus, entry 0 == 1."""
    _check_source_params(theta, r)
    nd = geom.antenna_indices() * geom.spacing
    rn = np.sqrt(r * r + nd * nd - 2.0 * r * nd * np.cos(theta))
    return np.exp(-2j * np.pi / geom.wavelength * (rn - r))


def fresnel_steering(geom, theta, r):
    """Quadratic (Fresnel) approximation of :func:`exact_steering`.

    Entry n is exp(+j*(2*pi/lam)*(n*d*cos(theta) - n^2 d^2 sin^2(theta)/(2r))),
    obtained by keeping the first three terms of the distance expansion.
    """
    _check_source_params(theta, r)
    nd = geom.antenna_indices() * geom.spacing
    phase = nd * np.cos(theta) - nd**2 * np.sin(theta) ** 2 / (2.0 * r)
    return np.exp(2j * np.pi / geom.wavelength * phase)


def fresnel_steering_two_factor(geom, theta, r):
    """Product form of the Fresnel response used for cross-checking.

    exp(-j*k*n^2 d^2/(4r)) * exp(-j*k*(-n*d*cos(theta) - n^2 d^2 cos(2*theta)/(4r)))
    with k = 2*pi/lam; identical to :func:`fresnel_steering` through
    sin^2(theta) = (1 - cos(2*theta))/2.
    """
    _check_source_params(theta, r)
    k = 2.0 * np.pi / geom.wavelength
    nd = geom.antenna_indices() * geom.spacing
    quad = nd**2 / (4.0 * r)
    return np.exp(-1j * k * quad) * np.exp(-1j * k * (-nd * np.cos(theta) - quad * np.cos(2.0 * theta)))


def farfield_steering(geom, theta):
    """Planar-wavefront limit exp(+j*2*pi*n*d*cos(theta)/lam)."""
    if not 0.0 < theta < np.pi:
        raise ValueError(f"angle {theta} outside open interval (0, pi)")
    nd = geom.antenna_indices() * geom.spacing
    return np.exp(2j * np.pi / geom.wavelength * nd * np.cos(theta))


def synthesize_channel(geom, sources):
    """Sum of gain-weighted exact steering vectors for a single role."""
    sources = list(sources)
    if not sources:
        raise ValueError("source list must be nonempty")
    roles = {s.role for s in sources}
    if len(roles) > 1:
        raise ValueError(f"mixed roles in channel synthesis: {sorted(roles)}")
    h = np.zeros(geom.num_antennas, dtype=complex)
    for s in sources:
        h += s.gain * exact_steering(geom, s.angle, s.distance)
    return h


@dataclass(frozen=True)
class MeasurementSet:
    """Compressed snapshot y = A_C h_C + A_R h_R + noise with a noise bound."""

    y: np.ndarray
    pilot_comm: np.ndarray  # m x N_r
    pilot_radar: np.ndarray  # m x N_r
    noise_bound: float = 0.0

    def __post_init__(self):
        m = self.y.shape[0]
        if self.pilot_comm.shape[0] != m or self.pilot_radar.shape[0] != m:
            raise ValueError("pilot matrices must have as many rows as y")
        if self.pilot_comm.shape[1] != self.pilot_radar.shape[1]:
            raise ValueError("pilot matrices must share the antenna dimension")
        if self.noise_bound < 0:
            raise ValueError("noise_bound must be nonnegative")

    @property
    def num_samples(self):
        return self.y.shape[0]

    @property
    def num_antennas(self):
        return self.pilot_comm.shape[1]


# Feasibility margin on the noise bound when the simulator knows the drawn
# noise vector exactly.
NOISE_BOUND_MARGIN = 1e-6


def synthesize_measurements(geom, comm_sources, radar_sources, pilot_comm, pilot_radar,
                            noise_std=0.0, rng=None):
    """Draw noisy compressed measurements of the two superimposed channels.

    Noise is circularly-symmetric complex Gaussian with per-component variance
    ``noise_std**2``; the stored noise bound is ||noise||_2 * (1 + 1e-6), zero
    in the noiseless case.  Deterministic for a fixed seed.
    """
    pilot_comm = np.asarray(pilot_comm, dtype=complex)
    pilot_radar = np.asarray(pilot_radar, dtype=complex)
    if pilot_comm.shape[1] != geom.num_antennas or pilot_radar.shape[1] != geom.num_antennas:
        raise ValueError("pilot matrices must have N_r columns")
    if pilot_comm.shape[0] != pilot_radar.shape[0]:
        raise ValueError("pilot matrices must have the same number of rows")
    if noise_std < 0:
        raise ValueError("noise_std must be nonnegative")

    h_comm = synthesize_channel(geom, comm_sources)
    h_radar = synthesize_channel(geom, radar_sources)
    y = pilot_comm @ h_comm + pilot_radar @ h_radar
    eta = 0.0
    if noise_std > 0:
        rng = np.random.default_rng(rng)
        m = pilot_comm.shape[0]
        noise = noise_std / np.sqrt(2.0) * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
        y = y + noise
        eta = float(np.linalg.norm(noise)) * (1.0 + NOISE_BOUND_MARGIN)
    return MeasurementSet(y=y, pilot_comm=pilot_comm, pilot_radar=pilot_radar, noise_bound=eta)
