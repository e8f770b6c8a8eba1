"""Near-field array super-resolution via a lifted Bessel dictionary.

Simulates spherical-wavefront channels observed through compressed pilots,
factors the range/angle nonlinearity into a distance matrix times a
Vandermonde-like angle vector, solves the dual demixing semidefinite program,
and recovers continuous-valued angles, ranges, and gains for radar targets
and communication scatterers.
"""

from .bessel import bessel_j, bessel_j_sequence, bessel_j_table
from .geometry import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    MeasurementSet,
    Source,
    exact_distance,
    exact_steering,
    farfield_steering,
    fresnel_steering,
    fresnel_steering_two_factor,
    synthesize_channel,
    synthesize_measurements,
)
from .lifting import (
    LiftedDictionary,
    TruncationOrders,
    distance_matrix,
    farfield_vector,
    gamma_matrix,
    lifted_steering,
    sigma_max_profile,
    truncation_orders,
)

__version__ = "0.1.0"
