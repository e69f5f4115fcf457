"""Numerics for the (1+1+3) threading of a five-dimensional Lorentzian metric.

Kinematic quantities, the adapted-frame Levi-Civita connection, threaded
equations of motion with a coordinate Christoffel oracle, and classification
of spatial, temporal and vertical geodesics.
"""

from .classify import (
    Box,
    ClassificationReport,
    autoparallel_residual,
    classify_curve,
    is_spatial_curve,
    killing_bundle_check,
    rw_critical_points,
    spatial_geodesic_residuals,
    temporal_geodesic,
    vertical_geodesic,
)
from .connection import bracket_coefficients, levi_civita_table, spatial_connection
from .errors import (
    ConfigError,
    DomainError,
    IntegrationError,
    MetricSignatureError,
    MissingFieldError,
    NumericalError,
    ParseError,
    SingularMetricError,
    ThreadingError,
    UnknownIdentifierError,
)
from .exprlang import JetValue, eval_jet, parse, unparse
from .geodesic import (
    AdaptedVelocity,
    GeodesicState,
    Trajectory,
    christoffel_full,
    integrate,
    integrate_oracle,
    rhs_adapted,
    to_adapted,
    to_natural,
)
from .kinematics import adapted_derivative, kinematic_sample, raise_index
from .metric import ThreadedMetric, adapted_norm, assemble_full_metric, build_metric, sample_fields

__version__ = "0.1.0"
