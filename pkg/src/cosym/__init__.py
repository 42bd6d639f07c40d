"""Numerical cosymplectic geometry: structures, moment-map reduction through
local slices, cone and mapping-torus constructions, and time-dependent
Hamiltonian flows."""

from .geometry import (
    Chart,
    ChartMismatchError,
    DegenerateMetricError,
    DomainError,
    EndoField,
    KForm,
    MetricField,
    ScalarField,
    SmoothMap,
    VectorField,
    christoffel,
    covariant_derivative_endo,
    exterior_derivative,
    lie_bracket,
)
from .report import CheckResult, ComparisonReport, Tolerances, VerificationReport
from .structures import (
    AlmostContactMetric,
    AlmostCosymplectic,
    HyperKahlerStructure,
    KahlerStructure,
    ThreeCosymplectic,
    hamiltonian_vector,
    reeb_vector,
    verify,
    verify_3cosymplectic,
    verify_cokahler,
    verify_cosymplectic,
    verify_hyperkahler,
    verify_kahler,
)
from .actions import GroupAction, MatrixLieGroup, MomentMapData, TripleMomentMap, verify_moment_map
from .reduction import ReductionDatum, certify, reduce
from .dynamics import (
    FlowResult,
    RigidBodyParams,
    TimeDependentSystem,
    cosymplectize,
    evolution_flow,
    geodesic_defect,
    rigid_body_scenario,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
