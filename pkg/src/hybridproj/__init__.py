"""Parallel hybrid projection solver.

Finds the point of a common solution set F nearest to an anchor x0. F joins
equilibrium problems and variational inequalities with the fixed points of
nonexpansive maps.
"""
from ._jit import backend_name
from .engine import SolveResult, Status, TraceRecord, solve, terminal_residuals
from .halfspaces import (
    InfeasibleIntersectionError,
    KktSolution,
    bisector_halfspace,
    kkt_certified,
    monotonicity_halfspace,
    project_intersection,
    project_two,
)
from .operators import (
    AffineContraction,
    AffineMonotone,
    CertificationError,
    ConvexDifference,
    IdentityMap,
    LinearMonotone,
    PlaneRotation,
    ProjectionOnto,
    ResidualOfNonexpansive,
    ResolventConfig,
    ResolventNonConvergence,
    ZeroBifunction,
    ZeroOperator,
    resolvent,
)
from .problem import (
    ConstantSchedule,
    HarmonicSchedule,
    ParameterError,
    ProblemInstance,
    SolverParams,
    Variant,
)
from .sets import AffineSubspace, Ball, Box, EmptySetError, HalfSpace, WholeSpace

__version__ = "0.1.0"

__all__ = [
    "AffineContraction",
    "AffineMonotone",
    "AffineSubspace",
    "Ball",
    "Box",
    "CertificationError",
    "ConstantSchedule",
    "ConvexDifference",
    "EmptySetError",
    "HalfSpace",
    "HarmonicSchedule",
    "IdentityMap",
    "InfeasibleIntersectionError",
    "KktSolution",
    "LinearMonotone",
    "ParameterError",
    "PlaneRotation",
    "ProblemInstance",
    "ProjectionOnto",
    "ResidualOfNonexpansive",
    "ResolventConfig",
    "ResolventNonConvergence",
    "SolveResult",
    "SolverParams",
    "Status",
    "TraceRecord",
    "Variant",
    "WholeSpace",
    "ZeroBifunction",
    "ZeroOperator",
    "backend_name",
    "bisector_halfspace",
    "kkt_certified",
    "monotonicity_halfspace",
    "project_intersection",
    "project_two",
    "resolvent",
    "solve",
    "terminal_residuals",
]
