"""Constructed problems whose limit point P_F x0 is known in closed form.

Used by ``hybridproj verify --suite solver``, the benchmark and the tests.
"""
from dataclasses import dataclass

import numpy as np

from .operators import (
    AffineContraction,
    ConvexDifference,
    IdentityMap,
    LinearMonotone,
    PlaneRotation,
    ProjectionOnto,
    ResidualOfNonexpansive,
    ZeroBifunction,
)
from .problem import ConstantSchedule, ProblemInstance, SolverParams, Variant
from .sets import AffineSubspace, Ball, Box, HalfSpace, WholeSpace


@dataclass(eq=False)
class RegressionCase:
    name: str
    problem: ProblemInstance
    params: SolverParams
    expected: np.ndarray


def shrink_1d():
    """S = 0 on the real line, x0 = 1: the iterates are 2**-n."""
    prob = ProblemInstance(
        dim=1,
        feasible_set=WholeSpace(1),
        x0=[1.0],
        maps=[AffineContraction([[0.0]], [0.0])],
        witness=[0.0],
        name="shrink_1d",
    )
    params = SolverParams(variant=Variant.MAIN, alpha=ConstantSchedule(0.0))
    return RegressionCase("shrink_1d", prob, params, np.array([0.0]))


def box_edge_2d():
    """F = [-1, 0]^2 as the common fixed points of two slab projections."""
    slab_x = Box([-1.0, -10.0], [0.0, 10.0])
    slab_y = Box([-10.0, -1.0], [10.0, 0.0])
    prob = ProblemInstance(
        dim=2,
        feasible_set=WholeSpace(2),
        x0=[1.0, -0.5],
        maps=[ProjectionOnto(slab_x), ProjectionOnto(slab_y)],
        witness=[-0.5, -0.5],
        name="box_edge_2d",
    )
    return RegressionCase("box_edge_2d", prob, SolverParams(), np.array([0.0, -0.5]))


def two_balls_2d(alpha=0.5):
    """Fixed points of two overlapping ball projections, x0 outside both.

    P_F x0 lies on the arc of the second circle inside the first ball, so it
    equals the radial projection onto the second ball. x0 sits closer to F
    than the circle radius, which keeps tangential roundoff from growing.
    """
    c2 = np.array([1.0, 0.0])
    w = np.array([-np.cos(np.radians(55.0)), np.sin(np.radians(55.0))])
    x0 = c2 + 1.6 * w
    prob = ProblemInstance(
        dim=2,
        feasible_set=WholeSpace(2),
        x0=x0,
        maps=[ProjectionOnto(Ball([0.0, 0.0], 1.0)), ProjectionOnto(Ball(c2, 1.0))],
        witness=[0.5, 0.0],
        name="two_balls_2d",
    )
    params = SolverParams(variant=Variant.FIXEDPOINT, alpha=ConstantSchedule(alpha))
    name = "two_balls_2d" if alpha == 0.5 else f"two_balls_2d_alpha{alpha:g}"
    return RegressionCase(name, prob, params, c2 + w)


def ball_vi_2d():
    """VI of I - P_B(0, 1/2) on the unit ball; F is the small ball."""
    inner = ProjectionOnto(Ball([0.0, 0.0], 0.5))
    prob = ProblemInstance(
        dim=2,
        feasible_set=Ball([0.0, 0.0], 1.0),
        x0=[2.0, 0.0],
        ism_ops=[ResidualOfNonexpansive(inner)],
        maps=[IdentityMap(2)],
        witness=[0.1, -0.2],
        name="ball_vi_2d",
    )
    return RegressionCase("ball_vi_2d", prob, SolverParams(variant=Variant.ALG34), np.array([0.5, 0.0]))


def mixed_segment_3d():
    """Two bifunctions, two operators and two maps sharing a segment.

    Every family member keeps the line ``c + t e0`` (the bifunctions and the
    rotation fix exactly that line); the operator and map constraints cut it
    to first coordinate in [-0.3, 0.45]. x0 projects into the segment's interior.
    """
    c = np.array([0.2, -0.1, 0.3])
    P1 = np.array([[0.0, 0.0, 0.0], [0.0, 2.0, 1.0], [0.0, -1.0, 1.0]])
    Q2 = np.diag([0.0, 1.0, 3.0])
    C = Box([-2.0] * 3, [2.0] * 3)
    prob = ProblemInstance(
        dim=3,
        feasible_set=C,
        x0=[0.1, 1.0, -1.0],
        bifunctions=[LinearMonotone(P1, -P1 @ c), ConvexDifference(Q2, -Q2 @ c)],
        ism_ops=[
            ResidualOfNonexpansive(ProjectionOnto(Ball(c, 0.5))),
            ResidualOfNonexpansive(ProjectionOnto(HalfSpace([1.0, 0.0, 0.0], 0.45))),
        ],
        maps=[
            PlaneRotation(3, 1.0, (1, 2), c),
            ProjectionOnto(Box([-0.3, -2.0, -2.0], [2.0, 2.0, 2.0])),
        ],
        witness=[0.0, -0.1, 0.3],
        name="mixed_segment_3d",
    )
    return RegressionCase("mixed_segment_3d", prob, SolverParams(), np.array([0.1, -0.1, 0.3]))


def ball_cap_10d():
    """Zero bifunction, a half-space residual and a ball projection in R^10.

    F is a ball cut by a half-space; x0 is placed so that only the ball
    constraint is active at P_F x0.
    """
    rng = np.random.default_rng(11)
    c = rng.uniform(-0.5, 0.5, 10)
    v = rng.standard_normal(10)
    v[0] = -abs(v[0])
    x0 = c + 1.8 * v / np.linalg.norm(v)
    prob = ProblemInstance(
        dim=10,
        feasible_set=Ball(np.zeros(10), 4.0),
        x0=x0,
        bifunctions=[ZeroBifunction(10)],
        ism_ops=[ResidualOfNonexpansive(ProjectionOnto(HalfSpace(np.eye(10)[0], c[0] + 0.5)))],
        maps=[ProjectionOnto(Ball(c, 1.0))],
        witness=c,
        name="ball_cap_10d",
    )
    return RegressionCase("ball_cap_10d", prob, SolverParams(), c + (x0 - c) / np.linalg.norm(x0 - c))


def linear_system(dim=6, rows=3, seed=3):
    """A consistent system ``G x = beta`` with orthonormal rows.

    Returns ``(op, G, beta)`` where ``op = I - P_V`` for the solution set V,
    i.e. ``op(x) = G.T (G x - beta)``, which is 1/2-inverse strongly monotone.
    """
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    G = Q[:, :rows].T.copy()
    beta = rng.uniform(-1.0, 1.0, rows)
    V = AffineSubspace(G.T @ beta, Q[:, rows:].T)
    return ResidualOfNonexpansive(ProjectionOnto(V)), G, beta


def minnorm_6d():
    """x0-nearest solution of a consistent linear system."""
    op, G, beta = linear_system()
    x0 = np.random.default_rng(5).uniform(-1.0, 1.0, 6)
    nearest = x0 - G.T @ (G @ x0 - beta)
    prob = ProblemInstance(
        dim=6,
        feasible_set=WholeSpace(6),
        x0=x0,
        ism_ops=[op],
        witness=nearest,
        name="minnorm_6d",
    )
    # the residual decays sublinearly once the monotonicity cut becomes active;
    # mu near alpha = 1/2 gives deeper cuts
    params = SolverParams(variant=Variant.MINNORM, mu=0.4, max_iter=20_000)
    return RegressionCase("minnorm_6d", prob, params, nearest)


def regression_set():
    return [
        shrink_1d(),
        box_edge_2d(),
        two_balls_2d(),
        two_balls_2d(alpha=0.99),
        ball_vi_2d(),
        mixed_segment_3d(),
        ball_cap_10d(),
        minnorm_6d(),
    ]
