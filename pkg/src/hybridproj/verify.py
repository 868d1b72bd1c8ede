"""Randomized property suites run by ``hybridproj verify``.

Every check reports the largest observed slack against a threshold; a
property passes when that slack does not exceed the threshold.
"""
import math
from typing import NamedTuple

import numpy as np

from .engine import Status, solve, terminal_residuals
from .halfspaces import kkt_certified, project_intersection, project_two
from .instances import regression_set
from .operators import (
    AffineContraction,
    AffineMonotone,
    ConvexDifference,
    IdentityMap,
    LinearMonotone,
    PlaneRotation,
    ProjectionOnto,
    ResidualOfNonexpansive,
    ZeroBifunction,
    ZeroOperator,
    forward_step_violation,
    ism_violation,
    nonexpansive_violation,
    resolvent,
    verify_resolvent_properties,
)
from .sets import AffineSubspace, Ball, Box, HalfSpace, WholeSpace, projection_certificate

SUITES = ("projections", "resolvents", "projector", "solver")


class PropertyCheck(NamedTuple):
    suite: str
    name: str
    max_slack: float
    threshold: float

    @property
    def passed(self):
        return self.max_slack <= self.threshold


def catalogue_sets():
    return [
        Box([-1.0, -0.5, 0.0], [1.0, 0.5, 2.0]),
        Ball([0.5, -0.5, 1.0], 1.5),
        HalfSpace([1.0, 2.0, -1.0], 0.5),
        WholeSpace(3),
        AffineSubspace([1.0, 0.0, 0.0], [[0.0, 0.6, 0.8]]),
    ]


def catalogue_maps(seed=42):
    return [
        IdentityMap(3),
        ProjectionOnto(Ball([0.0, 0.0, 0.0], 1.0), seed=seed),
        PlaneRotation(3, 0.8, (0, 2), [0.5, 0.0, -0.5], seed=seed),
        AffineContraction(np.diag([0.5, -1.0, 0.25]), [1.0, 0.0, -1.0], seed=seed),
    ]


def catalogue_ism_operators():
    rot = np.linalg.qr(np.random.default_rng(1).standard_normal((3, 3)))[0]
    return [
        ZeroOperator(3),
        AffineMonotone(rot @ np.diag([1.0, 2.0, 4.0]) @ rot.T, [0.5, -1.0, 0.0]),
        ResidualOfNonexpansive(ProjectionOnto(Ball([1.0, 0.0, 0.0], 0.5))),
    ]


def catalogue_bifunctions(seed=42):
    rng = np.random.default_rng(2)
    B = rng.standard_normal((3, 3))
    skew = B - B.T
    return [
        ZeroBifunction(3),
        LinearMonotone(B @ B.T / 3 + 0.5 * skew, [0.2, -0.1, 0.3], seed=seed),
        ConvexDifference(B.T @ B / 3, [1.0, 0.0, -0.5], seed=seed),
    ]


def firm_violation(T, rng, samples, dim=3, scale=3.0):
    """Largest ``||Tx - Ty||^2 - <Tx - Ty, x - y>`` over random pairs."""
    worst = -math.inf
    for _ in range(samples):
        x, y = scale * rng.standard_normal(dim), scale * rng.standard_normal(dim)
        d = T(x) - T(y)
        worst = max(worst, float(np.dot(d, d) - np.dot(d, x - y)))
    return worst


def check_projections(samples=1000, seed=42):
    rng = np.random.default_rng(seed)
    out = []
    for C in catalogue_sets():
        out.append(PropertyCheck("projections", f"firm nonexpansive P_C [{C.kind}]",
                                 max(0.0, firm_violation(C.project, rng, samples)), 1e-9))
        worst = 0.0
        for x in 3.0 * rng.standard_normal((max(1, samples // 50), 3)):
            worst = max(worst, -projection_certificate(C, x, seed=seed))
        out.append(PropertyCheck("projections", f"obtuse angle at P_C x [{C.kind}]", worst, 1e-9))
    for S in catalogue_maps(seed):
        out.append(PropertyCheck("projections", f"nonexpansive S [{S.kind}]",
                                 max(0.0, nonexpansive_violation(S, samples, seed)), 1e-9))
    return out


def check_resolvents(samples=1000, seed=42):
    rng = np.random.default_rng(seed)
    box = Box([-1.0, -1.0, -1.0], [1.0, 2.0, 0.5])
    out = []
    for f in catalogue_bifunctions(seed):
        for C in (box, WholeSpace(3)):
            rep = verify_resolvent_properties(f, C, 0.7, sample_size=samples, seed=seed)
            out.append(PropertyCheck("resolvents", f"firm nonexpansive T_r [{f.kind} on {C.kind}]",
                                     max(0.0, rep.max_violation), 1e-8))
    zero = ZeroBifunction(3)
    dev = max(
        float(np.max(np.abs(resolvent(zero, box, 0.7, x) - box.project(x))))
        for x in 3.0 * rng.standard_normal((samples, 3))
    )
    out.append(PropertyCheck("resolvents", "zero bifunction resolvent equals P_C", dev, 1e-12))
    lin = catalogue_bifunctions(seed)[1]
    worst = 0.0
    for x in 3.0 * rng.standard_normal((samples, 3)):
        z = resolvent(lin, WholeSpace(3), 0.7, x)
        worst = max(worst, float(np.linalg.norm(z + 0.7 * (lin.P @ z + lin.q) - x)))
    out.append(PropertyCheck("resolvents", "linear resolvent substitution residual", worst, 1e-10))
    for A in catalogue_ism_operators():
        out.append(PropertyCheck("resolvents", f"ism inequality [{A.kind}]",
                                 max(0.0, ism_violation(A, samples, seed)), 1e-8))
        lam = 1.0 if math.isinf(A.modulus) else 1.9 * A.modulus
        out.append(PropertyCheck("resolvents", f"I - lam A nonexpansive [{A.kind}]",
                                 max(0.0, forward_step_violation(A, lam, samples, seed)), 1e-8))
    return out


def random_halfspaces(rng, dim, count, spread=2.0):
    """``count`` half-spaces in R^dim sharing an interior point."""
    p = spread * rng.uniform(-1.0, 1.0, dim)
    hs = []
    for _ in range(count):
        a = rng.standard_normal(dim)
        hs.append(HalfSpace(a, float(a @ p) + rng.uniform(0.0, 1.0)))
    return hs


def _entry_distance(x0, A, b, theta):
    """Distance from ``x0`` to the polygon ``A v <= b`` along each ray angle (inf on a miss)."""
    d = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    ad = d @ A.T
    slack = b - A @ x0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = slack / ad
    lower = np.where(ad < 0, ratio, -np.inf).max(axis=1)
    upper = np.where(ad > 0, ratio, np.inf).min(axis=1)
    blocked = np.any((ad == 0) & (slack < 0), axis=1)
    t = np.maximum(lower, 0.0)
    return np.where((t <= upper) & ~blocked, t, np.inf)


def grid_projection_2d(x0, halfspaces, inside, points=4001, levels=60, target=1e-14):
    """Brute-force projection onto a 2-D polygon by a zooming grid of ray angles.

    For each angle on a dense grid the distance from ``x0`` to the polygon
    along that ray is computed exactly; the best angle is refined by zooming
    onto its two neighbours. Over a convex set this ray distance is unimodal,
    so the bracket always contains the minimizer. ``inside`` is any feasible
    point and seeds the first grid. Independent of any active-set logic.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    A = np.array([h.normal for h in halfspaces], dtype=np.float64)
    b = np.array([h.offset for h in halfspaces], dtype=np.float64)
    if np.all(A @ x0 <= b):
        return x0.copy()
    v = np.asarray(inside, dtype=np.float64) - x0
    center, half = math.atan2(v[1], v[0]), math.pi
    for _ in range(levels):
        theta = center + np.linspace(-half, half, points)
        t = _entry_distance(x0, A, b, theta)
        j = int(np.argmin(t))
        center, step = theta[j], 2.0 * half / (points - 1)
        if step < target:
            break
        half = 2.0 * step
    return x0 + t[j] * np.array([math.cos(center), math.sin(center)])


def check_projector(samples=1000, seed=42):
    rng = np.random.default_rng(seed)
    worst_gap, uncertified = 0.0, 0
    for _ in range(samples):
        dim = int(rng.integers(2, 6))
        hs = random_halfspaces(rng, dim, 2)
        x0 = 3.0 * rng.standard_normal(dim)
        a = project_two(x0, hs[0], hs[1])
        b = project_intersection(x0, hs)
        worst_gap = max(worst_gap, float(np.max(np.abs(a.point - b.point))))
        uncertified += (not kkt_certified(a, x0, hs)) + (not kkt_certified(b, x0, hs))
    out = [
        PropertyCheck("projector", "closed form vs enumeration", worst_gap, 1e-10),
        PropertyCheck("projector", "uncertified KKT outputs (two half-spaces)", float(uncertified), 0.0),
    ]
    worst_grid, uncertified = 0.0, 0
    for _ in range(min(samples, 100)):
        hs = random_halfspaces(rng, 2, 3)
        x0 = 3.0 * rng.standard_normal(2)
        sol = project_intersection(x0, hs)
        inside = _interior_point(hs)
        ref = grid_projection_2d(x0, hs, inside)
        worst_grid = max(worst_grid, float(np.linalg.norm(sol.point - ref)))
        uncertified += not kkt_certified(sol, x0, hs)
    out.append(PropertyCheck("projector", "enumeration vs dense grid (2-D, three half-spaces)", worst_grid, 1e-6))
    out.append(PropertyCheck("projector", "uncertified KKT outputs (three half-spaces)", float(uncertified), 0.0))
    return out


def _interior_point(hs):
    # random_halfspaces keeps the shared point strictly inside; recover it
    # as the projection of the origin, which is feasible by construction
    return project_intersection(np.zeros(hs[0].dim), hs).point


def check_solver(samples=None, seed=42, threads=1):
    out = []
    for case in regression_set():
        params = case.params
        if threads != 1:
            from dataclasses import replace
            params = replace(params, threads=threads)
        res = solve(case.problem, params)
        err = float(np.linalg.norm(res.x - case.expected))
        out.append(PropertyCheck("solver", f"distance to P_F x0 [{case.name}]", err, 1e-4))
        out.append(PropertyCheck("solver", f"monitor violations [{case.name}]", float(len(res.violations)), 0.0))
        if res.status is Status.CONVERGED:
            tr = terminal_residuals(case.problem, res.params, res.x)
            worst = max(tr["maps"], tr["resolvents"])
            out.append(PropertyCheck("solver", f"terminal residual [{case.name}]", worst,
                                     10 * res.params.stop_tol))
    return out


RUNNERS = {
    "projections": check_projections,
    "resolvents": check_resolvents,
    "projector": check_projector,
    "solver": check_solver,
}


def run_suite(name, samples=1000, seed=42):
    """Run ``name`` (one of :data:`SUITES` or ``"all"``) and return its checks."""
    names = SUITES if name == "all" else (name,)
    checks = []
    for n in names:
        checks.extend(RUNNERS[n](samples=samples, seed=seed))
    return checks
