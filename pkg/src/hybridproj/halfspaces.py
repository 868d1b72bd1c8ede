"""Projection of an anchor point onto intersections of a few half-spaces."""
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import kernels
from .sets import HalfSpace

MAX_HALFSPACES = 4
MULT_TOL = 1e-12
FEAS_TOL = 1e-10
RELAXED_TOL = 1e-8


class InfeasibleIntersectionError(RuntimeError):
    """No active set yields a feasible KKT point."""

    def __init__(self, message, halfspaces):
        super().__init__(message)
        self.halfspaces = halfspaces


@dataclass(frozen=True, eq=False)
class KktSolution:
    """Projection result with its certificate.

    ``multipliers[j]`` belongs to ``halfspaces[active_set[j]]`` of the input
    list and refers to the half-space's own (unnormalized) normal, so
    ``point == x0 - sum(mult * normal)`` over the active set.
    """

    point: np.ndarray
    multipliers: tuple
    active_set: tuple
    method: str = "enumeration"


def bisector_halfspace(near, far, floor=0.0):
    """Points at least as close to ``near`` as to ``far``.

    Returns ``{v : <v, far - near> <= <far - near, (far + near)/2>}``. When
    ``||far - near|| <= floor`` the normal is zero and the half-space is the
    whole space: the direction of a very short normal is dominated by
    roundoff, and dropping a cut never excludes a solution.
    """
    near = np.asarray(near, dtype=np.float64)
    far = np.asarray(far, dtype=np.float64)
    if near.shape != far.shape:
        raise ValueError(f"dimension mismatch: {near.shape} vs {far.shape}")
    normal = far - near
    if not np.any(normal) or np.sqrt(np.dot(normal, normal)) <= floor:
        return HalfSpace(np.zeros_like(near), 0.0)
    return HalfSpace(normal, float(np.dot(normal, 0.5 * (far + near))))


def monotonicity_halfspace(x0, xn):
    """``{v : <x0 - xn, xn - v> >= 0}``, whole space when ``x0 == xn``."""
    x0 = np.asarray(x0, dtype=np.float64)
    xn = np.asarray(xn, dtype=np.float64)
    if x0.shape != xn.shape:
        raise ValueError(f"dimension mismatch: {x0.shape} vs {xn.shape}")
    normal = x0 - xn
    if not np.any(normal):
        return HalfSpace(np.zeros_like(x0), 0.0)
    return HalfSpace(normal, float(np.dot(normal, xn)))


@lru_cache(maxsize=None)
def _subset_table(m):
    order = [c for k in range(m + 1) for c in combinations(range(m), k)]
    table = np.full((len(order), max(m, 1)), -1, dtype=np.int64)
    sizes = np.zeros(len(order), dtype=np.int64)
    for row, combo in enumerate(order):
        table[row, : len(combo)] = combo
        sizes[row] = len(combo)
    return table, sizes


def _normalized(halfspaces):
    keep, A, b, scale = [], [], [], []
    for j, h in enumerate(halfspaces):
        nrm = float(np.sqrt(np.dot(h.normal, h.normal)))
        if nrm == 0.0:
            continue
        keep.append(j)
        A.append(h.normal / nrm)
        b.append(h.offset / nrm)
        scale.append(nrm)
    return keep, A, b, scale


def _tol_scale(x0, b):
    return 1.0 + float(np.max(np.abs(x0))) + float(np.max(np.abs(b), initial=0.0))


def project_intersection(x0, halfspaces):
    """Exact projection of ``x0`` onto the intersection of ``halfspaces``.

    Active sets are enumerated by size, then lexicographically; the first one
    whose Gram system gives nonnegative multipliers and a feasible point is
    returned. Zero-normal (whole-space) entries are ignored.

    Raises
    ------
    InfeasibleIntersectionError
        When no active set certifies a KKT point.
    """
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    halfspaces = list(halfspaces)
    if len(halfspaces) > MAX_HALFSPACES:
        raise ValueError(f"at most {MAX_HALFSPACES} half-spaces supported")
    keep, A, b, scale = _normalized(halfspaces)
    if not keep:
        return KktSolution(x0.copy(), (), ())
    A = np.ascontiguousarray(A)
    b = np.asarray(b)
    s = _tol_scale(x0, b)
    table, sizes = _subset_table(len(keep))
    p, mu, _, status = kernels.project_halfspaces(
        A, b, x0, table, sizes, MULT_TOL * s, FEAS_TOL * s, RELAXED_TOL * s
    )
    if status == kernels.STATUS_INFEASIBLE:
        raise InfeasibleIntersectionError(
            "half-space intersection appears empty", halfspaces
        )
    active = tuple(keep[j] for j in range(len(keep)) if mu[j] != 0.0)
    mults = tuple(max(0.0, float(mu[j] / scale[j])) for j in range(len(keep)) if mu[j] != 0.0)
    return KktSolution(p, mults, active)


def project_two(x0, cn, qn):
    """Projection of ``x0`` onto ``cn ∩ qn`` by the closed-form case split.

    First the single-constraint projection onto ``cn`` (kept if it lies in
    ``qn``), then symmetrically for ``qn``, then the point with both
    constraints active from a 2x2 linear system. Degenerate geometry falls
    back to :func:`project_intersection`.
    """
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    keep, A, b, scale = _normalized([cn, qn])
    if len(keep) < 2:
        return project_intersection(x0, [cn, qn])
    s = _tol_scale(x0, b)
    p, mu1, mu2, case = kernels.project_two(
        A[0], b[0], A[1], b[1], x0, MULT_TOL * s, FEAS_TOL * s
    )
    if case == kernels.CASE_FALLBACK:
        return project_intersection(x0, [cn, qn])
    active, mults = [], []
    for j, mu in ((0, mu1), (1, mu2)):
        if mu != 0.0:
            active.append(j)
            mults.append(max(0.0, float(mu / scale[j])))
    return KktSolution(p, tuple(mults), tuple(active), method="closed_form")


def project_bisector_pair(x0, xn, yn):
    """Projection of ``x0`` onto {v : ||v - yn|| <= ||v - xn||} ∩ Q_n."""
    return project_two(x0, bisector_halfspace(yn, xn), monotonicity_halfspace(x0, xn))


def kkt_residuals(sol, x0, halfspaces):
    """Certificate residuals of a :class:`KktSolution`.

    Returns a dict with ``stationarity`` (norm of
    ``point - x0 + sum mult*normal``), ``feasibility`` (largest normalized
    excess), ``negativity`` (largest negative multiplier magnitude) and
    ``slackness`` (largest normalized gap of an active constraint).
    """
    x0 = np.asarray(x0, dtype=np.float64)
    halfspaces = list(halfspaces)
    recon = x0.copy()
    for j, mu in zip(sol.active_set, sol.multipliers):
        recon -= mu * halfspaces[j].normal
    feas = max((h.excess(sol.point) for h in halfspaces if not h.degenerate), default=0.0)
    slack = max((abs(halfspaces[j].excess(sol.point)) for j in sol.active_set), default=0.0)
    neg = max((-m for m in sol.multipliers), default=0.0)
    return {
        "stationarity": float(np.linalg.norm(sol.point - recon)),
        "feasibility": max(0.0, float(feas)),
        "negativity": max(0.0, float(neg)),
        "slackness": float(slack),
    }


def kkt_certified(sol, x0, halfspaces, tol=1e-9):
    """True when every certificate residual is within ``tol`` (scaled by the data)."""
    res = kkt_residuals(sol, x0, halfspaces)
    s = 1.0 + float(np.max(np.abs(x0)))
    return (
        res["stationarity"] <= tol * s
        and res["feasibility"] <= FEAS_TOL * s
        and res["negativity"] == 0.0
        and res["slackness"] <= tol * s
    )
