"""The parallel hybrid projection iteration and its simplified variants.

One iteration of the main scheme, starting from ``x_n``:

1. ``z^l = T_{r_n}^{f_l} x_n`` for every bifunction, keep the one farthest
   from ``x_n`` as ``z_bar``;
2. ``u^k = P_C(z_bar - lam A_k z_bar)`` for every operator, keep ``u_bar``;
3. ``y^i = a_n u_bar + (1 - a_n) S_i u_bar`` for every map, keep ``y_bar``;
4. ``x_{n+1}`` is the projection of ``x0`` onto the half-spaces
   ``||v - y_bar|| <= ||v - z_bar||``, ``||v - z_bar|| <= ||v - x_n||`` and
   ``<x0 - x_n, x_n - v> >= 0``.

Each family stage is evaluated through a :class:`StageExecutor`; the
selections are reduced in index order so results do not depend on the
number of workers. An empty family passes its input point through.
"""
import enum
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .halfspaces import (
    InfeasibleIntersectionError,
    KktSolution,
    bisector_halfspace,
    monotonicity_halfspace,
    project_intersection,
    project_two,
)
from .operators import resolvent
from .parallel import SERIAL, StageExecutor
from .problem import ParameterError, Variant
from .sets import HalfSpace

FEJER_SLACK = 1e-10
CONTAINMENT_SLACK = 1e-8
CHAIN_SLACK = 1e-8


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    FIXED_POINT = "stopped_at_fixed_point"
    BREAKDOWN = "numerical_breakdown"


def _dist(a, b):
    d = a - b
    return math.sqrt(float(np.dot(d, d)))


@dataclass(eq=False)
class IterationState:
    """All symbols of one iteration.

    Before a step only ``n`` and ``x`` are set; a step fills in the family
    outputs, the selected indices and points, the generated half-spaces and
    ``x_next``. ``residual`` is the stopping residual: the largest of
    ``||x - z_bar||``, ``||x - u_bar||``, ``||x - y_bar||`` and
    ``max_i ||u_bar - S_i u_bar||`` (``max_k ||A_k x||`` for the min-norm
    variant).
    """

    n: int
    x: np.ndarray
    z_all: list = field(default_factory=list)
    u_all: list = field(default_factory=list)
    y_all: list = field(default_factory=list)
    l_n: Optional[int] = None
    k_n: Optional[int] = None
    i_n: Optional[int] = None
    z_bar: Optional[np.ndarray] = None
    u_bar: Optional[np.ndarray] = None
    y_bar: Optional[np.ndarray] = None
    halfspaces: list = field(default_factory=list)
    kkt: Optional[KktSolution] = None
    x_next: Optional[np.ndarray] = None
    residual: float = math.inf
    timings: dict = field(default_factory=dict)

    def advance(self):
        if self.x_next is None:
            raise RuntimeError("iteration has not been executed")
        return IterationState(self.n + 1, self.x_next)


def select_farthest(candidates, x):
    """Index and value of the candidate farthest from ``x`` (lowest index on ties)."""
    if len(candidates) == 0:
        raise ValueError("select_farthest needs at least one candidate")
    best, best_d = 0, _dist(candidates[0], x)
    for j in range(1, len(candidates)):
        d = _dist(candidates[j], x)
        if d > best_d:
            best, best_d = j, d
    return best, candidates[best]


def _ensure(prob, params):
    return params if params.lam is not None else params.resolved(prob)


def _u_stage(prob, lam, z, x, ex):
    if not prob.ism_ops:
        return [], None, z
    C = prob.feasible_set
    us = ex.map(lambda A: C.project(z - lam * A.apply(z)), prob.ism_ops)
    k, u_bar = select_farthest(us, x)
    return us, k, u_bar


def _y_stage(prob, a_n, u, x, ex):
    """Returns (ys, i_n, y_bar, gap) with gap = max_i ||u - S_i u||."""
    if not prob.maps:
        return [], None, u, 0.0

    def one(S):
        s = S.apply(u)
        return a_n * u + (1.0 - a_n) * s, _dist(u, s)

    pairs = ex.map(one, prob.maps)
    ys = [p[0] for p in pairs]
    i, y_bar = select_farthest(ys, x)
    return ys, i, y_bar, max(p[1] for p in pairs)


def _project_anchor(x0, halfspaces):
    live = [j for j, h in enumerate(halfspaces) if not h.degenerate]
    if len(live) != 2:
        return project_intersection(x0, halfspaces)
    sol = project_two(x0, halfspaces[live[0]], halfspaces[live[1]])
    return KktSolution(sol.point, sol.multipliers, tuple(live[j] for j in sol.active_set), sol.method)


def _cut_floor(residual, params):
    # Once every stage moves x_n by at most stop_tol, the bisector normals are
    # differences of nearly equal points and their directions are roundoff.
    # Dropping them keeps x_{n+1} = P_{Q_n} x0 = x_n.
    return math.inf if residual <= params.stop_tol else 0.0


def hybrid_step(state, prob, params, executor=SERIAL):
    """One iteration of the main parallel hybrid scheme."""
    params = _ensure(prob, params)
    n, x = state.n, state.x
    C = prob.feasible_set
    r_n, a_n = params.r(n), params.alpha(n)
    t0 = time.perf_counter()
    if prob.bifunctions:
        cfg = params.resolvent
        zs = executor.map(lambda f: resolvent(f, C, r_n, x, cfg), prob.bifunctions)
        l_n, z_bar = select_farthest(zs, x)
    else:
        zs, l_n, z_bar = [], None, x
    t1 = time.perf_counter()
    us, k_n, u_bar = _u_stage(prob, params.lam, z_bar, x, executor)
    t2 = time.perf_counter()
    ys, i_n, y_bar, gap = _y_stage(prob, a_n, u_bar, x, executor)
    t3 = time.perf_counter()
    residual = max(_dist(x, z_bar), _dist(x, u_bar), _dist(x, y_bar), gap)
    floor = _cut_floor(residual, params)
    hs = [bisector_halfspace(y_bar, z_bar, floor), bisector_halfspace(z_bar, x, floor),
          monotonicity_halfspace(prob.x0, x)]
    kkt = _project_anchor(prob.x0, hs)
    t4 = time.perf_counter()
    return IterationState(
        n, x, zs, us, ys, l_n, k_n, i_n, z_bar, u_bar, y_bar, hs, kkt, kkt.point, residual,
        {"z": t1 - t0, "u": t2 - t1, "y": t3 - t2, "project": t4 - t3},
    )


def _simplified(state, prob, params, executor):
    n, x = state.n, state.x
    a_n = params.alpha(n)
    t0 = time.perf_counter()
    z = prob.feasible_set.project(x)
    us, k_n, u_bar = _u_stage(prob, params.lam, z, x, executor)
    t1 = time.perf_counter()
    ys, i_n, y_bar, gap = _y_stage(prob, a_n, u_bar, x, executor)
    t2 = time.perf_counter()
    residual = max(_dist(x, z), _dist(x, u_bar), _dist(x, y_bar), gap)
    hs = [bisector_halfspace(y_bar, x, _cut_floor(residual, params)),
          monotonicity_halfspace(prob.x0, x)]
    kkt = project_two(prob.x0, hs[0], hs[1])
    t3 = time.perf_counter()
    return IterationState(
        n, x, [z], us, ys, None, k_n, i_n, z, u_bar, y_bar, hs, kkt, kkt.point, residual,
        {"u": t1 - t0, "y": t2 - t1, "project": t3 - t2},
    )


def simplified_step_alg34(state, prob, params, executor=SERIAL):
    """One step of the simplified scheme for operators and maps only.

    ``z_n = P_C x_n`` replaces the resolvent stage and ``C_n`` is the single
    bisector of ``y_bar`` and ``x_n``, so ``x_{n+1}`` comes from the
    closed-form two-half-space projection.
    """
    if prob.bifunctions:
        raise ParameterError("variant alg34 requires no bifunctions")
    return _simplified(state, prob, _ensure(prob, params), executor)


def fixed_point_step_cor36(state, prob, params, executor=SERIAL):
    """Simplified step with no operators: ``y^i = a_n z_n + (1 - a_n) S_i z_n``."""
    if prob.bifunctions or prob.ism_ops:
        raise ParameterError("variant fixedpoint requires empty bifunction and operator families")
    return _simplified(state, prob, _ensure(prob, params), executor)


def min_norm_step_cor32(state, prob, params, executor=SERIAL):
    """One step towards the x0-nearest zero of a family of ism operators.

    Selects the operator with the largest ``||A_i x_n||`` and projects x0 onto
    ``{v : <v, a> <= <x_n - mu a, a>}`` ∩ Q_n with ``a = A_i x_n``.
    """
    params = _ensure(prob, params)
    n, x = state.n, state.x
    mu = params.mu
    t0 = time.perf_counter()
    vals = executor.map(lambda A: A.apply(x), prob.ism_ops)
    i_n, a = select_farthest(vals, np.zeros_like(x))
    t1 = time.perf_counter()
    residual = math.sqrt(float(np.dot(a, a)))
    if residual > _cut_floor(residual, params):
        cn = HalfSpace(a, float(np.dot(x - mu * a, a)))
    else:
        cn = HalfSpace(np.zeros_like(x), 0.0)
    hs = [cn, monotonicity_halfspace(prob.x0, x)]
    kkt = project_two(prob.x0, hs[0], hs[1])
    t2 = time.perf_counter()
    y_bar = x - params.lam * a
    return IterationState(
        n, x, [], vals, [], None, i_n, None, x, y_bar, y_bar, hs, kkt, kkt.point, residual,
        {"u": t1 - t0, "project": t2 - t1},
    )


STEPS = {
    Variant.MAIN: hybrid_step,
    Variant.ALG34: simplified_step_alg34,
    Variant.MINNORM: min_norm_step_cor32,
    Variant.FIXEDPOINT: fixed_point_step_cor36,
}


# ---------------------------------------------------------------------------
# monitors and traces


@dataclass(frozen=True)
class Violation:
    n: int
    kind: str
    amount: float


def witness_slack(halfspaces, u):
    """Largest normalized excess of ``u`` over the non-degenerate half-spaces."""
    return max((h.excess(u) for h in halfspaces if not h.degenerate), default=-math.inf)


def monitor_invariants(state, prob):
    """Check the per-iteration guarantees of the method.

    * anchored Fejér monotonicity: ``||x_{n+1} - x0|| >= ||x_n - x0||``;
    * with a witness ``u``: ``u`` lies in every generated half-space, and
      ``||u - y_bar|| <= ||u - z_bar|| <= ||u - x_n||``.

    Returns a list of :class:`Violation` (empty when all hold).
    """
    out = []
    n = state.n
    before = _dist(state.x, prob.x0)
    after = _dist(state.x_next, prob.x0)
    if after < before - FEJER_SLACK:
        out.append(Violation(n, "fejer", before - after))
    u = prob.witness
    if u is not None:
        slack = witness_slack(state.halfspaces, u)
        if slack > CONTAINMENT_SLACK:
            out.append(Violation(n, "containment", slack))
        dy, dz, dx = _dist(u, state.y_bar), _dist(u, state.z_bar), _dist(u, state.x)
        if dy > dz + CHAIN_SLACK:
            out.append(Violation(n, "chain_y_z", dy - dz))
        if dz > dx + CHAIN_SLACK:
            out.append(Violation(n, "chain_z_x", dz - dx))
    return out


@dataclass
class TraceRecord:
    n: int
    step: float
    dist_y: float
    dist_z: float
    dist_zu: float
    fejer: float
    residual: float
    c_violation: float
    selected: tuple
    active_set: tuple
    multipliers: tuple
    witness_dist: Optional[float] = None
    witness_slack: Optional[float] = None
    stage_seconds: dict = field(default_factory=dict)

    def to_dict(self, timings=False):
        d = {
            "n": self.n,
            "step": self.step,
            "dist_y": self.dist_y,
            "dist_z": self.dist_z,
            "dist_zu": self.dist_zu,
            "fejer": self.fejer,
            "residual": self.residual,
            "c_violation": self.c_violation,
            "selected": list(self.selected),
            "active_set": list(self.active_set),
            "multipliers": list(self.multipliers),
            "witness_dist": self.witness_dist,
            "witness_slack": self.witness_slack,
        }
        if timings:
            d["stage_seconds"] = dict(self.stage_seconds)
        return d


def make_record(state, prob):
    u = prob.witness
    x = state.x
    return TraceRecord(
        n=state.n,
        step=_dist(state.x_next, x),
        dist_y=_dist(x, state.y_bar),
        dist_z=_dist(x, state.z_bar),
        dist_zu=_dist(state.z_bar, state.u_bar),
        fejer=_dist(x, prob.x0),
        residual=float(state.residual),
        c_violation=prob.feasible_set.violation(x),
        selected=(state.l_n, state.k_n, state.i_n),
        active_set=state.kkt.active_set,
        multipliers=state.kkt.multipliers,
        witness_dist=None if u is None else _dist(x, u),
        witness_slack=None if u is None else max(0.0, witness_slack(state.halfspaces, u)),
        stage_seconds=dict(state.timings),
    )


@dataclass(eq=False)
class SolveResult:
    status: Status
    x: np.ndarray
    iterations: int
    trace: List[TraceRecord]
    violations: List[Violation]
    params: object
    breakdown: Optional[InfeasibleIntersectionError] = None
    elapsed: float = 0.0

    @property
    def ok(self):
        return self.status in (Status.CONVERGED, Status.FIXED_POINT)


def solve(prob, params, on_record=None):
    """Run the configured variant until the stopping rule or ``max_iter``.

    The run stops at iteration ``n`` once the stage residual (see
    :class:`IterationState`) and ``||x_{n+1} - x_n||`` are both at most
    ``stop_tol``. When this happens at ``n = 0`` the start point is already a
    common solution and is returned unchanged.

    ``on_record`` is called with each emitted :class:`TraceRecord`.
    """
    params = params.resolved(prob)
    step_fn = STEPS[params.variant]
    tol = params.stop_tol
    trace, violations = [], []
    state = IterationState(0, prob.x0.copy())
    status, final, breakdown = Status.MAX_ITERATIONS, prob.x0.copy(), None
    iterations = 0
    start = time.perf_counter()
    with StageExecutor(params.threads) as ex:
        for n in range(params.max_iter):
            try:
                st = step_fn(state, prob, params, ex)
            except InfeasibleIntersectionError as err:
                status, final, breakdown = Status.BREAKDOWN, state.x, err
                break
            iterations += 1
            if params.monitor:
                violations.extend(monitor_invariants(st, prob))
            done = None
            if st.residual <= tol:
                if n == 0:
                    done, final = Status.FIXED_POINT, st.x
                elif _dist(st.x_next, st.x) <= tol:
                    done, final = Status.CONVERGED, st.x_next
            if done is not None or n % params.trace_every == 0 or n == params.max_iter - 1:
                rec = make_record(st, prob)
                trace.append(rec)
                if on_record is not None:
                    on_record(rec)
            if done is not None:
                status = done
                break
            state = st.advance()
            final = state.x
    return SolveResult(status, final, iterations, trace, violations, params, breakdown,
                       time.perf_counter() - start)


def terminal_residuals(prob, params, x, n=0):
    """Fixed-point residuals of ``x`` for every family.

    Returns a dict with ``maps`` (max ``||x - S_i x||``), ``resolvents``
    (max ``||x - T_{r_n}^{f_l} x||``), ``operators`` (max
    ``||x - P_C(x - lam A_k x)||``) and ``feasible`` (distance-like violation
    of ``x`` in C).
    """
    params = _ensure(prob, params)
    C = prob.feasible_set
    x = np.asarray(x, dtype=np.float64)
    r_n = params.r(n)
    return {
        "maps": max((_dist(x, S.apply(x)) for S in prob.maps), default=0.0),
        "resolvents": max(
            (_dist(x, resolvent(f, C, r_n, x, params.resolvent)) for f in prob.bifunctions),
            default=0.0,
        ),
        "operators": max(
            (_dist(x, C.project(x - params.lam * A.apply(x))) for A in prob.ism_ops),
            default=0.0,
        ),
        "feasible": C.violation(x),
    }
