"""Problem instances, control schedules and solver parameters."""
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .linalg import DimensionError, as_vector
from .operators import (
    Bifunction,
    IsmOperator,
    NonexpansiveMap,
    ResolventConfig,
    family_modulus,
)
from .sets import ConvexSet, WholeSpace

WITNESS_TOL = 1e-8


class ParameterError(ValueError):
    """Solver parameters violate the convergence hypotheses or a variant's preconditions."""


class Variant(str, enum.Enum):
    MAIN = "main"
    ALG34 = "alg34"
    MINNORM = "minnorm"
    FIXEDPOINT = "fixedpoint"


@dataclass(frozen=True)
class ConstantSchedule:
    value: float

    def __call__(self, n):
        return self.value

    @property
    def limsup(self):
        return self.value

    @property
    def lower(self):
        return self.value

    @property
    def upper(self):
        return self.value


@dataclass(frozen=True)
class HarmonicSchedule:
    """``limit + (start - limit) / (n + 1)``."""

    start: float
    limit: float

    def __call__(self, n):
        return self.limit + (self.start - self.limit) / (n + 1)

    @property
    def limsup(self):
        return self.limit

    @property
    def lower(self):
        return min(self.start, self.limit)

    @property
    def upper(self):
        return max(self.start, self.limit)


@dataclass(eq=False)
class ProblemInstance:
    """Common-solution problem: EP(f_l) ∩ VI(A_k, C) ∩ F(S_i), anchored at x0.

    ``witness`` is an optional known point of the solution set. It is used
    only by the invariant monitors and tests, never by the iteration itself.
    """

    dim: int
    feasible_set: ConvexSet
    x0: np.ndarray
    bifunctions: Tuple[Bifunction, ...] = ()
    ism_ops: Tuple[IsmOperator, ...] = ()
    maps: Tuple[NonexpansiveMap, ...] = ()
    witness: Optional[np.ndarray] = None
    name: str = ""
    schedules: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dim = int(self.dim)
        self.x0 = as_vector(self.x0, self.dim, "x0")
        self.bifunctions = tuple(self.bifunctions)
        self.ism_ops = tuple(self.ism_ops)
        self.maps = tuple(self.maps)
        if self.feasible_set.dim != self.dim:
            raise DimensionError("feasible set dimension differs from dim")
        for label, family in (("bifunction", self.bifunctions), ("ism operator", self.ism_ops),
                              ("nonexpansive map", self.maps)):
            for j, member in enumerate(family):
                if member.dim != self.dim:
                    raise DimensionError(f"{label} {j} acts on R^{member.dim}, expected R^{self.dim}")
        if not (self.bifunctions or self.ism_ops or self.maps):
            raise ValueError("at least one operator family must be nonempty")
        if self.witness is not None:
            self.witness = as_vector(self.witness, self.dim, "witness")
            bad = witness_defects(self, self.witness)
            if bad:
                raise ValueError("witness is not a common solution: " + "; ".join(bad))

    @property
    def alpha(self):
        """Common inverse-strong-monotonicity modulus of the operator family."""
        return family_modulus(self.ism_ops)


def witness_defects(prob, u, tol=WITNESS_TOL):
    """List the membership tests that ``u`` fails (empty when u lies in F)."""
    C = prob.feasible_set
    bad = []
    if C.violation(u) > tol:
        bad.append(f"outside feasible set by {C.violation(u):.3e}")
    for i, S in enumerate(prob.maps):
        gap = float(np.linalg.norm(S.apply(u) - u))
        if gap > tol:
            bad.append(f"||S_{i} u - u|| = {gap:.3e}")
    for k, A in enumerate(prob.ism_ops):
        gap = float(np.linalg.norm(C.project(u - A.apply(u)) - u))
        if gap > tol:
            bad.append(f"||P_C(u - A_{k} u) - u|| = {gap:.3e}")
    for l, f in enumerate(prob.bifunctions):
        low = min(f.value(u, y) for y in C.sample(np.random.default_rng(0), 64, 1.0 + np.linalg.norm(u)))
        if low < -tol:
            bad.append(f"min_y f_{l}(u, y) = {low:.3e}")
    return bad


@dataclass(frozen=True)
class SolverParams:
    """Control parameters of a run.

    ``lam`` and ``mu`` default from the operator family modulus when left as
    None: ``lam = alpha`` (the midpoint of (0, 2 alpha)), ``mu = alpha / 2``.
    """

    variant: Variant = Variant.MAIN
    lam: Optional[float] = None
    mu: Optional[float] = None
    alpha: object = ConstantSchedule(0.5)
    r: object = ConstantSchedule(1.0)
    d: float = 1e-6
    stop_tol: float = 1e-8
    max_iter: int = 100_000
    resolvent: ResolventConfig = ResolventConfig()
    threads: int = 1
    trace_every: int = 1
    monitor: bool = True

    def resolved(self, prob):
        """Validate against ``prob`` and fill in default step sizes."""
        variant = Variant(self.variant)
        check_variant(prob, variant)
        if not self.stop_tol > 0:
            raise ParameterError("stop_tol must be positive")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be >= 1")
        if self.threads < 1:
            raise ParameterError("threads must be >= 1")
        alpha = prob.alpha
        lam, mu = self.lam, self.mu
        if variant is Variant.MINNORM:
            if mu is None:
                mu = lam / 2 if lam is not None else alpha / 2
            if not 0 < mu < alpha:
                raise ParameterError(f"mu out of (0, alpha) with alpha = {alpha:.6g}")
            lam = 2 * mu
        else:
            if lam is None:
                lam = alpha if math.isfinite(alpha) else 1.0
            if not (0 < lam < 2 * alpha):
                raise ParameterError(f"lambda out of (0, 2*alpha) with alpha = {alpha:.6g}")
        a = self.alpha
        if not (0 <= a.lower and a.upper <= 1):
            raise ParameterError("alpha schedule must take values in [0, 1]")
        if not a.limsup < 1:
            raise ParameterError("alpha schedule needs limsup < 1")
        if not self.d > 0:
            raise ParameterError("d must be positive")
        if not self.r.lower >= self.d:
            raise ParameterError(f"r schedule must stay >= d = {self.d:g}")
        return replace(self, variant=variant, lam=float(lam), mu=None if mu is None else float(mu))


def check_variant(prob, variant):
    K, M, N = len(prob.bifunctions), len(prob.ism_ops), len(prob.maps)
    if variant is Variant.ALG34 and K:
        raise ParameterError("variant alg34 requires no bifunctions")
    if variant is Variant.MINNORM:
        if not isinstance(prob.feasible_set, WholeSpace):
            raise ParameterError("variant minnorm requires the whole space as feasible set")
        if K or N:
            raise ParameterError("variant minnorm requires empty bifunction and map families")
        if not M:
            raise ParameterError("variant minnorm requires at least one ism operator")
    if variant is Variant.FIXEDPOINT:
        if K or M:
            raise ParameterError("variant fixedpoint requires empty bifunction and operator families")
        if not N:
            raise ParameterError("variant fixedpoint requires at least one nonexpansive map")

