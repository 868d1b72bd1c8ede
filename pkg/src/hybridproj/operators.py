"""Operator catalogue: inverse strongly monotone maps, nonexpansive maps,
monotone bifunctions and the equilibrium resolvent.

Every nonexpansive map and bifunction checks its defining inequality on
random pairs when constructed, so a misdeclared constant fails fast instead
of silently breaking the solver's guarantees.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .linalg import DimensionError, as_matrix, as_vector
from .sets import ConvexSet, WholeSpace

DEFAULT_SEED = 42
CONSTRUCTION_PAIRS = 1000
NONEXPANSIVE_SLACK = 1e-9
MONOTONE_SLACK = 1e-9


class ResolventNonConvergence(RuntimeError):
    """The inner resolvent iteration hit its iteration cap."""

    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class CertificationError(ValueError):
    """A declared operator property failed its randomized check."""


def _random_pairs(rng, dim, n, scale):
    return scale * rng.standard_normal((n, dim)), scale * rng.standard_normal((n, dim))


def _square(M, name):
    M = as_matrix(M, name=name)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got {M.shape}")
    return M


def _check_dim(x, dim):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (dim,):
        raise DimensionError(f"point has shape {x.shape}, operator acts on R^{dim}")
    return x


# ---------------------------------------------------------------------------
# nonexpansive maps


class NonexpansiveMap:
    kind = "abstract"
    dim: int

    def __call__(self, x):
        return self.apply(_check_dim(x, self.dim))

    def apply(self, x):
        raise NotImplementedError

    def _certify(self, seed=DEFAULT_SEED, pairs=CONSTRUCTION_PAIRS):
        worst = nonexpansive_violation(self, pairs, seed)
        if worst > NONEXPANSIVE_SLACK:
            raise CertificationError(
                f"{self.kind} map is not nonexpansive (excess {worst:.3e})"
            )


@dataclass(frozen=True, eq=False)
class IdentityMap(NonexpansiveMap):
    dim: int
    kind = "identity"

    def apply(self, x):
        return x.copy()


@dataclass(frozen=True, eq=False)
class ProjectionOnto(NonexpansiveMap):
    cset: ConvexSet
    seed: int = field(default=DEFAULT_SEED, repr=False)
    kind = "projection"

    def __post_init__(self):
        self._certify(self.seed)

    @property
    def dim(self):
        return self.cset.dim

    def apply(self, x):
        return self.cset.project(x)


@dataclass(frozen=True, eq=False)
class PlaneRotation(NonexpansiveMap):
    """Rotation by ``angle`` in the coordinate plane ``axes`` about ``center``.

    Remaining coordinates are left unchanged, so the fixed-point set is
    ``{x : x[i] = center[i], x[j] = center[j]}`` unless the angle is a
    multiple of 2*pi.
    """

    dim: int
    angle: float
    axes: tuple = (0, 1)
    center: np.ndarray = None
    seed: int = field(default=DEFAULT_SEED, repr=False)
    kind = "plane_rotation"

    def __post_init__(self):
        i, j = (int(a) for a in self.axes)
        if not (0 <= i < self.dim and 0 <= j < self.dim and i != j):
            raise ValueError(f"invalid rotation axes {self.axes} for dimension {self.dim}")
        object.__setattr__(self, "axes", (i, j))
        object.__setattr__(self, "angle", float(self.angle))
        c = np.zeros(self.dim) if self.center is None else as_vector(self.center, self.dim, "center")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "_cs", (math.cos(self.angle), math.sin(self.angle)))
        self._certify(self.seed)

    def apply(self, x):
        i, j = self.axes
        cos, sin = self._cs
        di = x[i] - self.center[i]
        dj = x[j] - self.center[j]
        y = x.copy()
        y[i] = self.center[i] + cos * di - sin * dj
        y[j] = self.center[j] + sin * di + cos * dj
        return y


@dataclass(frozen=True, eq=False)
class AffineContraction(NonexpansiveMap):
    """``x -> M x + b`` with spectral norm of ``M`` at most one."""

    M: np.ndarray
    b: np.ndarray
    seed: int = field(default=DEFAULT_SEED, repr=False)
    kind = "affine_contraction"

    def __post_init__(self):
        M = _square(self.M, "M")
        b = as_vector(self.b, M.shape[0], "b")
        opnorm = np.linalg.norm(M, 2)
        if opnorm > 1.0 + 1e-12:
            raise CertificationError(f"affine map has operator norm {opnorm:.6g} > 1")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b", b)
        self._certify(self.seed)

    @property
    def dim(self):
        return self.b.size

    def apply(self, x):
        return self.M @ x + self.b


def apply_nonexpansive(S, x):
    return S(x)


def nonexpansive_violation(S, pairs=CONSTRUCTION_PAIRS, seed=DEFAULT_SEED, scale=3.0):
    """Largest ``||Sx - Sy|| - ||x - y||`` over random pairs."""
    rng = np.random.default_rng(seed)
    X, Y = _random_pairs(rng, S.dim, pairs, scale)
    worst = -np.inf
    for x, y in zip(X, Y):
        worst = max(worst, np.linalg.norm(S.apply(x) - S.apply(y)) - np.linalg.norm(x - y))
    return float(worst)


# ---------------------------------------------------------------------------
# inverse strongly monotone operators


class IsmOperator:
    kind = "abstract"
    dim: int

    def __call__(self, x):
        return self.apply(_check_dim(x, self.dim))

    @property
    def modulus(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class ZeroOperator(IsmOperator):
    dim: int
    kind = "zero"

    @property
    def modulus(self):
        return math.inf

    def apply(self, x):
        return np.zeros_like(x)


@dataclass(frozen=True, eq=False)
class AffineMonotone(IsmOperator):
    """``x -> M x - b`` with positive definite symmetric part.

    The certified modulus is ``m / L**2`` where ``m`` is the smallest
    eigenvalue of ``(M + M.T) / 2`` and ``L`` the spectral norm of ``M``.
    """

    M: np.ndarray
    b: np.ndarray
    kind = "affine_monotone"

    def __post_init__(self):
        M = _square(self.M, "M")
        b = as_vector(self.b, M.shape[0], "b")
        m = float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
        L = float(np.linalg.norm(M, 2))
        if not m > 1e-12 * max(L, 1.0):
            raise CertificationError(
                "affine operator needs a positive definite symmetric part "
                f"(smallest eigenvalue {m:.3e})"
            )
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_modulus", m / (L * L))

    @property
    def dim(self):
        return self.b.size

    @property
    def modulus(self):
        return self._modulus

    def apply(self, x):
        return self.M @ x - self.b


@dataclass(frozen=True, eq=False)
class ResidualOfNonexpansive(IsmOperator):
    """``A = I - T``; 1/2-inverse strongly monotone with VI(A, C) = F(T)."""

    T: NonexpansiveMap
    kind = "residual"

    @property
    def dim(self):
        return self.T.dim

    @property
    def modulus(self):
        return 0.5

    def apply(self, x):
        return x - self.T.apply(x)


def apply_ism(A, x):
    return A(x)


def ism_modulus(A):
    return A.modulus


def family_modulus(ops):
    """Common modulus of a family: the smallest member modulus (inf if empty)."""
    return min((A.modulus for A in ops), default=math.inf)


def ism_violation(A, pairs=CONSTRUCTION_PAIRS, seed=DEFAULT_SEED, scale=3.0):
    """Largest ``alpha ||Ax - Ay||^2 - <Ax - Ay, x - y>`` over random pairs."""
    rng = np.random.default_rng(seed)
    X, Y = _random_pairs(rng, A.dim, pairs, scale)
    alpha = A.modulus
    worst = -np.inf
    for x, y in zip(X, Y):
        d = A.apply(x) - A.apply(y)
        dd = float(np.dot(d, d))
        lhs = 0.0 if (math.isinf(alpha) and dd == 0.0) else alpha * dd
        worst = max(worst, lhs - float(np.dot(d, x - y)))
    return float(worst)


def forward_step_violation(A, lam, pairs=CONSTRUCTION_PAIRS, seed=DEFAULT_SEED, scale=3.0):
    """Largest nonexpansiveness excess of ``I - lam*A`` over random pairs."""
    rng = np.random.default_rng(seed)
    X, Y = _random_pairs(rng, A.dim, pairs, scale)
    worst = -np.inf
    for x, y in zip(X, Y):
        fx = x - lam * A.apply(x)
        fy = y - lam * A.apply(y)
        worst = max(worst, np.linalg.norm(fx - fy) - np.linalg.norm(x - y))
    return float(worst)


# ---------------------------------------------------------------------------
# bifunctions


class Bifunction:
    kind = "abstract"
    dim: int

    def __call__(self, x, y):
        return self.value(_check_dim(x, self.dim), _check_dim(y, self.dim))

    def affine_form(self):
        """``(P, q)`` such that the resolvent solves a VI for ``z -> P z + q``."""
        return None

    def _certify(self, seed=DEFAULT_SEED, pairs=CONSTRUCTION_PAIRS):
        worst = monotonicity_violation(self, pairs, seed)
        if worst > MONOTONE_SLACK:
            raise CertificationError(f"{self.kind} bifunction is not monotone (excess {worst:.3e})")


@dataclass(frozen=True, eq=False)
class ZeroBifunction(Bifunction):
    dim: int
    kind = "zero"

    def value(self, x, y):
        return 0.0


@dataclass(frozen=True, eq=False)
class LinearMonotone(Bifunction):
    """``f(x, y) = <P x + q, y - x>`` with positive semidefinite symmetric part of P."""

    P: np.ndarray
    q: np.ndarray
    seed: int = field(default=DEFAULT_SEED, repr=False)
    kind = "linear_monotone"

    def __post_init__(self):
        P = _square(self.P, "P")
        q = as_vector(self.q, P.shape[0], "q")
        m = float(np.linalg.eigvalsh(0.5 * (P + P.T))[0])
        if m < -1e-12 * max(1.0, float(np.abs(P).max())):
            raise CertificationError(f"P must have a PSD symmetric part (eigenvalue {m:.3e})")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "q", q)
        self._certify(self.seed)

    @property
    def dim(self):
        return self.q.size

    def value(self, x, y):
        return float(np.dot(self.P @ x + self.q, y - x))

    def affine_form(self):
        return self.P, self.q


@dataclass(frozen=True, eq=False)
class ConvexDifference(Bifunction):
    """``f(x, y) = g(y) - g(x)`` for ``g(v) = v.Q.v / 2 + c.v`` with Q symmetric PSD."""

    Q: np.ndarray
    c: np.ndarray
    seed: int = field(default=DEFAULT_SEED, repr=False)
    kind = "convex_difference"

    def __post_init__(self):
        Q = _square(self.Q, "Q")
        c = as_vector(self.c, Q.shape[0], "c")
        if not np.array_equal(Q, Q.T):
            raise ValueError("Q must be symmetric")
        m = float(np.linalg.eigvalsh(Q)[0])
        if m < -1e-12 * max(1.0, float(np.abs(Q).max())):
            raise CertificationError(f"Q must be positive semidefinite (eigenvalue {m:.3e})")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "c", c)
        self._certify(self.seed)

    @property
    def dim(self):
        return self.c.size

    def g(self, v):
        return 0.5 * float(np.dot(v, self.Q @ v)) + float(np.dot(self.c, v))

    def value(self, x, y):
        return self.g(y) - self.g(x)

    def affine_form(self):
        return self.Q, self.c


def bifunction_value(f, x, y):
    return f(x, y)


def monotonicity_violation(f, pairs=CONSTRUCTION_PAIRS, seed=DEFAULT_SEED, scale=3.0):
    """Largest ``f(x, y) + f(y, x)`` over random pairs (should be <= 0)."""
    rng = np.random.default_rng(seed)
    X, Y = _random_pairs(rng, f.dim, pairs, scale)
    return float(max(f.value(x, y) + f.value(y, x) for x, y in zip(X, Y)))


# ---------------------------------------------------------------------------
# resolvent


@dataclass(frozen=True)
class ResolventConfig:
    inner_tol: float = 1e-12
    inner_max_iter: int = 10_000
    step_fraction: float = 0.9

    def __post_init__(self):
        if not self.inner_tol > 0:
            raise ValueError("inner_tol must be positive")
        if self.inner_max_iter < 1:
            raise ValueError("inner_max_iter must be >= 1")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step_fraction must lie in (0, 1)")


_DEFAULT_RESOLVENT = ResolventConfig()
_opnorm_cache = {}


def _opnorm(P):
    key = id(P)
    hit = _opnorm_cache.get(key)
    if hit is None or hit[0] is not P:
        hit = (P, float(np.linalg.norm(P, 2)), bool(np.array_equal(P, P.T)))
        _opnorm_cache[key] = hit
    return hit[1], hit[2]


def inner_step(P, r, step_fraction):
    """Step size making the projected regularized iteration a contraction.

    The regularized operator ``z -> P z + q + (z - x)/r`` is (1/r)-strongly
    monotone and (||P|| + 1/r)-Lipschitz. For symmetric P its spectrum lies in
    [1/r, ||P|| + 1/r] so ``2 / (||P|| + 2/r)`` is admissible; otherwise the
    generic bound ``2 eta / L**2`` is used.
    """
    pnorm, symmetric = _opnorm(P)
    if symmetric:
        return step_fraction * 2.0 / (pnorm + 2.0 / r)
    lip = pnorm + 1.0 / r
    return step_fraction * 2.0 / (r * lip * lip)


def resolvent(f, cset, r, x, cfg=None, z_init=None):
    """Evaluate the resolvent ``T_r^f x`` on the set ``cset``.

    Parameters
    ----------
    f : Bifunction
    cset : ConvexSet
    r : float
        Regularization parameter, ``r > 0``.
    x : array_like
    cfg : ResolventConfig, optional
    z_init : array_like, optional
        Starting point of the inner iteration (default ``x``).

    Returns
    -------
    ndarray
        The unique ``z`` in ``cset`` with
        ``f(z, y) + <y - z, z - x> / r >= 0`` for all ``y`` in ``cset``.
    """
    if not r > 0:
        raise ValueError(f"resolvent parameter r must be positive, got {r}")
    x = _check_dim(x, f.dim)
    if cset.dim != f.dim:
        raise DimensionError("bifunction and set dimensions differ")
    if isinstance(f, ZeroBifunction):
        return cset.project(x)
    P, q = f.affine_form()
    if isinstance(cset, WholeSpace):
        lhs = np.eye(f.dim) + r * P
        z, ok = kernels.gauss_solve(lhs, x - r * q, 1e-14)
        if not ok:  # pragma: no cover - I + rP is positive definite
            raise ResolventNonConvergence("singular resolvent system", math.inf, 0)
        return z
    cfg = cfg or _DEFAULT_RESOLVENT
    step = inner_step(P, r, cfg.step_fraction)
    start = x if z_init is None else _check_dim(z_init, f.dim)
    z, iters, change = kernels.affine_resolvent(
        P, q, x, float(r), step, *cset.kernel_args(), start,
        cfg.inner_tol, cfg.inner_max_iter,
    )
    if iters >= cfg.inner_max_iter and change > cfg.inner_tol * max(1.0, np.linalg.norm(z)):
        raise ResolventNonConvergence(
            f"resolvent inner iteration did not converge in {iters} steps "
            f"(last change {change:.3e})", float(change), int(iters),
        )
    return z


def resolvent_inequality_gap(f, cset, r, x, z, samples=64, seed=0):
    """Smallest ``f(z, y) + <y - z, z - x>/r`` over sampled ``y`` in the set."""
    rng = np.random.default_rng(seed)
    spread = 1.0 + float(np.linalg.norm(x))
    ys = cset.sample(rng, samples, spread=spread)
    return float(min(f.value(z, y) + np.dot(y - z, z - x) / r for y in ys))


class ResolventReport(NamedTuple):
    pairs: int
    max_violation: float


def verify_resolvent_properties(f, cset, r, sample_size=1000, seed=DEFAULT_SEED, cfg=None, scale=3.0):
    """Check firm nonexpansiveness of the resolvent on random pairs.

    Reports the largest ``||Tx - Ty||^2 - <Tx - Ty, x - y>``.
    """
    rng = np.random.default_rng(seed)
    X, Y = _random_pairs(rng, f.dim, sample_size, scale)
    worst = -np.inf
    for x, y in zip(X, Y):
        d = resolvent(f, cset, r, x, cfg) - resolvent(f, cset, r, y, cfg)
        worst = max(worst, float(np.dot(d, d) - np.dot(d, x - y)))
    return ResolventReport(sample_size, float(worst) if sample_size else 0.0)
