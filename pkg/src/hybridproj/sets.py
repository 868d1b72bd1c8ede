"""Closed convex sets with exact projections."""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .linalg import DimensionError, as_matrix, as_vector

ORTHONORMAL_TOL = 1e-10
CERTIFICATE_SAMPLES = 64


class EmptySetError(ValueError):
    pass


class ContainmentVerdict(NamedTuple):
    inside: bool
    violation: float


_EMPTY_MAT = np.zeros((0, 1))


class ConvexSet:
    """Base class. Subclasses set ``kind`` and fill the kernel encoding."""

    kind = "abstract"
    dim: int

    def kernel_args(self):
        raise NotImplementedError

    def _check(self, x):
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise DimensionError(f"point has shape {x.shape}, set lives in R^{self.dim}")
        return x

    def project(self, x):
        return kernels.project_set(*self.kernel_args(), self._check(x))

    def violation(self, x):
        return float(kernels.set_violation(*self.kernel_args(), self._check(x)))

    def contains(self, x, tol):
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        v = self.violation(x)
        return ContainmentVerdict(v <= tol, v)

    def sample(self, rng, n, spread=1.0):
        """Draw ``n`` points of the set (rows of the returned array)."""
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class WholeSpace(ConvexSet):
    dim: int
    kind = "whole_space"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    def kernel_args(self):
        z = np.zeros(self.dim)
        return kernels.WHOLE, z, z, 0.0, _EMPTY_MAT

    def sample(self, rng, n, spread=1.0):
        return spread * rng.standard_normal((n, self.dim))


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    lower: np.ndarray
    upper: np.ndarray
    kind = "box"

    def __post_init__(self):
        lo = as_vector(self.lower, name="lower")
        hi = as_vector(self.upper, dim=lo.size, name="upper")
        if np.any(lo > hi):
            raise ValueError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.size

    def kernel_args(self):
        return kernels.BOX, self.lower, self.upper, 0.0, _EMPTY_MAT

    def sample(self, rng, n, spread=1.0):
        return self.lower + rng.random((n, self.dim)) * (self.upper - self.lower)


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float
    kind = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center, name="center"))
        r = float(self.radius)
        if not (r > 0 and np.isfinite(r)):
            raise ValueError("ball radius must be positive and finite")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self):
        return self.center.size

    def kernel_args(self):
        return kernels.BALL, self.center, self.center, self.radius, _EMPTY_MAT

    def sample(self, rng, n, spread=1.0):
        g = rng.standard_normal((n, self.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        rad = self.radius * rng.random(n) ** (1.0 / self.dim)
        return self.center + g * rad[:, None]


@dataclass(frozen=True, eq=False)
class HalfSpace(ConvexSet):
    """The set ``{v : <normal, v> <= offset}``.

    A zero normal with nonnegative offset denotes the whole space; a zero
    normal with negative offset is empty and rejected.
    """

    normal: np.ndarray
    offset: float
    kind = "halfspace"

    def __post_init__(self):
        object.__setattr__(self, "normal", as_vector(self.normal, name="normal"))
        off = float(self.offset)
        if not np.isfinite(off):
            raise ValueError("offset must be finite")
        if not np.any(self.normal) and off < 0:
            raise EmptySetError("half-space with zero normal and negative offset is empty")
        object.__setattr__(self, "offset", off)

    @property
    def dim(self):
        return self.normal.size

    @property
    def degenerate(self):
        """True when the normal is zero, i.e. the set is the whole space."""
        return not np.any(self.normal)

    def kernel_args(self):
        return kernels.HALFSPACE, self.normal, self.normal, self.offset, _EMPTY_MAT

    def excess(self, x):
        """Signed normalized distance beyond the boundary (negative inside)."""
        nrm = np.sqrt(np.dot(self.normal, self.normal))
        if nrm == 0.0:
            return -np.inf
        return float((np.dot(self.normal, x) - self.offset) / nrm)

    def sample(self, rng, n, spread=1.0):
        pts = spread * rng.standard_normal((n, self.dim))
        nn = np.dot(self.normal, self.normal)
        if nn == 0.0:
            return pts
        anchor = (self.offset / nn) * self.normal
        pts += anchor
        exc = pts @ self.normal - self.offset
        out = exc > 0
        pts[out] -= (2.0 * exc[out] / nn)[:, None] * self.normal
        return pts


@dataclass(frozen=True, eq=False)
class AffineSubspace(ConvexSet):
    """``basepoint + span(directions)`` with orthonormal direction rows."""

    basepoint: np.ndarray
    directions: np.ndarray = field(default=None)
    kind = "affine_subspace"

    def __post_init__(self):
        base = as_vector(self.basepoint, name="basepoint")
        dirs = self.directions
        if dirs is None or np.size(dirs) == 0:
            dirs = np.zeros((0, base.size))
        dirs = as_matrix(dirs, name="directions")
        if dirs.shape[1] != base.size:
            raise DimensionError(
                f"directions have {dirs.shape[1]} columns, basepoint has {base.size}"
            )
        gram = dirs @ dirs.T
        if np.max(np.abs(gram - np.eye(dirs.shape[0])), initial=0.0) > ORTHONORMAL_TOL:
            raise ValueError("affine subspace directions must be orthonormal")
        object.__setattr__(self, "basepoint", base)
        object.__setattr__(self, "directions", dirs)

    @property
    def dim(self):
        return self.basepoint.size

    def kernel_args(self):
        return kernels.AFFINE, self.basepoint, self.basepoint, 0.0, self.directions

    def sample(self, rng, n, spread=1.0):
        coef = spread * rng.standard_normal((n, self.directions.shape[0]))
        return self.basepoint + coef @ self.directions


def project(cset, x):
    """Metric projection of ``x`` onto ``cset``."""
    return cset.project(x)


def contains(cset, x, tol):
    return cset.contains(x, tol)


def projection_certificate(cset, x, p=None, samples=CERTIFICATE_SAMPLES, seed=0):
    """Smallest value of ``<x - p, p - y>`` over sampled ``y`` in the set.

    For the true projection ``p`` this is nonnegative up to roundoff.
    """
    x = np.asarray(x, dtype=np.float64)
    if p is None:
        p = cset.project(x)
    rng = np.random.default_rng(seed)
    spread = 1.0 + float(np.linalg.norm(x))
    ys = cset.sample(rng, samples, spread=spread)
    return float(np.min((p - ys) @ (x - p)))
