"""Dense vector helpers and the small pivoted solver used by the projectors."""
import numpy as np

from . import kernels

PIVOT_REL_TOL = 1e-12
MAX_SMALL_SYSTEM = 8


class DimensionError(ValueError):
    """Raised when operands live in spaces of different dimension."""


def as_vector(values, dim=None, name="vector"):
    """Return ``values`` as a finite, contiguous float64 1-D array.

    Raises
    ------
    DimensionError
        If ``dim`` is given and the length differs, or the input is not 1-D.
    ValueError
        If the input is empty or contains NaN/Inf.
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {v.shape}")
    if v.size == 0:
        raise ValueError(f"{name} must have at least one coordinate")
    if dim is not None and v.size != dim:
        raise DimensionError(f"{name} has dimension {v.size}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def as_matrix(values, shape=None, name="matrix"):
    m = np.ascontiguousarray(values, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {m.shape}")
    if shape is not None and m.shape != tuple(shape):
        raise DimensionError(f"{name} has shape {m.shape}, expected {tuple(shape)}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _check_pair(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def inner(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_pair(a, b)
    return float(np.dot(a, b))


def norm(a):
    a = np.asarray(a, dtype=np.float64)
    return float(np.sqrt(np.dot(a, a)))


def solve_small(matrix, rhs):
    """Solve a small square system by elimination with partial pivoting.

    Parameters
    ----------
    matrix : array_like, shape (m, m)
        Coefficients, ``m <= 8``.
    rhs : array_like, shape (m,)

    Returns
    -------
    ndarray or None
        The solution, or ``None`` when elimination meets a pivot below
        ``1e-12`` times the largest absolute entry of ``matrix``.
    """
    A = as_matrix(matrix, name="matrix")
    b = np.ascontiguousarray(rhs, dtype=np.float64)
    m = A.shape[0]
    if A.shape[1] != m:
        raise DimensionError(f"matrix must be square, got {A.shape}")
    if b.shape != (m,):
        raise DimensionError(f"rhs has shape {b.shape}, expected ({m},)")
    if m > MAX_SMALL_SYSTEM:
        raise ValueError(f"solve_small handles m <= {MAX_SMALL_SYSTEM}, got {m}")
    x, ok = kernels.gauss_solve(A, b, PIVOT_REL_TOL)
    return x if ok else None
