"""Hot numeric kernels.

Every function here is compiled by numba unless JIT is disabled (see
:mod:`hybridproj._jit`). Signatures use only float64 arrays, ints and floats
so that the compiled and the plain-numpy paths are interchangeable.

Convex sets are passed in a flat encoding ``(kind, v1, v2, s, mat)``:

=========  ==========  ==========  ========  ==============
kind       v1          v2          s         mat
=========  ==========  ==========  ========  ==============
WHOLE      unused      unused      unused    unused
BOX        lower       upper       unused    unused
BALL       center      unused      radius    unused
HALFSPACE  normal      unused      offset    unused
AFFINE     basepoint   unused      unused    directions (k x d, orthonormal rows)
=========  ==========  ==========  ========  ==============
"""
import numpy as np

from ._jit import jit

WHOLE = 0
BOX = 1
BALL = 2
HALFSPACE = 3
AFFINE = 4

# Gram systems / project_two outcomes
CASE_FALLBACK = -1
CASE_INTERIOR = 0
CASE_FIRST = 1
CASE_SECOND = 2
CASE_BOTH = 3

STATUS_OK = 0
STATUS_RELAXED = 1
STATUS_INFEASIBLE = 2


@jit
def vnorm(a):
    return np.sqrt(np.dot(a, a))


@jit
def gauss_solve(A, b, rel_pivot):
    """Gaussian elimination with partial pivoting.

    Returns ``(x, ok)``; ``ok`` is False when a pivot falls below
    ``rel_pivot`` times the largest absolute matrix entry.
    """
    m = A.shape[0]
    M = A.copy()
    rhs = b.copy()
    x = np.zeros(m)
    if m == 0:
        return x, True
    scale = np.max(np.abs(M))
    if scale == 0.0:
        return x, False
    thresh = rel_pivot * scale
    for k in range(m):
        p = k
        best = abs(M[k, k])
        for i in range(k + 1, m):
            if abs(M[i, k]) > best:
                best = abs(M[i, k])
                p = i
        if best < thresh:
            return x, False
        if p != k:
            for j in range(m):
                tmp = M[k, j]
                M[k, j] = M[p, j]
                M[p, j] = tmp
            tmp = rhs[k]
            rhs[k] = rhs[p]
            rhs[p] = tmp
        for i in range(k + 1, m):
            f = M[i, k] / M[k, k]
            if f != 0.0:
                for j in range(k, m):
                    M[i, j] -= f * M[k, j]
                rhs[i] -= f * rhs[k]
    for k in range(m - 1, -1, -1):
        acc = rhs[k]
        for j in range(k + 1, m):
            acc -= M[k, j] * x[j]
        x[k] = acc / M[k, k]
    return x, True


@jit
def project_set(kind, v1, v2, s, mat, x):
    if kind == BOX:
        return np.minimum(np.maximum(x, v1), v2)
    if kind == BALL:
        diff = x - v1
        dist = vnorm(diff)
        if dist <= s:
            return x.copy()
        return v1 + (s / dist) * diff
    if kind == HALFSPACE:
        nn = np.dot(v1, v1)
        if nn == 0.0:
            return x.copy()
        excess = np.dot(v1, x) - s
        if excess <= 0.0:
            return x.copy()
        return x - (excess / nn) * v1
    if kind == AFFINE:
        coef = np.dot(mat, x - v1)
        return v1 + np.dot(coef, mat)
    return x.copy()


@jit
def set_violation(kind, v1, v2, s, mat, x):
    """Distance-like violation of membership; 0 inside the set."""
    if kind == BOX:
        return max(0.0, np.max(v1 - x), np.max(x - v2))
    if kind == BALL:
        return max(0.0, vnorm(x - v1) - s)
    if kind == HALFSPACE:
        nrm = vnorm(v1)
        if nrm == 0.0:
            return 0.0
        return max(0.0, (np.dot(v1, x) - s) / nrm)
    if kind == AFFINE:
        coef = np.dot(mat, x - v1)
        return vnorm(x - v1 - np.dot(coef, mat))
    return 0.0


@jit
def affine_resolvent(P, q, x, r, step, kind, v1, v2, s, mat, z_init, tol, max_iter):
    """Projected fixed-point iteration for the regularized affine problem.

    Finds z in the set with <P z + q + (z - x)/r, y - z> >= 0 for every y in
    the set, as the fixed point of z -> proj(z - step * (P z + q + (z - x)/r)).
    Returns ``(z, iterations, last_change)``; ``iterations == max_iter`` with
    ``last_change > tol`` signals non-convergence.
    """
    z = project_set(kind, v1, v2, s, mat, z_init)
    change = np.inf
    inv_r = 1.0 / r
    for it in range(max_iter):
        g = np.dot(P, z) + q + inv_r * (z - x)
        z_new = project_set(kind, v1, v2, s, mat, z - step * g)
        change = vnorm(z_new - z)
        z = z_new
        if change <= tol * max(1.0, vnorm(z)):
            return z, it + 1, change
    return z, max_iter, change


@jit
def project_halfspaces(A, b, x0, subsets, sizes, mult_tol, feas_tol, relaxed_tol):
    """Project ``x0`` onto {v : A v <= b} by active-set enumeration.

    Rows of ``A`` are unit normals. ``subsets`` lists candidate active sets
    (padded with -1) in the order they are tried; the first candidate with
    nonnegative multipliers and feasible point wins. If none passes the strict
    test, the least-violating candidate is accepted when its violation is at
    most ``relaxed_tol``.

    Returns ``(point, multipliers, subset_index, status)``.
    """
    m = A.shape[0]
    best_p = x0.copy()
    best_mu = np.zeros(m)
    best_idx = -1
    best_score = np.inf
    for idx in range(subsets.shape[0]):
        k = sizes[idx]
        G = np.empty((k, k))
        rhs = np.empty(k)
        for a in range(k):
            ia = subsets[idx, a]
            rhs[a] = np.dot(A[ia], x0) - b[ia]
            for c in range(k):
                G[a, c] = np.dot(A[ia], A[subsets[idx, c]])
        lam, ok = gauss_solve(G, rhs, 1e-12)
        if not ok:
            continue
        p = x0.copy()
        mu = np.zeros(m)
        for a in range(k):
            p -= lam[a] * A[subsets[idx, a]]
            mu[subsets[idx, a]] = lam[a]
        viol = 0.0
        for i in range(m):
            viol = max(viol, np.dot(A[i], p) - b[i])
        neg = 0.0
        for a in range(k):
            neg = max(neg, -lam[a])
        if neg <= mult_tol and viol <= feas_tol:
            return p, mu, idx, STATUS_OK
        score = max(neg, viol)
        if score < best_score:
            best_score = score
            best_p = p
            best_mu = mu
            best_idx = idx
    if best_score <= relaxed_tol:
        return best_p, best_mu, best_idx, STATUS_RELAXED
    return best_p, best_mu, best_idx, STATUS_INFEASIBLE


@jit
def project_two(a1, b1, a2, b2, x0, mult_tol, feas_tol):
    """Closed-form projection of ``x0`` onto two half-spaces (unit normals).

    Tries, in order: x0 itself, the projection onto the first half-space
    (kept when it satisfies the second), the projection onto the second,
    and finally the point where both constraints are active, whose two
    multipliers solve a 2x2 linear system. Returns
    ``(point, mu1, mu2, case)``; ``case == CASE_FALLBACK`` means no branch
    certified a solution (parallel normals or roundoff).
    """
    e1 = np.dot(a1, x0) - b1
    e2 = np.dot(a2, x0) - b2
    if e1 <= feas_tol and e2 <= feas_tol:
        return x0.copy(), 0.0, 0.0, CASE_INTERIOR
    g11 = np.dot(a1, a1)
    g22 = np.dot(a2, a2)
    if e1 > 0.0:
        mu1 = e1 / g11
        p = x0 - mu1 * a1
        if np.dot(a2, p) - b2 <= feas_tol:
            return p, mu1, 0.0, CASE_FIRST
    if e2 > 0.0:
        mu2 = e2 / g22
        p = x0 - mu2 * a2
        if np.dot(a1, p) - b1 <= feas_tol:
            return p, 0.0, mu2, CASE_SECOND
    g12 = np.dot(a1, a2)
    det = g11 * g22 - g12 * g12
    if det <= 1e-12 * g11 * g22:
        return x0.copy(), 0.0, 0.0, CASE_FALLBACK
    mu1 = (g22 * e1 - g12 * e2) / det
    mu2 = (g11 * e2 - g12 * e1) / det
    if mu1 < -mult_tol or mu2 < -mult_tol:
        return x0.copy(), 0.0, 0.0, CASE_FALLBACK
    p = x0 - mu1 * a1 - mu2 * a2
    if np.dot(a1, p) - b1 > feas_tol or np.dot(a2, p) - b2 > feas_tol:
        return x0.copy(), 0.0, 0.0, CASE_FALLBACK
    return p, mu1, mu2, CASE_BOTH
