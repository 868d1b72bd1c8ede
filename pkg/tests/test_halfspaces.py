from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridproj.halfspaces import (
    InfeasibleIntersectionError,
    bisector_halfspace,
    kkt_certified,
    kkt_residuals,
    monotonicity_halfspace,
    project_bisector_pair,
    project_intersection,
    project_two,
)
from hybridproj.sets import HalfSpace
from hybridproj.verify import grid_projection_2d, random_halfspaces


def test_bisector_examples():
    h = bisector_halfspace([1.0, 1.0], [1.0, 1.0])
    assert h.degenerate and h.offset == 0.0
    h = bisector_halfspace([-1.0, 0.0], [1.0, 0.0])
    np.testing.assert_array_equal(h.normal, [2.0, 0.0])
    assert h.offset == 0.0


def test_bisector_midpoint_on_boundary(rng):
    for _ in range(200):
        near, far = rng.standard_normal((2, 4))
        h = bisector_halfspace(near, far)
        mid = 0.5 * (near + far)
        assert abs(h.normal @ mid - h.offset) <= 1e-12 * (1 + abs(h.offset))
        assert h.normal @ near <= h.offset <= h.normal @ far


def test_bisector_floor_drops_short_normals():
    assert bisector_halfspace([0.0], [1e-9], floor=1e-8).degenerate
    assert not bisector_halfspace([0.0], [1e-7], floor=1e-8).degenerate


def test_bisector_describes_closer_points(rng):
    near, far = rng.standard_normal((2, 3))
    h = bisector_halfspace(near, far)
    for v in 3 * rng.standard_normal((200, 3)):
        closer = np.linalg.norm(v - near) <= np.linalg.norm(v - far)
        inside = h.normal @ v <= h.offset
        if abs(h.normal @ v - h.offset) > 1e-9:
            assert closer == inside


def test_monotonicity_examples(rng):
    assert monotonicity_halfspace([1.0, 2.0], [1.0, 2.0]).degenerate
    h = monotonicity_halfspace([1.0, 0.0], [0.5, 0.0])
    # {v1 <= 0.5}, up to the positive scaling of the normal
    assert h.normal[1] == 0.0 and h.offset / h.normal[0] == 0.5
    x0, xn = rng.standard_normal((2, 5))
    q = monotonicity_halfspace(x0, xn)
    assert abs(q.normal @ xn - q.offset) <= 1e-12 * (1 + abs(q.offset))


def test_project_two_examples():
    a = project_two(np.array([0.0, 0.0]), HalfSpace([1, 0], 1.0), HalfSpace([0, 1], 1.0))
    np.testing.assert_array_equal(a.point, [0.0, 0.0])
    assert a.multipliers == ()
    cn = bisector_halfspace([-1.0, 0.0], [1.0, 0.0])
    b = project_two(np.array([2.0, 1.0]), cn, HalfSpace([0.0, 0.0], 0.0))
    np.testing.assert_allclose(b.point, [0.0, 1.0], atol=1e-15)
    c = project_two(np.array([1.0, 1.0]), HalfSpace([1, 0], 0.0), HalfSpace([0, 1], 0.0))
    np.testing.assert_allclose(c.point, [0.0, 0.0], atol=1e-15)
    assert c.active_set == (0, 1)
    np.testing.assert_allclose(c.multipliers, [1.0, 1.0])


def test_project_intersection_examples():
    s = project_intersection(np.array([2.0, 3.0]), [HalfSpace([1, 0], 0.0)])
    np.testing.assert_array_equal(s.point, [0.0, 3.0])
    x0 = np.array([2.0, 3.0])
    s = project_intersection(x0, [HalfSpace([0, 0], 0.0), HalfSpace([0, 0], 1.0)])
    np.testing.assert_array_equal(s.point, x0)
    assert s.active_set == ()


def test_too_many_halfspaces():
    with pytest.raises(ValueError):
        project_intersection(np.zeros(2), [HalfSpace([1, 0], 1.0)] * 5)


def test_infeasible_intersection():
    hs = [HalfSpace([1.0, 0.0], -1.0), HalfSpace([-1.0, 0.0], -1.0)]
    with pytest.raises(InfeasibleIntersectionError) as info:
        project_intersection(np.zeros(2), hs)
    assert len(info.value.halfspaces) == 2
    with pytest.raises(InfeasibleIntersectionError):
        project_two(np.zeros(2), hs[0], hs[1])


def test_parallel_normals_fall_back():
    cn, qn = HalfSpace([1.0, 0.0], 1.0), HalfSpace([2.0, 0.0], 0.5)
    s = project_two(np.array([3.0, 1.0]), cn, qn)
    np.testing.assert_allclose(s.point, [0.25, 1.0], atol=1e-14)
    assert kkt_certified(s, np.array([3.0, 1.0]), [cn, qn])


def test_kkt_solution_invariants(rng):
    for _ in range(500):
        dim = int(rng.integers(2, 6))
        hs = random_halfspaces(rng, dim, int(rng.integers(1, 5)))
        x0 = 3 * rng.standard_normal(dim)
        s = project_intersection(x0, hs)
        recon = x0 - sum((m * hs[j].normal for j, m in zip(s.active_set, s.multipliers)), np.zeros(dim))
        np.testing.assert_allclose(s.point, recon, atol=1e-10 * (1 + np.abs(x0).max()))
        assert all(m >= 0 for m in s.multipliers)
        assert all(h.excess(s.point) <= 1e-10 for h in hs)
        assert kkt_certified(s, x0, hs)
        res = kkt_residuals(s, x0, hs)
        assert res["negativity"] == 0.0


@given(st.integers(0, 2**32 - 1))
def test_project_two_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(1, 6))
    hs = random_halfspaces(rng, dim, 2)
    x0 = 3 * rng.standard_normal(dim)
    a = project_two(x0, hs[0], hs[1])
    b = project_intersection(x0, hs)
    assert np.max(np.abs(a.point - b.point)) <= 1e-10


def _subset_oracle(x0, hs):
    # closest feasible point among the projections onto every face's affine hull
    A = np.array([h.normal for h in hs])
    b = np.array([h.offset for h in hs])
    best, best_d = None, np.inf
    for k in range(len(hs) + 1):
        for S in combinations(range(len(hs)), k):
            if S:
                AS = A[list(S)]
                mu = np.linalg.lstsq(AS @ AS.T, AS @ x0 - b[list(S)], rcond=None)[0]
                p = x0 - AS.T @ mu
            else:
                p = x0.copy()
            if np.all(A @ p - b <= 1e-9 * (1 + np.abs(b).max())):
                d = np.linalg.norm(p - x0)
                if d < best_d:
                    best, best_d = p, d
    return best


def test_three_halfspaces_3d_match_subset_oracle(rng):
    for _ in range(300):
        normals = rng.standard_normal((3, 3))
        hs = [HalfSpace(a, float(rng.uniform(0.0, 1.0))) for a in normals]
        x0 = 3 * rng.standard_normal(3)
        s = project_intersection(x0, hs)
        assert np.linalg.norm(s.point - _subset_oracle(x0, hs)) <= 1e-6


def test_three_halfspaces_2d_match_grid_oracle(rng):
    for _ in range(100):
        hs = random_halfspaces(rng, 2, 3)
        x0 = 3 * rng.standard_normal(2)
        s = project_intersection(x0, hs)
        inside = project_intersection(np.zeros(2), hs).point
        assert np.linalg.norm(s.point - grid_projection_2d(x0, hs, inside)) <= 1e-6


def test_grid_oracle_on_known_polygon():
    hs = [HalfSpace([1.0, 0.0], 0.0), HalfSpace([0.0, 1.0], 0.0), HalfSpace([1.0, 1.0], -1.0)]
    ref = grid_projection_2d(np.array([1.0, -3.0]), hs, np.array([-1.0, -1.0]))
    np.testing.assert_allclose(ref, [0.0, -3.0], atol=1e-9)


def test_projection_firmly_nonexpansive_and_idempotent(rng):
    hs = random_halfspaces(rng, 3, 4)
    worst = -np.inf
    for _ in range(1000):
        x, y = 3 * rng.standard_normal((2, 3))
        px, py = project_intersection(x, hs).point, project_intersection(y, hs).point
        d = px - py
        worst = max(worst, d @ d - d @ (x - y))
        np.testing.assert_allclose(project_intersection(px, hs).point, px, atol=1e-12)
    assert worst <= 1e-8


def test_project_bisector_pair():
    x0, xn, yn = np.array([2.0, 1.0]), np.array([1.0, 0.0]), np.array([-1.0, 0.0])
    s = project_bisector_pair(x0, xn, yn)
    np.testing.assert_allclose(s.point, [0.0, 1.0], atol=1e-15)
