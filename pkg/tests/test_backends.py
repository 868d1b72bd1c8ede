import json
import os
import subprocess
import sys

import numpy as np
import pytest

from hybridproj import kernels
from hybridproj._jit import backend_name

SCRIPT = """
import json
from hybridproj import backend_name, solve
from hybridproj.instances import mixed_segment_3d, ball_vi_2d
out = {"backend": backend_name()}
for case in (mixed_segment_3d(), ball_vi_2d()):
    res = solve(case.problem, case.params)
    out[case.name] = [res.iterations, res.x.tolist()]
print(json.dumps(out))
"""


def _run(disable):
    env = dict(os.environ)
    env.pop("NUMBA_DISABLE_JIT", None)
    env["HYBRIDPROJ_DISABLE_JIT"] = "1" if disable else "0"
    proc = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def test_numpy_fallback_matches_compiled_kernels():
    fast, slow = _run(False), _run(True)
    assert fast["backend"] == "numba" and slow["backend"] == "numpy"
    for name in ("mixed_segment_3d", "ball_vi_2d"):
        assert abs(fast[name][0] - slow[name][0]) <= 1
        np.testing.assert_allclose(fast[name][1], slow[name][1], atol=1e-10)


def test_backend_flag_in_process():
    assert backend_name() in ("numba", "numpy")


def test_gauss_solve_kernel(rng):
    A = rng.standard_normal((4, 4)) + 4 * np.eye(4)
    b = rng.standard_normal(4)
    x, ok = kernels.gauss_solve(A, b, 1e-12)
    assert ok
    np.testing.assert_allclose(A @ x, b, atol=1e-12)
