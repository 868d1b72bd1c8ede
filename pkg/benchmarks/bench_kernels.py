"""Compare the compiled kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the switch is read at
import time::

    python benchmarks/bench_kernels.py [--repeat 5]

Reports the best wall time per workload and the speedup of numba over numpy.
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from hybridproj import backend_name, solve
from hybridproj.halfspaces import project_intersection, project_two
from hybridproj.instances import ball_cap_10d, mixed_segment_3d
from hybridproj.operators import LinearMonotone, resolvent
from hybridproj.sets import Box
from hybridproj.verify import random_halfspaces

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
pairs = [(random_halfspaces(rng, 4, 2), 3 * rng.standard_normal(4)) for _ in range(2000)]
quads = [(random_halfspaces(rng, 4, 4), 3 * rng.standard_normal(4)) for _ in range(500)]
B = rng.standard_normal((5, 5))
f = LinearMonotone(B @ B.T, rng.standard_normal(5))
box = Box(-np.ones(5), np.ones(5))
points = 3 * rng.standard_normal((200, 5))

def w_two():
    for hs, x0 in pairs:
        project_two(x0, hs[0], hs[1])

def w_four():
    for hs, x0 in quads:
        project_intersection(x0, hs)

def w_resolvent():
    for x in points:
        resolvent(f, box, 1.0, x)

def w_solve_mixed():
    c = mixed_segment_3d()
    solve(c.problem, c.params)

def w_solve_cap():
    c = ball_cap_10d()
    solve(c.problem, c.params)

out = {"backend": backend_name()}
for name, fn in [("project_two x2000", w_two), ("project_intersection(4) x500", w_four),
                 ("resolvent on box x200", w_resolvent), ("solve mixed_segment_3d", w_solve_mixed),
                 ("solve ball_cap_10d", w_solve_cap)]:
    fn()  # warm-up, includes compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter(); fn(); times.append(time.perf_counter() - t)
    out[name] = min(times)
print(json.dumps(out))
"""


def run_backend(disable_jit, repeat):
    env = dict(os.environ)
    env["HYBRIDPROJ_DISABLE_JIT"] = "1" if disable_jit else "0"
    env.pop("NUMBA_DISABLE_JIT", None)
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    fast = run_backend(False, args.repeat)
    slow = run_backend(True, args.repeat)
    print(f"{'workload':<32}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for key in fast:
        if key == "backend":
            continue
        print(f"{key:<32}{fast[key]:>11.4f}s{slow[key]:>11.4f}s{slow[key] / fast[key]:>9.2f}x")
    print(f"(best of {args.repeat}; total {time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
