"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line; the lines are printed at the end
of the session (see ``conftest.py``) and also immediately when run with ``-s``.
Run standalone with ``python tests/test_acceptance.py``.
"""
import math
import os
import time
from dataclasses import replace

import numpy as np
import pytest

from hybridproj.engine import Status, solve, terminal_residuals
from hybridproj.instances import minnorm_6d, regression_set
from hybridproj.io import TraceWriter
from hybridproj.verify import check_projector, check_resolvents

RESULTS = {}


def report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS[number] = line
    print(line)
    return ok


@pytest.fixture(scope="module")
def regression_runs():
    runs = []
    start = time.perf_counter()
    for case in regression_set():
        runs.append((case, solve(case.problem, replace(case.params, threads=1))))
    return runs, time.perf_counter() - start


def test_criterion_1_strong_convergence(regression_runs):
    runs, elapsed = regression_runs
    dims = sorted({case.problem.dim for case, _ in runs})
    names = {case.name for case, _ in runs}
    errors = {case.name: float(np.linalg.norm(res.x - case.expected)) for case, res in runs}
    within_budget = all(res.iterations <= 100_000 for _, res in runs)
    mixed = [c for c, _ in runs if c.problem.bifunctions and c.problem.ism_ops and c.problem.maps]
    ok = (
        len(runs) >= 5
        and dims[0] >= 1 and dims[-1] <= 10
        and {"shrink_1d", "two_balls_2d"} <= names
        and any(len(c.problem.bifunctions) == len(c.problem.ism_ops) == len(c.problem.maps) == 2
                and c.problem.witness is not None for c in mixed)
        and max(errors.values()) <= 1e-4
        and within_budget
        and elapsed < 60.0
    )
    report(1, ok, f"{len(runs)} instances in dims {dims}, max |x - P_F x0| = {max(errors.values()):.2e} "
                  f"(<= 1e-4), {elapsed:.1f} s (< 60 s)")
    assert ok, errors


def test_criterion_2_fejer_monotone(regression_runs):
    runs, _ = regression_runs
    worst, violations, steps = 0.0, 0, 0
    for case, res in runs:
        assert res.params.trace_every == 1
        dist = [r.fejer for r in res.trace] + [float(np.linalg.norm(res.x - case.problem.x0))]
        for a, b in zip(dist, dist[1:]):
            steps += 1
            worst = max(worst, a - b)
            violations += b < a - 1e-10
        violations += sum(v.kind == "fejer" for v in res.violations)
    ok = violations == 0
    report(2, ok, f"{violations} violations over {steps} steps, largest decrease {worst:.1e} (slack 1e-10)")
    assert ok


def test_criterion_3_witness_containment(regression_runs):
    runs, _ = regression_runs
    witnessed = [(c, r) for c, r in runs if c.problem.witness is not None]
    worst = max(r.witness_slack for _, res in witnessed for r in res.trace)
    violations = sum(v.kind == "containment" for _, res in witnessed for v in res.violations)
    ok = bool(witnessed) and violations == 0 and worst <= 1e-8
    report(3, ok, f"{len(witnessed)} witnessed runs, max witness slack {worst:.1e} (<= 1e-8), "
                  f"{violations} violations")
    assert ok


def test_criterion_4_projector_oracles():
    checks = {c.name: c for c in check_projector(samples=10_000, seed=42)}
    closed = checks["closed form vs enumeration"]
    grid = checks["enumeration vs dense grid (2-D, three half-spaces)"]
    kkt = [c for name, c in checks.items() if name.startswith("uncertified KKT")]
    ok = all(c.passed for c in checks.values())
    report(4, ok, f"project_two vs project_intersection {closed.max_slack:.1e} (<= 1e-10, 10^4 cases), "
                  f"grid oracle {grid.max_slack:.1e} (<= 1e-6, 100 cases), "
                  f"{int(sum(c.max_slack for c in kkt))} uncertified KKT outputs")
    assert ok


@pytest.fixture(scope="module")
def resolvent_checks():
    return check_resolvents(samples=1000, seed=42)


def test_criterion_5_resolvent_properties(resolvent_checks):
    checks = [c for c in resolvent_checks if "ism" not in c.name and "I - lam A" not in c.name]
    firm = max(c.max_slack for c in checks if c.name.startswith("firm"))
    zero = next(c for c in checks if c.name.startswith("zero bifunction"))
    lin = next(c for c in checks if c.name.startswith("linear resolvent"))
    ok = all(c.passed for c in checks) and {"zero", "linear_monotone", "convex_difference"} <= {
        c.name.split("[")[1].split()[0] for c in checks if c.name.startswith("firm")}
    report(5, ok, f"firm nonexpansiveness slack {firm:.1e} (<= 1e-8), zero resolvent vs P_C "
                  f"{zero.max_slack:.1e} (<= 1e-12), linear substitution {lin.max_slack:.1e} (<= 1e-10)")
    assert ok


def test_criterion_6_operator_certificates(resolvent_checks):
    checks = [c for c in resolvent_checks if "ism" in c.name or "I - lam A" in c.name]
    worst = max(c.max_slack for c in checks)
    ok = len(checks) >= 6 and all(c.passed and c.threshold <= 1e-8 for c in checks)
    report(6, ok, f"{len(checks) // 2} operators, max slack {worst:.1e} (<= 1e-8, 1000 pairs each)")
    assert ok


def test_criterion_7_min_norm_least_squares():
    case = minnorm_6d()
    op = case.problem.ism_ops[0]
    x0 = case.problem.x0
    # the system is A x = 0 with A x = G^T (G x - beta); recover G, beta from A
    J = np.column_stack([op.apply(e) - op.apply(np.zeros(6)) for e in np.eye(6)])
    rhs = -op.apply(np.zeros(6))
    oracle = x0 + np.linalg.lstsq(J, rhs - J @ x0, rcond=None)[0]
    res = solve(case.problem, case.params)
    err = float(np.linalg.norm(res.x - oracle))
    ok = err <= 1e-4
    report(7, ok, f"min-norm limit vs least-squares oracle {err:.1e} (<= 1e-4) after {res.iterations} iterations")
    assert ok


def _trace_bytes(case, threads, path):
    writer = TraceWriter(path)
    res = solve(case.problem, replace(case.params, threads=threads), on_record=writer)
    writer.finish(res)
    return path.read_bytes()


def test_criterion_8_deterministic_traces(tmp_path):
    counts = sorted({1, 2, os.cpu_count() or 1, max(4, os.cpu_count() or 1)})
    mismatched = []
    for case in regression_set():
        blobs = {t: _trace_bytes(case, t, tmp_path / f"{case.name}_{t}.jsonl") for t in counts}
        if len(set(blobs.values())) != 1:
            mismatched.append(case.name)
    ok = not mismatched
    report(8, ok, f"traces byte-identical for threads {counts} on {len(regression_set())} instances"
                  + (f"; mismatched: {mismatched}" if mismatched else ""))
    assert ok


def test_criterion_9_terminal_residuals(regression_runs):
    runs, _ = regression_runs
    worst, converged, bad = 0.0, 0, []
    for case, res in runs:
        if res.status is not Status.CONVERGED:
            continue
        converged += 1
        tr = terminal_residuals(case.problem, res.params, res.x)
        r = max(tr["maps"], tr["resolvents"])
        worst = max(worst, r)
        if r > 10 * res.params.stop_tol:
            bad.append(case.name)
    ok = converged > 0 and not bad
    report(9, ok, f"{converged} converged runs, max terminal residual {worst:.1e} (<= 10 * stop_tol = 1e-7)")
    assert ok


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
