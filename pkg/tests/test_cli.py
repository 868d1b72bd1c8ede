import subprocess
import sys

import numpy as np
import pytest

from hybridproj.cli import EXIT_BAD_TRACE, EXIT_USAGE, main
from hybridproj.instances import ball_vi_2d, box_edge_2d, shrink_1d
from hybridproj.io import dump_problem, problem_to_dict


@pytest.fixture
def shrink_file(tmp_path):
    path = tmp_path / "shrink.json"
    dump_problem(shrink_1d().problem, path)
    return path


def _final(out):
    line = next(l for l in out.splitlines() if l.startswith("final:"))
    return np.array([float(v) for v in line.split("[", 1)[1].rstrip("]").split(",")])


def test_solve_shrink(shrink_file, tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    code = main(["solve", "--problem", str(shrink_file), "--alpha", "0", "--tol", "1e-8",
                 "--trace", str(trace), "--threads", "1"])
    out = capsys.readouterr().out
    assert code == 0
    assert "status: converged" in out
    assert abs(_final(out)[0]) <= 2e-8

    assert main(["trace-summary", "--trace", str(trace)]) == 0
    out = capsys.readouterr().out
    assert "fejer: monotone" in out
    rows = out.split("n,step,dist_y,fejer\n", 1)[1].strip().splitlines()
    assert 27 <= len(rows) <= 30
    assert len(rows) == len(trace.read_text().splitlines()) - 1


def test_solve_uses_problem_schedules(tmp_path, capsys):
    doc = problem_to_dict(shrink_1d().problem)
    doc["schedules"] = {"alpha": {"kind": "constant", "value": 0.0}}
    import json
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    assert main(["solve", "--problem", str(path), "--threads", "1"]) == 0
    assert "iterations: 28" in capsys.readouterr().out


def test_solve_lambda_out_of_range(tmp_path, capsys):
    path = tmp_path / "vi.json"
    dump_problem(ball_vi_2d().problem, path)
    assert main(["solve", "--problem", str(path), "--variant", "alg34", "--lambda", "5"]) == EXIT_USAGE
    assert "lambda out of (0, 2*alpha)" in capsys.readouterr().err


def test_solve_minnorm_with_maps(shrink_file, capsys):
    assert main(["solve", "--problem", str(shrink_file), "--variant", "minnorm"]) == EXIT_USAGE


def test_solve_max_iterations(tmp_path, capsys):
    path = tmp_path / "box.json"
    dump_problem(box_edge_2d().problem, path)
    assert main(["solve", "--problem", str(path), "--max-iter", "3", "--threads", "1"]) == 2
    assert "status: max_iterations" in capsys.readouterr().out


def test_solve_breakdown_exit(shrink_file, tmp_path, monkeypatch, capsys):
    from hybridproj import engine
    from hybridproj.halfspaces import InfeasibleIntersectionError

    def boom(x0, hs):
        raise InfeasibleIntersectionError("empty", hs)

    monkeypatch.setattr(engine, "_project_anchor", boom)
    trace = tmp_path / "t.jsonl"
    assert main(["solve", "--problem", str(shrink_file), "--trace", str(trace)]) == 3
    assert "numerical_breakdown" in trace.read_text()


def test_solve_bad_problem_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 2, "feasible_set": {"kind": "torus"}, "x0": [0, 0]}')
    assert main(["solve", "--problem", str(path)]) == EXIT_USAGE
    assert "$.feasible_set.kind" in capsys.readouterr().err
    assert main(["solve", "--problem", str(tmp_path / "missing.json")]) == EXIT_USAGE


def test_bad_flags_exit_usage(capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["verify", "--suite", "nothing"])
    assert info.value.code == EXIT_USAGE


def test_verify_zero_samples(capsys):
    assert main(["verify", "--samples", "0"]) == EXIT_USAGE


def test_verify_suites(capsys):
    assert main(["verify", "--suite", "projections", "--samples", "200"]) == 0
    out = capsys.readouterr().out
    assert "firm nonexpansive P_C" in out and "FAIL" not in out
    assert main(["verify", "--suite", "projector", "--samples", "500"]) == 0
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if "closed form vs enumeration" in l)
    assert float(line.split("max slack ")[1].split()[0]) <= 1e-10


def test_verify_reports_failures(monkeypatch, capsys):
    from hybridproj import cli
    from hybridproj.verify import PropertyCheck

    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: [PropertyCheck("x", "broken", 1.0, 0.0)])
    assert main(["verify", "--suite", "projections"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_trace_summary_errors(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert main(["trace-summary", "--trace", str(empty)]) == EXIT_BAD_TRACE
    assert main(["trace-summary", "--trace", str(tmp_path / "missing.jsonl")]) == EXIT_BAD_TRACE


def test_trace_summary_detects_non_monotone(tmp_path, capsys):
    path = tmp_path / "t.jsonl"
    path.write_text(
        '{"n":0,"step":1,"dist_y":1,"fejer":0.5,"residual":1}\n'
        '{"n":1,"step":1,"dist_y":1,"fejer":0.2,"residual":1}\n'
        '{"summary":true,"status":"max_iterations","iterations":2,"final":[0]}\n'
    )
    assert main(["trace-summary", "--trace", str(path)]) == 0
    assert "fejer: not monotone" in capsys.readouterr().out


def test_threads_env_fallback(shrink_file, monkeypatch, capsys):
    monkeypatch.setenv("SOLVER_THREADS", "2")
    assert main(["solve", "--problem", str(shrink_file)]) == 0
    monkeypatch.setenv("SOLVER_THREADS", "zero")
    assert main(["solve", "--problem", str(shrink_file)]) == EXIT_USAGE


def test_console_entry_point(shrink_file):
    proc = subprocess.run([sys.executable, "-m", "hybridproj.cli", "solve", "--problem", str(shrink_file)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "status: converged" in proc.stdout
