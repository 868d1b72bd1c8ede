import json

import numpy as np
import pytest

from hybridproj.engine import solve
from hybridproj.instances import mixed_segment_3d, regression_set, shrink_1d
from hybridproj.io import (
    ProblemFileError,
    TraceFormatError,
    TraceWriter,
    dump_problem,
    load_problem,
    problem_from_dict,
    problem_to_dict,
    read_trace,
    validate_document,
)
from hybridproj.problem import ConstantSchedule, HarmonicSchedule


@pytest.mark.parametrize("case", regression_set(), ids=lambda c: c.name)
def test_problem_round_trip(case, tmp_path):
    prob = case.problem
    path = tmp_path / "p.json"
    dump_problem(prob, path)
    back = load_problem(path)
    assert problem_to_dict(back) == problem_to_dict(prob)
    np.testing.assert_array_equal(back.x0, prob.x0)
    assert [A.kind for A in back.ism_ops] == [A.kind for A in prob.ism_ops]
    if prob.witness is not None:
        np.testing.assert_array_equal(back.witness, prob.witness)


def test_round_trip_is_bitwise_for_awkward_reals(tmp_path):
    prob = shrink_1d().problem
    prob.x0 = np.array([0.1 + 0.2])
    dump_problem(prob, tmp_path / "p.json")
    assert load_problem(tmp_path / "p.json").x0[0] == 0.1 + 0.2


def test_schedules_round_trip():
    doc = problem_to_dict(mixed_segment_3d().problem)
    doc["schedules"] = {"alpha": {"kind": "harmonic", "start": 0.9, "limit": 0.3},
                        "r": {"kind": "constant", "value": 2.0}, "d": 0.5}
    prob = problem_from_dict(doc)
    assert prob.schedules["alpha"] == HarmonicSchedule(0.9, 0.3)
    assert prob.schedules["r"] == ConstantSchedule(2.0)
    assert problem_to_dict(prob)["schedules"] == doc["schedules"]


def _doc():
    return problem_to_dict(mixed_segment_3d().problem)


@pytest.mark.parametrize("mutate, path", [
    (lambda d: d["bifunctions"][0].update(kind="quartic"), "$.bifunctions[0].kind"),
    (lambda d: d.pop("x0"), "$"),
    (lambda d: d["nonexpansive_maps"][1]["params"]["set"].update(kind="cube"),
     "$.nonexpansive_maps[1].params.set.kind"),
    (lambda d: d["ism_operators"][0]["params"].update(extra=1), "$.ism_operators[0].params"),
    (lambda d: d["feasible_set"]["params"].pop("upper"), "$.feasible_set.params"),
    (lambda d: d.update(dim=0), "$.dim"),
    (lambda d: d.update(x0=[1.0, "a", 2.0]), "$.x0[1]"),
])
def test_schema_errors_carry_path(mutate, path):
    doc = _doc()
    mutate(doc)
    with pytest.raises(ProblemFileError) as info:
        validate_document(doc)
    assert info.value.path == path
    assert str(info.value).startswith(path + ":")


def test_construction_errors_carry_path():
    doc = _doc()
    doc["feasible_set"] = {"kind": "box", "params": {"lower": [1, 1, 1], "upper": [0, 0, 0]}}
    with pytest.raises(ProblemFileError) as info:
        problem_from_dict(doc)
    assert info.value.path == "$.feasible_set"
    doc = _doc()
    doc["nonexpansive_maps"][0] = {"kind": "affine_contraction",
                                   "params": {"M": [[2, 0, 0], [0, 1, 0], [0, 0, 1]], "b": [0, 0, 0]}}
    with pytest.raises(ProblemFileError) as info:
        problem_from_dict(doc)
    assert info.value.path == "$.nonexpansive_maps[0]"
    doc = _doc()
    doc["witness"] = [5.0, 5.0, 5.0]
    with pytest.raises(ProblemFileError, match="witness"):
        problem_from_dict(doc)


def test_load_problem_file_errors(tmp_path):
    with pytest.raises(ProblemFileError):
        load_problem(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ProblemFileError, match="invalid JSON"):
        load_problem(bad)


def test_trace_file_contract(tmp_path):
    case = shrink_1d()
    path = tmp_path / "t.jsonl"
    writer = TraceWriter(path)
    res = solve(case.problem, case.params, on_record=writer)
    writer.finish(res)
    lines = path.read_text().splitlines()
    assert len(lines) == res.iterations + 1
    records, summary = read_trace(path)
    assert len(records) == res.iterations
    assert summary["status"] == "converged"
    assert summary["final"] == res.x.tolist()
    assert "stage_seconds" not in json.loads(lines[0])


def test_trace_with_timings(tmp_path):
    case = shrink_1d()
    writer = TraceWriter(tmp_path / "t.jsonl", timings=True)
    writer.finish(solve(case.problem, case.params, on_record=writer))
    assert "stage_seconds" in json.loads((tmp_path / "t.jsonl").read_text().splitlines()[0])


@pytest.mark.parametrize("content", [
    "",
    "not json\n",
    '{"n":0,"step":1,"dist_y":1,"fejer":0,"residual":1}\n',
    '{"summary":true,"status":"converged","iterations":1,"final":[0]}\n',
    '{"summary":true,"status":"converged","iterations":0,"final":[0]}\n{"n":0}\n',
    '{"n":0,"step":1,"dist_y":1,"fejer":0}\n{"summary":true,"status":"converged","iterations":1,"final":[0]}\n',
])
def test_malformed_traces(tmp_path, content):
    path = tmp_path / "t.jsonl"
    path.write_text(content)
    with pytest.raises(TraceFormatError):
        read_trace(path)


def test_breakdown_summary_line(tmp_path):
    path = tmp_path / "t.jsonl"
    writer = TraceWriter(path)
    writer.finish_with("numerical_breakdown", 0)
    records, summary = read_trace(path)
    assert records == [] and summary["final"] is None
