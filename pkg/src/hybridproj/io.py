"""Problem files (JSON) and trace files (JSON lines).

A problem file looks like::

    {
      "dim": 2,
      "feasible_set": {"kind": "ball", "params": {"center": [0, 0], "radius": 1}},
      "bifunctions": [],
      "ism_operators": [{"kind": "residual", "params": {"map": {...}}}],
      "nonexpansive_maps": [{"kind": "identity", "params": {}}],
      "x0": [2, 0],
      "witness": [0.1, -0.2],
      "schedules": {"alpha": {"kind": "constant", "value": 0.5}, "d": 1e-6}
    }

Reals are written with ``repr`` precision, so a dump followed by a load
reproduces every numeric field bit for bit.
"""
import json
import math

import jsonschema
import numpy as np

from .operators import (
    AffineContraction,
    AffineMonotone,
    ConvexDifference,
    IdentityMap,
    LinearMonotone,
    PlaneRotation,
    ProjectionOnto,
    ResidualOfNonexpansive,
    ZeroBifunction,
    ZeroOperator,
)
from .problem import ConstantSchedule, HarmonicSchedule, ProblemInstance
from .sets import AffineSubspace, Ball, Box, HalfSpace, WholeSpace


class ProblemFileError(ValueError):
    """Invalid problem document; ``path`` locates the offending entry."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class TraceFormatError(ValueError):
    """A trace file that does not follow the JSON-lines contract."""


# ---------------------------------------------------------------------------
# schema

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_MAT = {"type": "array", "items": _VEC, "minItems": 1}


def _entry(kinds):
    """Schema of ``{kind, params}`` where ``kinds`` maps kind -> params properties."""
    branches = []
    for kind, (props, required) in kinds.items():
        branches.append({
            "if": {"properties": {"kind": {"const": kind}}},
            "then": {"properties": {"params": {
                "type": "object",
                "properties": props,
                "required": required,
                "additionalProperties": False,
            }}},
        })
    return {
        "type": "object",
        "properties": {"kind": {"enum": sorted(kinds)}, "params": {"type": "object"}},
        "required": ["kind"],
        "additionalProperties": False,
        "allOf": branches,
    }


SET_KINDS = {
    "whole_space": ({}, []),
    "box": ({"lower": _VEC, "upper": _VEC}, ["lower", "upper"]),
    "ball": ({"center": _VEC, "radius": _NUM}, ["center", "radius"]),
    "halfspace": ({"normal": _VEC, "offset": _NUM}, ["normal", "offset"]),
    "affine_subspace": (
        {"basepoint": _VEC, "directions": {"type": "array", "items": _VEC}},
        ["basepoint"],
    ),
}
SET_SCHEMA = _entry(SET_KINDS)

MAP_KINDS = {
    "identity": ({}, []),
    "projection": ({"set": SET_SCHEMA}, ["set"]),
    "plane_rotation": (
        {
            "angle": _NUM,
            "axes": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
            "center": _VEC,
        },
        ["angle"],
    ),
    "affine_contraction": ({"M": _MAT, "b": _VEC}, ["M", "b"]),
}
MAP_SCHEMA = _entry(MAP_KINDS)

ISM_KINDS = {
    "zero": ({}, []),
    "affine_monotone": ({"M": _MAT, "b": _VEC}, ["M", "b"]),
    "residual": ({"map": MAP_SCHEMA}, ["map"]),
}
BIFUNCTION_KINDS = {
    "zero": ({}, []),
    "linear_monotone": ({"P": _MAT, "q": _VEC}, ["P", "q"]),
    "convex_difference": ({"Q": _MAT, "c": _VEC}, ["Q", "c"]),
}

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
SCHEDULE_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"kind": {"const": "constant"}, "value": _NUM},
            "required": ["kind", "value"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"kind": {"const": "harmonic"}, "start": _NUM, "limit": _NUM},
            "required": ["kind", "start", "limit"],
            "additionalProperties": False,
        },
    ]
}

PROBLEM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "dim": {"type": "integer", "minimum": 1},
        "feasible_set": SET_SCHEMA,
        "bifunctions": {"type": "array", "items": _entry(BIFUNCTION_KINDS)},
        "ism_operators": {"type": "array", "items": _entry(ISM_KINDS)},
        "nonexpansive_maps": {"type": "array", "items": MAP_SCHEMA},
        "x0": _VEC,
        "witness": _VEC,
        "schedules": {
            "type": "object",
            "properties": {"alpha": SCHEDULE_SCHEMA, "r": SCHEDULE_SCHEMA, "d": _POSITIVE},
            "additionalProperties": False,
        },
    },
    "required": ["dim", "feasible_set", "x0"],
    "additionalProperties": False,
}

_VALIDATOR = jsonschema.Draft202012Validator(PROBLEM_SCHEMA)


def _json_path(parts):
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def validate_document(doc):
    """Raise :class:`ProblemFileError` for the first schema violation.

    Errors are ordered by location so the report is deterministic; an unknown
    ``kind`` is reported at the ``kind`` field itself.
    """
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if not errors:
        return
    # prefer the deepest error; with if/then branches it is the specific one
    err = max(errors, key=lambda e: len(e.absolute_path))
    raise ProblemFileError(err.message, _json_path(err.absolute_path))


# ---------------------------------------------------------------------------
# objects <-> documents


def _floats(a):
    return np.asarray(a, dtype=np.float64).tolist()


def set_to_dict(cset):
    k = cset.kind
    if k == "whole_space":
        params = {}
    elif k == "box":
        params = {"lower": _floats(cset.lower), "upper": _floats(cset.upper)}
    elif k == "ball":
        params = {"center": _floats(cset.center), "radius": float(cset.radius)}
    elif k == "halfspace":
        params = {"normal": _floats(cset.normal), "offset": float(cset.offset)}
    elif k == "affine_subspace":
        params = {"basepoint": _floats(cset.basepoint), "directions": _floats(cset.directions)}
    else:
        raise TypeError(f"cannot serialize set kind {k!r}")
    return {"kind": k, "params": params}


def set_from_dict(doc, dim):
    k, p = doc["kind"], doc.get("params", {})
    if k == "whole_space":
        return WholeSpace(dim)
    if k == "box":
        return Box(p["lower"], p["upper"])
    if k == "ball":
        return Ball(p["center"], p["radius"])
    if k == "halfspace":
        return HalfSpace(p["normal"], p["offset"])
    if k == "affine_subspace":
        dirs = p.get("directions", [])
        return AffineSubspace(p["basepoint"], np.reshape(np.asarray(dirs, dtype=np.float64), (-1, dim)))
    raise ValueError(f"unknown set kind {k!r}")


def map_to_dict(S):
    k = S.kind
    if k == "identity":
        params = {}
    elif k == "projection":
        params = {"set": set_to_dict(S.cset)}
    elif k == "plane_rotation":
        params = {"angle": float(S.angle), "axes": list(S.axes), "center": _floats(S.center)}
    elif k == "affine_contraction":
        params = {"M": _floats(S.M), "b": _floats(S.b)}
    else:
        raise TypeError(f"cannot serialize map kind {k!r}")
    return {"kind": k, "params": params}


def map_from_dict(doc, dim, seed):
    k, p = doc["kind"], doc.get("params", {})
    if k == "identity":
        return IdentityMap(dim)
    if k == "projection":
        return ProjectionOnto(set_from_dict(p["set"], dim), seed=seed)
    if k == "plane_rotation":
        return PlaneRotation(dim, p["angle"], tuple(p.get("axes", (0, 1))), p.get("center"), seed=seed)
    if k == "affine_contraction":
        return AffineContraction(p["M"], p["b"], seed=seed)
    raise ValueError(f"unknown map kind {k!r}")


def ism_to_dict(A):
    k = A.kind
    if k == "zero":
        params = {}
    elif k == "affine_monotone":
        params = {"M": _floats(A.M), "b": _floats(A.b)}
    elif k == "residual":
        params = {"map": map_to_dict(A.T)}
    else:
        raise TypeError(f"cannot serialize operator kind {k!r}")
    return {"kind": k, "params": params}


def ism_from_dict(doc, dim, seed):
    k, p = doc["kind"], doc.get("params", {})
    if k == "zero":
        return ZeroOperator(dim)
    if k == "affine_monotone":
        return AffineMonotone(p["M"], p["b"])
    if k == "residual":
        return ResidualOfNonexpansive(map_from_dict(p["map"], dim, seed))
    raise ValueError(f"unknown operator kind {k!r}")


def bifunction_to_dict(f):
    k = f.kind
    if k == "zero":
        params = {}
    elif k == "linear_monotone":
        params = {"P": _floats(f.P), "q": _floats(f.q)}
    elif k == "convex_difference":
        params = {"Q": _floats(f.Q), "c": _floats(f.c)}
    else:
        raise TypeError(f"cannot serialize bifunction kind {k!r}")
    return {"kind": k, "params": params}


def bifunction_from_dict(doc, dim, seed):
    k, p = doc["kind"], doc.get("params", {})
    if k == "zero":
        return ZeroBifunction(dim)
    if k == "linear_monotone":
        return LinearMonotone(p["P"], p["q"], seed=seed)
    if k == "convex_difference":
        return ConvexDifference(p["Q"], p["c"], seed=seed)
    raise ValueError(f"unknown bifunction kind {k!r}")


def schedule_to_dict(s):
    if isinstance(s, ConstantSchedule):
        return {"kind": "constant", "value": float(s.value)}
    if isinstance(s, HarmonicSchedule):
        return {"kind": "harmonic", "start": float(s.start), "limit": float(s.limit)}
    raise TypeError(f"cannot serialize schedule {s!r}")


def schedule_from_dict(doc):
    if doc["kind"] == "constant":
        return ConstantSchedule(float(doc["value"]))
    return HarmonicSchedule(float(doc["start"]), float(doc["limit"]))


def problem_to_dict(prob):
    doc = {
        "dim": prob.dim,
        "feasible_set": set_to_dict(prob.feasible_set),
        "bifunctions": [bifunction_to_dict(f) for f in prob.bifunctions],
        "ism_operators": [ism_to_dict(A) for A in prob.ism_ops],
        "nonexpansive_maps": [map_to_dict(S) for S in prob.maps],
        "x0": _floats(prob.x0),
    }
    if prob.name:
        doc["name"] = prob.name
    if prob.witness is not None:
        doc["witness"] = _floats(prob.witness)
    if prob.schedules:
        sched = {}
        for key in ("alpha", "r"):
            if key in prob.schedules:
                sched[key] = schedule_to_dict(prob.schedules[key])
        if "d" in prob.schedules:
            sched["d"] = float(prob.schedules["d"])
        doc["schedules"] = sched
    return doc


def _build(path, fn, *args):
    try:
        return fn(*args)
    except ProblemFileError:
        raise
    except (ValueError, TypeError, KeyError) as err:
        raise ProblemFileError(str(err), path) from err


def problem_from_dict(doc, seed=42):
    """Validate ``doc`` and construct the :class:`ProblemInstance`.

    ``seed`` drives the random pairs used to certify operators at construction.
    """
    validate_document(doc)
    dim = doc["dim"]
    C = _build("$.feasible_set", set_from_dict, doc["feasible_set"], dim)
    bifs = [_build(f"$.bifunctions[{j}]", bifunction_from_dict, e, dim, seed)
            for j, e in enumerate(doc.get("bifunctions", []))]
    ops = [_build(f"$.ism_operators[{j}]", ism_from_dict, e, dim, seed)
           for j, e in enumerate(doc.get("ism_operators", []))]
    maps = [_build(f"$.nonexpansive_maps[{j}]", map_from_dict, e, dim, seed)
            for j, e in enumerate(doc.get("nonexpansive_maps", []))]
    schedules = {}
    for key in ("alpha", "r"):
        if key in doc.get("schedules", {}):
            schedules[key] = schedule_from_dict(doc["schedules"][key])
    if "d" in doc.get("schedules", {}):
        schedules["d"] = float(doc["schedules"]["d"])
    return _build(
        "$", ProblemInstance, dim, C, doc["x0"], bifs, ops, maps,
        doc.get("witness"), doc.get("name", ""), schedules,
    )


def load_problem(path, seed=42):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as err:
        raise ProblemFileError(f"cannot read problem file: {err.strerror}") from err
    except json.JSONDecodeError as err:
        raise ProblemFileError(f"invalid JSON at line {err.lineno} column {err.colno}: {err.msg}") from err
    return problem_from_dict(doc, seed=seed)


def dump_problem(prob, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_dict(prob), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# traces


def _line(obj):
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def summary_record(status, iterations, final):
    """Terminal trace line; ``final`` may be None when the run aborted."""
    return {
        "summary": True,
        "status": getattr(status, "value", status),
        "iterations": int(iterations),
        "final": None if final is None else _floats(final),
    }


class TraceWriter:
    """Write one JSON object per trace record, then a summary line.

    Usable as the ``on_record`` callback of :func:`hybridproj.engine.solve`.
    """

    def __init__(self, path, timings=False):
        self._fh = open(path, "w", encoding="utf-8")
        self.timings = timings
        self.count = 0

    def __call__(self, rec):
        self._fh.write(_line(rec.to_dict(timings=self.timings)))
        self.count += 1

    def finish(self, result):
        self.finish_with(result.status, result.iterations, result.x)

    def finish_with(self, status, iterations, final=None):
        self._fh.write(_line(summary_record(status, iterations, final)))
        self.close()

    def close(self):
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


TRACE_FIELDS = ("n", "step", "dist_y", "fejer", "residual")


def read_trace(path):
    """Parse a trace file into ``(records, summary)``.

    Raises
    ------
    TraceFormatError
        On unreadable or empty files, non-JSON lines, records missing the
        required fields, a missing or misplaced summary line, or a record
        count that disagrees with the summary.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as err:
        raise TraceFormatError(f"cannot read trace: {err}") from err
    if not lines:
        raise TraceFormatError("trace file is empty")
    parsed = []
    for no, text in enumerate(lines, 1):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as err:
            raise TraceFormatError(f"line {no}: not JSON ({err.msg})") from err
        if not isinstance(obj, dict):
            raise TraceFormatError(f"line {no}: expected an object")
        parsed.append(obj)
    *records, summary = parsed
    if not summary.get("summary"):
        raise TraceFormatError("last line is not a summary record")
    for no, rec in enumerate(records, 1):
        if rec.get("summary"):
            raise TraceFormatError(f"line {no}: summary record before the end")
        missing = [f for f in TRACE_FIELDS if f not in rec]
        if missing:
            raise TraceFormatError(f"line {no}: missing fields {missing}")
        bad = [f for f in TRACE_FIELDS[1:] if not isinstance(rec[f], (int, float)) or not math.isfinite(rec[f])]
        if bad or not isinstance(rec["n"], int):
            raise TraceFormatError(f"line {no}: non-numeric fields {bad or ['n']}")
    for key in ("status", "iterations", "final"):
        if key not in summary:
            raise TraceFormatError(f"summary missing {key!r}")
    if summary["iterations"] != len(records):
        raise TraceFormatError(
            f"summary reports {summary['iterations']} iterations but the trace has {len(records)} records"
        )
    return records, summary
