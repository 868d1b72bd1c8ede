"""Command-line front end: ``hybridproj {solve,verify,trace-summary}``."""
import argparse
import sys

import numpy as np

from .engine import Status, solve
from .io import ProblemFileError, TraceFormatError, TraceWriter, load_problem, read_trace
from .operators import CertificationError, ResolventNonConvergence
from .parallel import default_threads
from .problem import ConstantSchedule, ParameterError, SolverParams, Variant
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_MAX_ITER = 2
EXIT_BREAKDOWN = 3
EXIT_USAGE = 64
EXIT_BAD_TRACE = 65

_STATUS_EXIT = {
    Status.CONVERGED: EXIT_OK,
    Status.FIXED_POINT: EXIT_OK,
    Status.MAX_ITERATIONS: EXIT_MAX_ITER,
    Status.BREAKDOWN: EXIT_BREAKDOWN,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags, which collides with MaxIterations
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="hybridproj", description="Parallel hybrid projection solver.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="run the solver on a problem file")
    s.add_argument("--problem", required=True, metavar="PATH")
    s.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.MAIN.value)
    s.add_argument("--lambda", dest="lam", type=float, metavar="R")
    s.add_argument("--alpha", type=float, metavar="R", help="constant alpha_n")
    s.add_argument("--r", type=float, metavar="R", help="constant r_n")
    s.add_argument("--mu", type=float, metavar="R")
    s.add_argument("--tol", type=float, default=1e-8, metavar="R")
    s.add_argument("--max-iter", type=int, default=100_000, metavar="N")
    s.add_argument("--trace", metavar="PATH")
    s.add_argument("--threads", type=int, metavar="N", help="default: SOLVER_THREADS or all cores")
    s.add_argument("--seed", type=int, default=42, metavar="N")

    v = sub.add_parser("verify", help="run randomized property suites")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--samples", type=int, default=1000, metavar="N")
    v.add_argument("--seed", type=int, default=42, metavar="N")

    t = sub.add_parser("trace-summary", help="summarize a trace file")
    t.add_argument("--trace", required=True, metavar="PATH")
    return p


def _params(args, prob):
    sched = prob.schedules
    kw = {
        "variant": Variant(args.variant),
        "lam": args.lam,
        "mu": args.mu,
        "stop_tol": args.tol,
        "max_iter": args.max_iter,
        "threads": args.threads if args.threads is not None else default_threads(),
    }
    if args.alpha is not None:
        kw["alpha"] = ConstantSchedule(args.alpha)
    elif "alpha" in sched:
        kw["alpha"] = sched["alpha"]
    if args.r is not None:
        kw["r"] = ConstantSchedule(args.r)
    elif "r" in sched:
        kw["r"] = sched["r"]
    if "d" in sched:
        kw["d"] = sched["d"]
    return SolverParams(**kw).resolved(prob)


def _fmt(x):
    return "[" + ", ".join(repr(float(v)) for v in np.asarray(x)) + "]"


def cmd_solve(args, out=None, err=None):
    out, err = out or sys.stdout, err or sys.stderr
    try:
        prob = load_problem(args.problem, seed=args.seed)
        params = _params(args, prob)
    except (ProblemFileError, ParameterError, CertificationError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    writer = TraceWriter(args.trace) if args.trace else None
    try:
        result = solve(prob, params, on_record=writer)
    except ResolventNonConvergence as exc:
        if writer is not None:
            writer.finish_with(Status.BREAKDOWN, writer.count)
        print(f"status: {Status.BREAKDOWN.value}", file=out)
        print(f"error: {exc}", file=err)
        return EXIT_BREAKDOWN
    if writer is not None:
        writer.finish(result)
    print(f"status: {result.status.value}", file=out)
    print(f"iterations: {result.iterations}", file=out)
    print(f"final: {_fmt(result.x)}", file=out)
    if result.breakdown is not None:
        print(f"error: {result.breakdown}", file=err)
    if result.violations:
        print(f"monitor violations: {len(result.violations)}", file=err)
    return _STATUS_EXIT[result.status]


def cmd_verify(args, out=None, err=None):
    out, err = out or sys.stdout, err or sys.stderr
    if args.samples < 1:
        print("error: --samples must be positive", file=err)
        return EXIT_USAGE
    checks = run_suite(args.suite, samples=args.samples, seed=args.seed)
    for c in checks:
        mark = "ok  " if c.passed else "FAIL"
        print(f"{mark} [{c.suite}] {c.name}: max slack {c.max_slack:.3e} (limit {c.threshold:.0e})", file=out)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} properties hold", file=out)
    return EXIT_OK if failed == 0 else 1


def fejer_verdict(records, slack=1e-10):
    dist = [r["fejer"] for r in records]
    ok = all(b >= a - slack for a, b in zip(dist, dist[1:]))
    return "monotone" if ok else "not monotone"


def cmd_trace_summary(args, out=None, err=None):
    out, err = out or sys.stdout, err or sys.stderr
    try:
        records, summary = read_trace(args.trace)
    except TraceFormatError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_BAD_TRACE
    print(f"iterations: {summary['iterations']}", file=out)
    print(f"status: {summary['status']}", file=out)
    if records:
        last = records[-1]
        print(f"final residual: {last['residual']!r}", file=out)
        print(f"final step: {last['step']!r}", file=out)
    print(f"fejer: {fejer_verdict(records)}", file=out)
    print("n,step,dist_y,fejer", file=out)
    for r in records:
        print(f"{r['n']},{r['step']!r},{r['dist_y']!r},{r['fejer']!r}", file=out)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "trace-summary": cmd_trace_summary}


def main(argv=None):
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
