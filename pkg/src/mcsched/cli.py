"""Command-line entry point.

Exit codes: 0 clean, 1 analytic or temporal failure (inconclusive or
unschedulable core, infeasible partition, deadline misses), 2 usage or
input error.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources

from . import __version__
from .analysis import Policy, Verdict, analyze_partition, format_bound
from .docs import (
    TaskSetDocument,
    document_to_dict,
    dumps,
    load_document,
    parse_document,
    report_to_dict,
    stats_to_dict,
    trace_to_csv,
)
from .engine import LatePolicy, PhaseMode, SimConfig, run
from .errors import SchedError
from .gantt import render_svg
from .model import MAX_TICK, Partition, hyperperiod
from .partition import InfeasibleReport, first_fit_decreasing

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
EXAMPLES = ("automobile",)


class UsageError(Exception):
    pass


def _load(path: str) -> TaskSetDocument:
    if path.startswith("example:"):
        name = path.split(":", 1)[1]
        if name not in EXAMPLES:
            raise UsageError(f"unknown bundled example {name!r}; choose from {', '.join(EXAMPLES)}")
        return parse_document(resources.files("mcsched.data").joinpath(f"{name}.json").read_text())
    if path == "-":
        return parse_document(sys.stdin.read())
    return load_document(path)


def _emit(text: str, out_path):
    if out_path:
        try:
            with open(out_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out_path}: {exc.strerror or exc}") from None
    else:
        sys.stdout.write(text)


def _apply_overrides(doc: TaskSetDocument, args) -> TaskSetDocument:
    if getattr(args, "policy", None):
        doc.policy = Policy(args.policy)
    if getattr(args, "cores", None) is not None:
        if args.cores < 1:
            raise UsageError("--cores must be >= 1")
        doc.cores = args.cores
    return doc


def _ffd(doc: TaskSetDocument):
    """First-fit decreasing over the tasks that have a period.

    Aperiodic tasks carry no utilization to pack, so they stay on the core
    the document gives them.
    """
    pinned = {}
    for t in doc.task_set:
        if not t.has_period:
            if t.id not in doc.assignment:
                raise UsageError(f"aperiodic task {t.id!r} needs a 'core' before partitioning")
            pinned[t.id] = doc.assignment[t.id]
    result = first_fit_decreasing(doc.task_set.periodic_only(), doc.cores, doc.policy)
    placed = result.partial if isinstance(result, InfeasibleReport) else result
    merged = {**placed.assignment, **pinned}
    merged = Partition(doc.cores, {t.id: merged[t.id] for t in doc.task_set if t.id in merged})
    if isinstance(result, InfeasibleReport):
        return InfeasibleReport(merged, result.unplaced)
    return merged


def cmd_bound(args) -> int:
    if args.tasks < 1:
        raise UsageError("--tasks must be >= 1")
    print(format_bound(args.tasks))
    return EXIT_OK


def cmd_analyze(args) -> int:
    doc = _apply_overrides(_load(args.file), args)
    if args.ffd:
        result = _ffd(doc)
        if isinstance(result, InfeasibleReport):
            _emit(dumps({"feasible": False, "unplaced": list(result.unplaced),
                         "assignment": result.partial.assignment}), args.output)
            return EXIT_FAIL
        doc.assignment = dict(result.assignment)
    report = analyze_partition(doc.task_set, doc.partition(), doc.policy)
    _emit(dumps(report_to_dict(report)), args.output)
    return EXIT_OK if report.verdict is Verdict.GUARANTEED else EXIT_FAIL


def cmd_partition(args) -> int:
    doc = _apply_overrides(_load(args.file), args)
    result = _ffd(doc)
    if isinstance(result, InfeasibleReport):
        doc.assignment = dict(result.partial.assignment)
        body = document_to_dict(doc)
        body["unplaced"] = list(result.unplaced)
        _emit(dumps(body), args.output)
        print(f"infeasible: could not place {', '.join(result.unplaced)}", file=sys.stderr)
        return EXIT_FAIL
    doc.assignment = dict(result.assignment)
    _emit(dumps(document_to_dict(doc)), args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    doc = _apply_overrides(_load(args.file), args)
    if args.horizon is not None:
        horizon = args.horizon
    else:
        horizon = hyperperiod(doc.task_set.periodic_only()) * args.hyperperiods
    if horizon < 1:
        raise UsageError("horizon must be >= 1")
    if horizon > MAX_TICK:
        raise UsageError(f"horizon {horizon} overflows the tick range")
    cfg = SimConfig(
        task_set=doc.task_set,
        partition=doc.partition(),
        policies=doc.policy,
        horizon=horizon,
        phase_mode=PhaseMode.CRITICAL_INSTANT if args.critical_instant else PhaseMode.AS_SPECIFIED,
        late_policy=LatePolicy(args.late_policy),
        arrivals=doc.arrivals,
        seed=args.seed,
    )
    trace, stats = run(cfg)
    if args.trace:
        _emit(trace_to_csv(trace.events), args.trace)
    if args.gantt:
        _emit(render_svg(trace, doc.task_set.ids), args.gantt)
    summary = stats_to_dict(stats)
    summary["horizon"] = horizon
    summary["seed"] = args.seed
    if args.stats:
        _emit(dumps(summary), args.stats)
    elif not args.quiet:
        sys.stdout.write(dumps(summary))
    return EXIT_FAIL if stats.total_misses else EXIT_OK


def cmd_example(args) -> int:
    text = resources.files("mcsched.data").joinpath(f"{args.name}.json").read_text()
    _emit(text, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mcsched",
        description="Partitioned multicore real-time schedulability analysis and simulation.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="print the rate-monotonic utilization bound for n tasks")
    b.add_argument("--tasks", type=int, required=True, metavar="N")
    b.set_defaults(func=cmd_bound)

    file_help = "task-set JSON file, '-' for stdin, or example:automobile"

    a = sub.add_parser("analyze", help="static schedulability analysis")
    a.add_argument("file", help=file_help)
    a.add_argument("--ffd", action="store_true", help="partition with first-fit decreasing first")
    a.add_argument("--cores", type=int)
    a.add_argument("--policy", choices=[x.value for x in Policy])
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_analyze)

    pa = sub.add_parser("partition", help="assign tasks to cores with first-fit decreasing")
    pa.add_argument("file", help=file_help)
    pa.add_argument("--cores", type=int)
    pa.add_argument("--policy", choices=[x.value for x in Policy])
    pa.add_argument("-o", "--output")
    pa.set_defaults(func=cmd_partition)

    s = sub.add_parser("simulate", help="run the preemptive scheduling simulator")
    s.add_argument("file", help=file_help)
    span = s.add_mutually_exclusive_group(required=True)
    span.add_argument("--horizon", type=int, metavar="T")
    span.add_argument("--hyperperiods", type=int, metavar="K")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trace", metavar="OUT.csv")
    s.add_argument("--gantt", metavar="OUT.svg")
    s.add_argument("--stats", metavar="OUT.json")
    s.add_argument("--critical-instant", action="store_true")
    s.add_argument("--late-policy", choices=[x.value for x in LatePolicy], default="demote")
    s.add_argument("--policy", choices=[x.value for x in Policy])
    s.add_argument("-q", "--quiet", action="store_true", help="do not print the summary")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("example", help="print a bundled example task set")
    e.add_argument("name", choices=EXAMPLES)
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_example)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mcsched: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchedError as exc:
        print(f"mcsched: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
