"""JSON task-set documents, analysis report JSON and trace CSV.

Task-set document (all durations are integer ticks)::

    {
      "description": "free text",              optional
      "ticks_per_second": 1000,                optional, informational only
      "cores": 4,                              optional, default 4
      "policy": "edf" | {"0": "rm", ...},      optional, default "edf"
      "tasks": [
        {"id": "abs", "kind": "periodic", "wcet": 1, "period": 4,
         "deadline": 4, "phase": 0, "core": 1}
      ],
      "arrivals": [{"task": "airbag", "time": 120}]   optional
    }

Unknown keys anywhere are errors.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Optional

from .analysis import AnalysisReport, Policy, format_fraction
from .errors import DocumentError, SchedError
from .model import DEFAULT_CORES, Partition, TaskKind, TaskSet, TaskSpec, validate_task_set

TOP_KEYS = {"description", "ticks_per_second", "cores", "policy", "tasks", "arrivals"}
TASK_KEYS = {"id", "kind", "wcet", "period", "deadline", "phase", "core"}
ARRIVAL_KEYS = {"task", "time"}
TRACE_COLUMNS = ("time", "core", "event", "task", "job", "deadline")


@dataclass
class TaskSetDocument:
    task_set: TaskSet
    cores: int = DEFAULT_CORES
    policy: Any = Policy.EDF
    assignment: dict[str, int] = field(default_factory=dict)
    arrivals: tuple[tuple[str, int], ...] = ()
    ticks_per_second: Optional[float] = None
    description: Optional[str] = None

    @property
    def fully_assigned(self) -> bool:
        return all(t.id in self.assignment for t in self.task_set)

    def partition(self) -> Partition:
        return Partition(self.cores, self.assignment)


def _int_field(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise DocumentError(f"expected an integer, got {value!r}", where)
    return value


def _policy_field(value, where):
    try:
        if isinstance(value, str):
            return Policy(value.lower())
        if isinstance(value, dict):
            out = {}
            for k, v in value.items():
                try:
                    core = int(k)
                except ValueError:
                    raise DocumentError(f"core key {k!r} is not an integer", where) from None
                out[core] = Policy(str(v).lower())
            return out
    except ValueError as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError(f"unknown policy in {value!r}; use 'edf' or 'rm'", where) from None
    raise DocumentError(f"policy must be a string or an object, got {value!r}", where)


def parse_document(text: str) -> TaskSetDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(raw, dict):
        raise DocumentError("top level must be an object")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise DocumentError(f"unknown field(s) {sorted(unknown)}", "document")
    if "tasks" not in raw or not isinstance(raw["tasks"], list):
        raise DocumentError("missing 'tasks' array", "document")

    cores = _int_field(raw.get("cores", DEFAULT_CORES), "cores")
    if cores < 1:
        raise DocumentError("must be >= 1", "cores")
    policy = _policy_field(raw.get("policy", "edf"), "policy")

    specs = []
    assignment = {}
    for i, t in enumerate(raw["tasks"]):
        where = f"tasks[{i}]"
        if not isinstance(t, dict):
            raise DocumentError("task entry must be an object", where)
        unknown = set(t) - TASK_KEYS
        if unknown:
            raise DocumentError(f"unknown field(s) {sorted(unknown)}", where)
        for key in ("id", "kind", "wcet"):
            if key not in t:
                raise DocumentError(f"missing field {key!r}", where)
        if not isinstance(t["id"], str):
            raise DocumentError("id must be a string", f"{where}.id")
        try:
            kind = TaskKind(t["kind"])
        except ValueError:
            raise DocumentError(f"unknown kind {t['kind']!r}", f"{where}.kind") from None
        vals = {}
        for key in ("wcet", "period", "deadline", "phase"):
            if t.get(key) is not None:
                vals[key] = _int_field(t[key], f"{where}.{key}")
        specs.append(TaskSpec(t["id"], kind, vals["wcet"], vals.get("period"),
                              vals.get("deadline"), vals.get("phase", 0)))
        if t.get("core") is not None:
            assignment[t["id"]] = _int_field(t["core"], f"{where}.core")

    arrivals = []
    for i, a in enumerate(raw.get("arrivals", [])):
        where = f"arrivals[{i}]"
        if not isinstance(a, dict) or set(a) != ARRIVAL_KEYS:
            raise DocumentError("arrival must be {\"task\": id, \"time\": tick}", where)
        arrivals.append((str(a["task"]), _int_field(a["time"], f"{where}.time")))

    try:
        task_set = validate_task_set(TaskSet(tuple(specs)))
    except SchedError as exc:
        raise DocumentError(str(exc), "tasks") from None
    tps = raw.get("ticks_per_second")
    if tps is not None and (isinstance(tps, bool) or not isinstance(tps, (int, float)) or tps <= 0):
        raise DocumentError("must be a positive number", "ticks_per_second")
    desc = raw.get("description")
    if desc is not None and not isinstance(desc, str):
        raise DocumentError("must be a string", "description")
    return TaskSetDocument(task_set, cores, policy, assignment, tuple(arrivals), tps, desc)


def load_document(path: str) -> TaskSetDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DocumentError(exc.strerror or str(exc), path) from None
    return parse_document(text)


def _policy_json(policy):
    if isinstance(policy, dict):
        return {str(k): Policy(v).value for k, v in sorted(policy.items())}
    return Policy(policy).value


def document_to_dict(doc: TaskSetDocument) -> dict:
    out: dict[str, Any] = {}
    if doc.description is not None:
        out["description"] = doc.description
    if doc.ticks_per_second is not None:
        out["ticks_per_second"] = doc.ticks_per_second
    out["cores"] = doc.cores
    out["policy"] = _policy_json(doc.policy)
    tasks = []
    for t in doc.task_set:
        entry: dict[str, Any] = {"id": t.id, "kind": t.kind.value, "wcet": t.wcet}
        if t.period is not None:
            entry["period"] = t.period
        entry["deadline"] = t.deadline
        entry["phase"] = t.phase
        if t.id in doc.assignment:
            entry["core"] = doc.assignment[t.id]
        tasks.append(entry)
    out["tasks"] = tasks
    if doc.arrivals:
        out["arrivals"] = [{"task": tid, "time": when} for tid, when in doc.arrivals]
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def report_to_dict(report: AnalysisReport) -> dict:
    cores = []
    for c in report.cores:
        cores.append({
            "core": c.core,
            "policy": c.policy.value,
            "tasks": list(c.tasks),
            "background": list(c.background),
            "utilization": {
                "fraction": f"{c.utilization.numerator}/{c.utilization.denominator}",
                "decimal": format_fraction(c.utilization),
            },
            "bound": f"{c.bound:.6f}",
            "verdict": c.verdict.value,
            "method": c.method,
            "critical_set": list(c.critical_set),
            "response_times": {
                tid: (r if r is not None else "exceeds deadline")
                for tid, r in c.response_times.items()
            },
        })
    return {"verdict": report.verdict.value, "cores": cores}


def trace_to_csv(events) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for e in events:
        w.writerow([
            e.time,
            e.core,
            e.kind.value,
            "" if e.task_id is None else e.task_id,
            "" if e.job is None else e.job,
            "" if e.abs_deadline is None else e.abs_deadline,
        ])
    return buf.getvalue()


def stats_to_dict(stats) -> dict:
    return {
        "total_misses": stats.total_misses,
        "total_preemptions": stats.total_preemptions,
        "cores": {str(k): {"busy": v.busy, "idle": v.idle} for k, v in stats.cores.items()},
        "tasks": {
            tid: {
                "released": s.released,
                "completed": s.completed,
                "max_response": s.max_response,
                "avg_response": None if s.avg_response is None else round(s.avg_response, 6),
                "misses": s.misses,
                "preemptions": s.preemptions,
                "executed": s.executed,
                "rejected": s.rejected,
                "aborted": s.aborted,
            }
            for tid, s in stats.tasks.items()
        },
    }
