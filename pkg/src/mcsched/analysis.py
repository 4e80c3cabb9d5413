"""Static schedulability analysis for one core or a whole partition.

Utilizations are exact :class:`fractions.Fraction` values. The rate
monotonic bound ``n * (2**(1/n) - 1)`` is the only irrational quantity; it
is evaluated in floating point and compared against utilizations after
rounding to 12 fractional digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Mapping, Optional, Union

from .errors import (
    AperiodicPresentError,
    DeadlineExceedsPeriodError,
    DomainError,
)
from .model import TaskKind, TaskSet, TaskSpec, hyperperiod, rm_order

BOUND_DIGITS = 12
DISPLAY_DIGITS = 6


class Policy(str, Enum):
    EDF = "edf"
    RM = "rm"


class Verdict(str, Enum):
    GUARANTEED = "guaranteed"
    INCONCLUSIVE = "inconclusive"
    UNSCHEDULABLE = "unschedulable"


def format_fraction(value: Fraction, digits: int = DISPLAY_DIGITS) -> str:
    """Decimal rendering of an exact fraction, rounded half-even."""
    scaled = round(value * 10**digits)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def utilization(task_set: TaskSet) -> Fraction:
    """Sum of wcet/period over the set, as an exact fraction."""
    total = Fraction(0)
    for t in task_set:
        if not t.has_period:
            raise AperiodicPresentError(t.id)
        total += Fraction(t.wcet, t.period)
    return total


def rm_bound(n: int) -> float:
    """Liu-Layland bound for ``n`` tasks; 1.0 for a single task."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise DomainError(f"rm_bound needs n >= 1, got {n!r}")
    if n == 1:
        return 1.0
    # expm1 keeps precision as 2**(1/n) -> 1
    return n * math.expm1(math.log(2) / n)


def format_bound(n: int) -> str:
    w = rm_bound(n)
    return f"{w:.{DISPLAY_DIGITS}f} ({round(w * 100)}%)"


def _bound_fraction(n: int) -> Fraction:
    if n == 0:
        return Fraction(1)
    return Fraction(f"{rm_bound(n):.{BOUND_DIGITS}f}")


@dataclass(frozen=True)
class UtilizationTest:
    verdict: Verdict
    critical_set: tuple[str, ...]


def rm_utilization_test(task_set: TaskSet) -> UtilizationTest:
    """Liu-Layland test plus the critical set.

    The critical set is the longest prefix of the RM priority order whose
    utilization stays within the bound for its own size. ``U == W`` counts
    as guaranteed.
    """
    order = rm_order(task_set)
    u = Fraction(0)
    critical = []
    for k, t in enumerate(order, start=1):
        u += Fraction(t.wcet, t.period)
        if u > _bound_fraction(k):
            return UtilizationTest(Verdict.INCONCLUSIVE, tuple(critical))
        critical.append(t.id)
    return UtilizationTest(Verdict.GUARANTEED, tuple(critical))


def edf_utilization_test(task_set: TaskSet) -> Verdict:
    u = utilization(task_set)
    if u > 1:
        return Verdict.UNSCHEDULABLE
    if any(t.deadline is not None and t.deadline < t.period for t in task_set):
        return Verdict.INCONCLUSIVE
    return Verdict.GUARANTEED


def time_demand_value(task_set: TaskSet, i: int, t: int) -> int:
    """Demand of the task at RM position ``i`` (0-based) over ``[0, t)``.

    Its own wcet plus ``ceil(t / period_k) * wcet_k`` for every
    higher-priority task ``k``.
    """
    order = rm_order(task_set)
    if not 0 <= i < len(order):
        raise IndexError(f"task index {i} out of range for {len(order)} tasks")
    if t < 1:
        raise ValueError("t must be >= 1")
    return _demand(order, i, t)


def _demand(order: list[TaskSpec], i: int, t: int) -> int:
    demand = order[i].wcet
    for hp in order[:i]:
        demand += -(-t // hp.period) * hp.wcet
    return demand


def tda_response_time(task_set: TaskSet, i: int) -> Optional[int]:
    """Worst-case response time of the task at RM position ``i``.

    Iterates ``t <- W(t)`` from the task's wcet. Returns ``None`` as soon as
    an iterate passes the relative deadline.
    """
    order = rm_order(task_set)
    if not 0 <= i < len(order):
        raise IndexError(f"task index {i} out of range for {len(order)} tasks")
    task = order[i]
    deadline = task.period if task.deadline is None else task.deadline
    if deadline > task.period:
        raise DeadlineExceedsPeriodError(
            f"task {task.id!r}: deadline {deadline} > period {task.period}"
        )
    t = task.wcet
    while True:
        w = _demand(order, i, t)
        if w > deadline:
            return None
        if w == t:
            return t
        t = w


ResponseTime = Optional[int]


@dataclass(frozen=True)
class CoreReport:
    core: int
    policy: Policy
    tasks: tuple[str, ...]
    utilization: Fraction
    bound: float
    verdict: Verdict
    critical_set: tuple[str, ...] = ()
    response_times: Mapping[str, ResponseTime] = field(default_factory=dict)
    background: tuple[str, ...] = ()
    method: str = "utilization"


@dataclass(frozen=True)
class AnalysisReport:
    cores: tuple[CoreReport, ...]

    @property
    def verdict(self) -> Verdict:
        verdicts = {c.verdict for c in self.cores}
        for v in (Verdict.UNSCHEDULABLE, Verdict.INCONCLUSIVE):
            if v in verdicts:
                return v
        return Verdict.GUARANTEED

    def core(self, index: int) -> CoreReport:
        return self.cores[index]


def _feasibility_window(tasks: list[TaskSpec]) -> int:
    """Simulation length that decides fixed-priority schedulability with offsets.

    Uses the stabilisation instant of the priority-ordered release pattern
    plus one hyperperiod, and never less than ``max phase + 2 * H``.
    """
    h = hyperperiod(TaskSet(tuple(tasks)))
    s = 0
    for t in tasks:
        s = t.phase + max(0, -(-(s - t.phase) // t.period)) * t.period
    max_phase = max((t.phase for t in tasks), default=0)
    return max(s + h, max_phase + 2 * h)


def _simulated_responses(tasks: list[TaskSpec]) -> tuple[bool, dict[str, ResponseTime]]:
    from .engine import SimConfig, run
    from .model import Partition

    ts = TaskSet(tuple(replace(t, kind=TaskKind.PERIODIC) for t in tasks))
    cfg = SimConfig(
        task_set=ts,
        partition=Partition(1, {t.id: 0 for t in tasks}),
        policies=Policy.RM,
        horizon=_feasibility_window(tasks),
    )
    trace, stats = run(cfg)
    clean = stats.total_misses == 0
    responses = {
        t.id: (stats.tasks[t.id].max_response if stats.tasks[t.id].misses == 0 else None)
        for t in tasks
    }
    return clean, responses


def analyze_core(core: int, task_set: TaskSet, policy: Union[Policy, str]) -> CoreReport:
    """Analyse the tasks bound to one core under one policy.

    Aperiodic tasks run in the background band and are listed separately;
    sporadic tasks are analysed at their minimum interarrival.
    """
    policy = Policy(policy)
    background = tuple(t.id for t in task_set if t.kind is TaskKind.APERIODIC)
    ts = task_set.periodic_only()
    u = utilization(ts)
    ids = tuple(t.id for t in ts)
    if policy is Policy.EDF:
        return CoreReport(core, policy, ids, u, 1.0, edf_utilization_test(ts),
                          critical_set=ids if u <= 1 else (), background=background)

    n = len(ts)
    bound = rm_bound(n) if n else 1.0
    ll = rm_utilization_test(ts)
    order = rm_order(ts)
    implicit_or_longer = all(t.deadline >= t.period for t in order)
    # a sporadic job may arrive at any instant after its phase, including a
    # hyperperiod boundary where all periodic tasks release together, so
    # only periodic offsets can rule out the synchronous worst case
    synchronous = all(t.phase == 0 for t in order if t.kind is TaskKind.PERIODIC)
    sporadic = any(t.kind is TaskKind.SPORADIC for t in order)

    responses: dict[str, ResponseTime] = {}
    tda_ok = True
    tda_complete = True
    for i, t in enumerate(order):
        if t.deadline > t.period:
            tda_complete = False
            continue
        r = tda_response_time(ts, i)
        responses[t.id] = r
        tda_ok = tda_ok and r is not None

    if u > 1:
        verdict, method = Verdict.UNSCHEDULABLE, "utilization"
    elif tda_complete and tda_ok:
        verdict = Verdict.GUARANTEED
        method = "utilization" if (ll.verdict is Verdict.GUARANTEED and implicit_or_longer) else "tda"
    elif tda_complete and synchronous:
        verdict, method = Verdict.UNSCHEDULABLE, "tda"
    else:
        # offsets or deadlines beyond the period: decide by exact simulation
        if synchronous:
            order_sim = [replace(t, phase=0) for t in order]
        else:
            order_sim = order
        clean, simulated = _simulated_responses(order_sim)
        if not clean:
            verdict = Verdict.UNSCHEDULABLE
        elif sporadic and not synchronous:
            # one strictly periodic arrival pattern proves nothing for the others
            verdict = Verdict.INCONCLUSIVE
        else:
            verdict = Verdict.GUARANTEED
        method = "simulation"
        for tid, r in simulated.items():
            if responses.get(tid) is None:
                responses[tid] = r
    responses = {t.id: responses.get(t.id) for t in order}
    return CoreReport(core, policy, ids, u, bound, verdict, ll.critical_set,
                      responses, background, method)


def analyze_partition(task_set: TaskSet, partition, policies) -> AnalysisReport:
    """Per-core analysis of a validated partition.

    ``policies`` is a single policy for every core or a mapping from core
    index to policy (missing cores default to EDF).
    """
    from .partition import validate_manual

    partition = validate_manual(task_set, partition)
    reports = []
    for core in range(partition.core_count):
        reports.append(analyze_core(core, partition.tasks_on(core, task_set),
                                    policy_for(policies, core)))
    return AnalysisReport(tuple(reports))


def policy_for(policies, core: int) -> Policy:
    if isinstance(policies, (Policy, str)):
        return Policy(policies)
    return Policy(policies.get(core, Policy.EDF))
