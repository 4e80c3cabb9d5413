"""Deterministic tick-driven preemptive scheduler for partitioned cores.

Each core runs EDF or rate-monotonic independently. At every integer
instant ``now`` a core, in this order:

1. flags jobs whose absolute deadline is ``now`` but still have work left
   (``deadline_miss``; then ``demote`` into the background band, or the job
   is dropped under the abort policy),
2. releases new jobs, running the processor-demand admission test for
   sporadic jobs on EDF cores,
3. runs the highest-priority job for the tick ``[now, now + 1)``.

Background work (demoted late jobs and all aperiodic jobs) only runs when
no timely deadline-bearing job is ready, and is ordered by absolute
deadline. Deadline checks are also made at ``now == horizon`` so a job due
exactly at the horizon is still judged.

Sporadic arrival streams
------------------------
Unless arrivals are given explicitly, each sporadic task draws its arrival
instants from one shared 64-bit LCG seeded with ``SimConfig.seed``::

    state = (state * 6364136223846793005 + 1442695040888963407) mod 2**64
    draw(bound) = (state >> 33) mod bound       # after advancing

Tasks are visited in canonical order. A task with period (minimum
interarrival) ``T`` and phase ``p`` first arrives at ``p + draw(T + 1)``;
each later arrival follows the previous one by ``T + draw(T + 1)``.
Generation stops at the horizon.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from . import _kernels as K
from .analysis import Policy, policy_for
from .errors import ConfigError, NotSporadicError, PartitionError, WrongCoreError
from .model import (
    MAX_TICK,
    Job,
    JobState,
    Partition,
    TaskKind,
    TaskSet,
    TaskSpec,
    checked_add,
)

InvalidPartition = PartitionError

LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407
_MASK64 = (1 << 64) - 1


class Lcg64:
    """64-bit linear congruential generator (Knuth MMIX constants)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state * LCG_MULTIPLIER + LCG_INCREMENT) & _MASK64
        return self.state

    def below(self, bound: int) -> int:
        return (self.next() >> 33) % bound


class LatePolicy(str, Enum):
    DEMOTE = "demote"
    ABORT = "abort"


class PhaseMode(str, Enum):
    AS_SPECIFIED = "as-specified"
    CRITICAL_INSTANT = "critical-instant"


class EventKind(str, Enum):
    RELEASE = "release"
    ADMIT = "admit"
    REJECT = "reject"
    DEADLINE_MISS = "deadline_miss"
    DEMOTE = "demote"
    PREEMPT = "preempt"
    DISPATCH = "dispatch"
    COMPLETE = "complete"
    IDLE_START = "idle_start"


EVENT_ORDER = {k: i for i, k in enumerate(EventKind)}


@dataclass(frozen=True)
class TraceEvent:
    time: int
    core: int
    kind: EventKind
    task_id: Optional[str] = None
    job: Optional[int] = None
    abs_deadline: Optional[int] = None


@dataclass(frozen=True)
class SimConfig:
    """Everything a run depends on.

    ``arrivals`` lists explicit ``(task_id, release)`` pairs for sporadic
    and aperiodic tasks. Sporadic tasks without explicit arrivals get a
    seeded pseudo-random stream; aperiodic tasks without them release one
    job at their phase.
    """

    task_set: TaskSet
    partition: Partition
    policies: Union[Policy, str, Mapping[int, Union[Policy, str]]] = Policy.EDF
    horizon: int = 1
    phase_mode: PhaseMode = PhaseMode.AS_SPECIFIED
    late_policy: LatePolicy = LatePolicy.DEMOTE
    arrivals: tuple[tuple[str, int], ...] = ()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "arrivals", tuple(tuple(a) for a in self.arrivals))
        object.__setattr__(self, "phase_mode", PhaseMode(self.phase_mode))
        object.__setattr__(self, "late_policy", LatePolicy(self.late_policy))


def critical_instant(config: SimConfig) -> SimConfig:
    """Same run with every periodic task's first release at time zero."""
    return dataclasses.replace(config, phase_mode=PhaseMode.CRITICAL_INSTANT)


@dataclass
class TaskStats:
    released: int = 0
    completed: int = 0
    max_response: Optional[int] = None
    avg_response: Optional[float] = None
    misses: int = 0
    preemptions: int = 0
    executed: int = 0
    rejected: int = 0
    aborted: int = 0


@dataclass
class CoreStats:
    busy: int = 0
    idle: int = 0


@dataclass
class SimStats:
    tasks: dict[str, TaskStats] = field(default_factory=dict)
    cores: dict[int, CoreStats] = field(default_factory=dict)
    total_misses: int = 0
    total_preemptions: int = 0


@dataclass(frozen=True)
class Slice:
    """A contiguous execution interval ``[start, end)`` of one job."""

    core: int
    task_id: str
    job: int
    start: int
    end: int


@dataclass
class CoreSchedule:
    core: int
    policy: Policy
    jobs: list[Job]
    run: np.ndarray


@dataclass
class Trace:
    events: list[TraceEvent]
    horizon: int
    schedules: list[CoreSchedule]

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def of_kind(self, kind: Union[EventKind, str]) -> list[TraceEvent]:
        kind = EventKind(kind)
        return [e for e in self.events if e.kind is kind]

    def slices(self) -> list[Slice]:
        out = []
        for sched in self.schedules:
            run = sched.run
            if run.size == 0:
                continue
            cuts = np.flatnonzero(run[1:] != run[:-1]) + 1
            starts = np.concatenate(([0], cuts))
            ends = np.concatenate((cuts, [run.size]))
            for s, e in zip(starts.tolist(), ends.tolist()):
                j = int(run[s])
                if j >= 0:
                    job = sched.jobs[j]
                    out.append(Slice(sched.core, job.task_id, job.index, s, e))
        return out


def tie_break(jobs: Sequence[Job], task_order: Sequence[str]) -> Job:
    """Pick among jobs that share the top priority key.

    Earliest release wins, then canonical task order, then job index.
    """
    if not jobs:
        raise ValueError("tie_break needs at least one candidate")
    rank = {tid: i for i, tid in enumerate(task_order)}
    return min(jobs, key=lambda j: (j.release, rank.get(j.task_id, len(rank)), j.index))


@dataclass
class CoreState:
    """Snapshot of one core used by the step-level operations.

    ``active`` holds released, unfinished jobs; ``upcoming`` holds periodic
    jobs already known but not yet released (they count toward admission
    demand). ``kinds`` maps task ids to their kind and ``assigned`` lists
    the task ids bound to this core.
    """

    core: int
    now: int
    policy: Policy = Policy.EDF
    late_policy: LatePolicy = LatePolicy.DEMOTE
    active: list[Job] = field(default_factory=list)
    upcoming: list[Job] = field(default_factory=list)
    kinds: dict[str, TaskKind] = field(default_factory=dict)
    assigned: Optional[set] = None

    def _kind_code(self, job: Job) -> int:
        return _KIND_CODE[TaskKind(self.kinds.get(job.task_id, TaskKind.PERIODIC))]


def demote_late(state: CoreState, now: int) -> list[TraceEvent]:
    """Handle every active job whose deadline has passed unfinished.

    Under the demote policy the job drops into the background band; under
    abort it is removed from ``state.active``.
    """
    jobs = list(state.active)
    n = len(jobs)
    active = np.arange(n, dtype=np.int64)
    late = np.array([j.state is JobState.LATE for j in jobs], dtype=np.bool_)
    deadline = np.array([j.abs_deadline for j in jobs], dtype=np.int64)
    miss = np.full(n, -1, dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)
    late_code = K.LATE_ABORT if LatePolicy(state.late_policy) is LatePolicy.ABORT else K.LATE_DEMOTE
    K._expire(now, active, n, late, deadline, miss, status, late_code)
    events = []
    kept = []
    for i, job in enumerate(jobs):
        if miss[i] >= 0:
            events.append(TraceEvent(now, state.core, EventKind.DEADLINE_MISS,
                                     job.task_id, job.index, job.abs_deadline))
            if status[i] == K.STATUS_ABORTED:
                job.dropped = True
                continue
            job.state = JobState.LATE
            events.append(TraceEvent(now, state.core, EventKind.DEMOTE,
                                     job.task_id, job.index, job.abs_deadline))
        kept.append(job)
    state.active = kept
    state.now = now
    return events


def admit_sporadic(state: CoreState, job: Job) -> bool:
    """Processor-demand admission test for a sporadic job arriving now.

    On success the job is appended to ``state.active``. Periodic jobs are
    never passed here; they bypass admission.
    """
    if TaskKind(state.kinds.get(job.task_id, TaskKind.PERIODIC)) is not TaskKind.SPORADIC:
        raise NotSporadicError(f"job of task {job.task_id!r} is not sporadic")
    if state.assigned is not None and job.task_id not in state.assigned:
        raise WrongCoreError(f"task {job.task_id!r} is not bound to core {state.core}")
    if Policy(state.policy) is not Policy.EDF:
        raise WrongCoreError(f"core {state.core} is not an EDF core")
    upcoming = sorted((j for j in state.upcoming if j.release > state.now),
                      key=lambda j: j.release)
    ordered = list(state.active) + [job] + upcoming
    n = len(ordered)
    na = len(state.active)
    release = np.array([j.release for j in ordered], dtype=np.int64)
    deadline = np.array([j.abs_deadline for j in ordered], dtype=np.int64)
    wcet = np.array([j.wcet for j in ordered], dtype=np.int64)
    remaining = np.array([j.remaining for j in ordered], dtype=np.int64)
    late = np.array([j.state is JobState.LATE for j in ordered], dtype=np.bool_)
    kind = np.array([state._kind_code(j) for j in ordered], dtype=np.int64)
    active = np.arange(n, dtype=np.int64)
    ok = K._admits(na, state.now, na + 1, active, na, late, remaining,
                   release, deadline, wcet, kind)
    if ok:
        job.state = JobState.READY
        state.active.append(job)
    return bool(ok)


def _sporadic_stream(task: TaskSpec, rng: Lcg64, horizon: int) -> list[int]:
    out = []
    t = task.phase + rng.below(task.period + 1)
    while t < horizon:
        out.append(t)
        t = checked_add(t, task.period, rng.below(task.period + 1))
    return out


def _arrival_map(config: SimConfig) -> dict[str, list[int]]:
    ts = config.task_set
    by_task: dict[str, list[int]] = {}
    for tid, when in config.arrivals:
        try:
            task = ts.get(tid)
        except KeyError:
            raise ConfigError(f"arrival names unknown task {tid!r}") from None
        if task.kind is TaskKind.PERIODIC:
            raise ConfigError(f"periodic task {tid!r} cannot take explicit arrivals")
        if isinstance(when, bool) or not isinstance(when, int) or when < 0 or when > MAX_TICK:
            raise ConfigError(f"arrival time {when!r} for task {tid!r} is not a valid tick")
        by_task.setdefault(tid, []).append(when)
    for tid, times in by_task.items():
        times.sort()
        task = ts.get(tid)
        if task.kind is TaskKind.SPORADIC:
            for a, b in zip(times, times[1:]):
                if b - a < task.period:
                    raise ConfigError(
                        f"sporadic task {tid!r} arrivals {a} and {b} are closer than "
                        f"its minimum interarrival {task.period}"
                    )
    rng = Lcg64(config.seed)
    out = {}
    for task in ts:
        if task.kind is TaskKind.PERIODIC:
            continue
        if task.id in by_task:
            out[task.id] = [t for t in by_task[task.id] if t < config.horizon]
        elif task.kind is TaskKind.SPORADIC:
            out[task.id] = _sporadic_stream(task, rng, config.horizon)
        else:
            out[task.id] = [task.phase] if task.phase < config.horizon else []
    return out


def _core_jobs(config: SimConfig, tasks: list[TaskSpec], rank: dict[str, int],
               arrivals: dict[str, list[int]]) -> list[tuple[Job, TaskSpec]]:
    jobs = []
    critical = config.phase_mode is PhaseMode.CRITICAL_INSTANT
    for task in tasks:
        if task.kind is TaskKind.PERIODIC:
            phase = 0 if critical else task.phase
            releases = range(phase, config.horizon, task.period)
        else:
            releases = arrivals.get(task.id, [])
        for k, r in enumerate(releases, start=1):
            jobs.append((Job(task.id, k, r, checked_add(r, task.deadline), task.wcet), task))
    jobs.sort(key=lambda jt: (jt[0].release, rank[jt[0].task_id], jt[0].index))
    return jobs


_KIND_CODE = {TaskKind.PERIODIC: K.KIND_PERIODIC,
              TaskKind.SPORADIC: K.KIND_SPORADIC,
              TaskKind.APERIODIC: K.KIND_APERIODIC}


def run(config: SimConfig, kernel=None) -> tuple[Trace, SimStats]:
    """Simulate ``[0, horizon)`` on every core and collect the trace.

    ``kernel`` overrides the per-core tick loop (used by the benchmark and
    the backend equivalence tests).
    """
    from .partition import validate_manual

    kernel = kernel or K.simulate_core
    horizon = config.horizon
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise ConfigError(f"horizon must be a positive tick count, got {horizon!r}")
    if horizon > MAX_TICK:
        raise ConfigError(f"horizon {horizon} exceeds {MAX_TICK}")
    ts = config.task_set
    partition = validate_manual(ts, config.partition)
    rank = ts.rank()
    arrivals = _arrival_map(config)
    demote = config.late_policy is LatePolicy.DEMOTE

    events: list[tuple] = []
    schedules = []
    stats = SimStats(tasks={t.id: TaskStats() for t in ts})
    responses: dict[str, list[int]] = {t.id: [] for t in ts}

    for core in range(partition.core_count):
        policy = policy_for(config.policies, core)
        tasks = [t for t in ts if partition.assignment.get(t.id) == core]
        pairs = _core_jobs(config, tasks, rank, arrivals)
        n = len(pairs)
        cols = np.zeros((7, n), dtype=np.int64)
        for i, (job, task) in enumerate(pairs):
            cols[:, i] = (job.release, job.abs_deadline, job.wcet,
                          task.period if task.period is not None else MAX_TICK,
                          rank[task.id], job.index, _KIND_CODE[task.kind])
        run_arr, finish, miss, status, executed = kernel(
            cols[0], cols[1], cols[2], cols[3], cols[4], cols[5], cols[6],
            K.POLICY_EDF if policy is Policy.EDF else K.POLICY_RM,
            K.LATE_DEMOTE if demote else K.LATE_ABORT,
            horizon,
        )
        run_arr = np.asarray(run_arr)
        # plain lists: per-element numpy indexing dominates the post-processing
        finish, miss, status, executed = (np.asarray(a).tolist() for a in (finish, miss, status, executed))
        last = int(run_arr[horizon - 1])
        final_jobs = []
        for i, (job, task) in enumerate(pairs):
            job.executed = executed[i]
            st = status[i]
            tid = task.id
            s = stats.tasks[tid]
            s.released += 1
            s.executed += job.executed
            key = (rank[tid], job.index)
            events.append((job.release, core, EVENT_ORDER[EventKind.RELEASE], key,
                           EventKind.RELEASE, tid, job.index, job.abs_deadline))
            if st in (K.STATUS_ADMITTED, K.STATUS_REJECTED):
                kind = EventKind.ADMIT if st == K.STATUS_ADMITTED else EventKind.REJECT
                events.append((job.release, core, EVENT_ORDER[kind], key,
                               kind, tid, job.index, job.abs_deadline))
            if st == K.STATUS_REJECTED:
                s.rejected += 1
                job.dropped = True
            if miss[i] >= 0:
                s.misses += 1
                t_miss = miss[i]
                events.append((t_miss, core, EVENT_ORDER[EventKind.DEADLINE_MISS], key,
                               EventKind.DEADLINE_MISS, tid, job.index, job.abs_deadline))
                if st == K.STATUS_ABORTED:
                    s.aborted += 1
                    job.dropped = True
                else:
                    events.append((t_miss, core, EVENT_ORDER[EventKind.DEMOTE], key,
                                   EventKind.DEMOTE, tid, job.index, job.abs_deadline))
            if finish[i] >= 0:
                f = finish[i]
                s.completed += 1
                responses[tid].append(f - job.release)
                events.append((f, core, EVENT_ORDER[EventKind.COMPLETE], key,
                               EventKind.COMPLETE, tid, job.index, job.abs_deadline))
            if job.executed == job.wcet:
                job.state = JobState.COMPLETED
            elif miss[i] >= 0:
                job.state = JobState.LATE
            elif last == i:
                job.state = JobState.RUNNING
            else:
                job.state = JobState.READY
            final_jobs.append(job)

        busy = int(np.count_nonzero(run_arr >= 0))
        stats.cores[core] = CoreStats(busy=busy, idle=horizon - busy)

        if run_arr.size:
            cuts = np.flatnonzero(run_arr[1:] != run_arr[:-1]) + 1
            change_points = [0] + cuts.tolist()
        else:
            change_points = []
        owners = run_arr[change_points].tolist()
        for n_cp, t in enumerate(change_points):
            cur = owners[n_cp]
            if t > 0:
                prev = owners[n_cp - 1]
                if prev >= 0 and finish[prev] != t and not (
                    status[prev] == K.STATUS_ABORTED and miss[prev] == t
                ):
                    pj, ptask = pairs[prev]
                    stats.tasks[ptask.id].preemptions += 1
                    events.append((t, core, EVENT_ORDER[EventKind.PREEMPT],
                                   (rank[ptask.id], pj.index), EventKind.PREEMPT,
                                   ptask.id, pj.index, pj.abs_deadline))
            if cur >= 0:
                cj, ctask = pairs[cur]
                events.append((t, core, EVENT_ORDER[EventKind.DISPATCH],
                               (rank[ctask.id], cj.index), EventKind.DISPATCH,
                               ctask.id, cj.index, cj.abs_deadline))
            else:
                events.append((t, core, EVENT_ORDER[EventKind.IDLE_START], (-1, 0),
                               EventKind.IDLE_START, None, None, None))
        schedules.append(CoreSchedule(core, policy, final_jobs, run_arr))

    events.sort(key=lambda e: e[:4])
    trace = Trace([TraceEvent(e[0], e[1], e[4], e[5], e[6], e[7]) for e in events],
                  horizon, schedules)
    for tid, rs in responses.items():
        if rs:
            stats.tasks[tid].max_response = max(rs)
            stats.tasks[tid].avg_response = sum(rs) / len(rs)
    stats.total_misses = sum(s.misses for s in stats.tasks.values())
    stats.total_preemptions = sum(s.preemptions for s in stats.tasks.values())
    return trace, stats


def executed_by_task(events: Iterable[TraceEvent], horizon: int) -> dict[str, int]:
    """Total executed ticks per task reconstructed from trace events alone.

    An execution interval opens at ``dispatch`` and closes at the job's
    next ``preempt`` or ``complete``, at a ``deadline_miss`` with no
    matching ``demote`` (abort), or at the horizon.
    """
    events = list(events)
    demoted = {(e.task_id, e.job, e.time) for e in events if e.kind is EventKind.DEMOTE}
    open_at: dict[tuple, int] = {}
    totals: dict[str, int] = {}
    for e in events:
        key = (e.task_id, e.job)
        if e.kind is EventKind.DISPATCH:
            open_at[key] = e.time
        elif e.kind in (EventKind.PREEMPT, EventKind.COMPLETE) or (
            e.kind is EventKind.DEADLINE_MISS and (e.task_id, e.job, e.time) not in demoted
        ):
            start = open_at.pop(key, None)
            if start is not None:
                totals[e.task_id] = totals.get(e.task_id, 0) + e.time - start
    for (tid, _), start in open_at.items():
        totals[tid] = totals.get(tid, 0) + horizon - start
    return totals
