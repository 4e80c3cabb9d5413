"""Domain types for partitioned real-time task sets.

Time is measured in integer ticks. Every duration and instant is a plain
``int`` in ``[0, MAX_TICK]``; ``MAX_TICK`` is the int64 ceiling so that
values can be packed into numpy arrays for the simulation kernels without
silent wraparound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Mapping, Optional

from .errors import (
    AperiodicPresentError,
    DuplicateIdError,
    MissingDeadlineError,
    MissingPeriodError,
    NotPeriodicError,
    TaskSetError,
    TickOverflowError,
    UnexpectedPeriodError,
    WcetExceedsDeadlineError,
    ZeroDurationError,
)

MAX_TICK = 2**63 - 1
DEFAULT_CORES = 4


def checked_add(*values: int) -> int:
    total = sum(values)
    if total > MAX_TICK or total < 0:
        raise TickOverflowError(f"tick value {total} outside [0, {MAX_TICK}]")
    return total


def checked_mul(a: int, b: int) -> int:
    product = a * b
    if product > MAX_TICK or product < 0:
        raise TickOverflowError(f"tick value {a} * {b} outside [0, {MAX_TICK}]")
    return product


class TaskKind(str, Enum):
    PERIODIC = "periodic"
    SPORADIC = "sporadic"
    APERIODIC = "aperiodic"


class JobState(str, Enum):
    PENDING = "pending"
    READY = "ready"
    RUNNING = "running"
    COMPLETED = "completed"
    LATE = "late"


@dataclass(frozen=True)
class TaskSpec:
    """Static parameters of one task.

    ``period`` is the minimum interarrival time for sporadic tasks and must
    be ``None`` for aperiodic ones. ``deadline`` is relative; when left as
    ``None`` it defaults to the period during validation.
    """

    id: str
    kind: TaskKind
    wcet: int
    period: Optional[int] = None
    deadline: Optional[int] = None
    phase: int = 0

    @property
    def has_period(self) -> bool:
        return self.kind is not TaskKind.APERIODIC


@dataclass(frozen=True)
class TaskSet:
    tasks: tuple[TaskSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))

    def __iter__(self) -> Iterator[TaskSpec]:
        return iter(self.tasks)

    def __len__(self) -> int:
        return len(self.tasks)

    def __getitem__(self, i):
        return self.tasks[i]

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.tasks]

    def get(self, task_id: str) -> TaskSpec:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def rank(self) -> dict[str, int]:
        """Canonical position of each task id (input order)."""
        return {t.id: i for i, t in enumerate(self.tasks)}

    def subset(self, ids) -> "TaskSet":
        wanted = set(ids)
        return TaskSet(tuple(t for t in self.tasks if t.id in wanted))

    def periodic_only(self) -> "TaskSet":
        """Drop aperiodic tasks (they carry no period)."""
        return TaskSet(tuple(t for t in self.tasks if t.has_period))


@dataclass
class Job:
    """One released instance of a task. ``index`` starts at 1."""

    task_id: str
    index: int
    release: int
    abs_deadline: int
    wcet: int
    executed: int = 0
    state: JobState = JobState.PENDING
    dropped: bool = False

    @property
    def remaining(self) -> int:
        return self.wcet - self.executed


@dataclass(frozen=True)
class Partition:
    core_count: int = DEFAULT_CORES
    assignment: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignment", dict(self.assignment))

    def core_of(self, task_id: str) -> int:
        return self.assignment[task_id]

    def tasks_on(self, core: int, task_set: TaskSet) -> TaskSet:
        return TaskSet(tuple(t for t in task_set if self.assignment.get(t.id) == core))


def _check_tick(task_id, name, value, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise TaskSetError(task_id, f"{name} must be an integer tick count, got {value!r}")
    if value < minimum:
        raise ZeroDurationError(task_id, f"{name} must be >= {minimum}, got {value}")
    if value > MAX_TICK:
        raise TickOverflowError(f"task {task_id!r}: {name}={value} exceeds {MAX_TICK}")


def validate_task_set(raw: TaskSet) -> TaskSet:
    """Check every task invariant and fill in implicit deadlines.

    Returns a new :class:`TaskSet` in the same order. Raises a
    :class:`TaskSetError` subclass naming the first offending task.
    """
    seen = set()
    out = []
    for t in raw:
        if not isinstance(t.id, str) or not t.id:
            raise TaskSetError(t.id, "task id must be a non-empty string")
        if t.id in seen:
            raise DuplicateIdError(t.id, "duplicate task id")
        seen.add(t.id)
        kind = TaskKind(t.kind)
        _check_tick(t.id, "wcet", t.wcet, 1)
        _check_tick(t.id, "phase", t.phase, 0)
        if kind is TaskKind.APERIODIC:
            if t.period is not None:
                raise UnexpectedPeriodError(t.id, "aperiodic tasks must not carry a period")
            if t.deadline is None:
                raise MissingDeadlineError(t.id, "aperiodic tasks need an explicit deadline")
        elif t.period is None:
            raise MissingPeriodError(t.id, f"{kind.value} task needs a period")
        else:
            _check_tick(t.id, "period", t.period, 1)
        deadline = t.period if t.deadline is None else t.deadline
        _check_tick(t.id, "deadline", deadline, 1)
        if t.wcet > deadline:
            raise WcetExceedsDeadlineError(
                t.id, f"wcet {t.wcet} exceeds relative deadline {deadline}"
            )
        out.append(replace(t, kind=kind, deadline=deadline))
    return TaskSet(tuple(out))


def hyperperiod(task_set: TaskSet) -> int:
    """Least common multiple of all periods (1 for an empty set)."""
    h = 1
    for t in task_set:
        if not t.has_period:
            raise AperiodicPresentError(t.id)
        h = math.lcm(h, t.period)
        if h > MAX_TICK:
            raise TickOverflowError(f"hyperperiod exceeds {MAX_TICK}")
    return h


def release_series(task: TaskSpec, horizon: int) -> list[Job]:
    """Jobs of a periodic task released strictly before ``horizon``."""
    if task.kind is not TaskKind.PERIODIC:
        raise NotPeriodicError(f"task {task.id!r} is {TaskKind(task.kind).value}, not periodic")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    deadline = task.period if task.deadline is None else task.deadline
    jobs = []
    for k, release in enumerate(range(task.phase, horizon, task.period), start=1):
        jobs.append(Job(task.id, k, release, checked_add(release, deadline), task.wcet))
    return jobs


def rm_order(task_set: TaskSet) -> list[TaskSpec]:
    """Rate-monotonic priority order: shortest period first, ties by input order."""
    for t in task_set:
        if not t.has_period:
            raise AperiodicPresentError(t.id)
    return sorted(task_set, key=lambda t: t.period)
