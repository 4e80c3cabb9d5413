"""Static task-to-core assignment (no migration)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .analysis import Policy, Verdict, analyze_core, policy_for, utilization
from .errors import (
    AperiodicPresentError,
    CoreIndexOutOfRangeError,
    PartitionError,
    UnassignedTaskError,
    UnknownTaskError,
)
from .model import Partition, TaskSet


def validate_manual(task_set: TaskSet, partition: Partition) -> Partition:
    m = partition.core_count
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise PartitionError(f"core count must be >= 1, got {m!r}")
    known = set(task_set.ids)
    for tid, core in partition.assignment.items():
        if tid not in known:
            raise UnknownTaskError(tid)
        if isinstance(core, bool) or not isinstance(core, int) or not 0 <= core < m:
            raise CoreIndexOutOfRangeError(tid, core, m)
    for t in task_set:
        if t.id not in partition.assignment:
            raise UnassignedTaskError(t.id)
    return partition


@dataclass(frozen=True)
class InfeasibleReport:
    """Outcome of a failed placement: what fit, and what did not."""

    partial: Partition
    unplaced: tuple[str, ...]


def _fits(tasks: TaskSet, policy: Policy) -> bool:
    if policy is Policy.EDF:
        return utilization(tasks) <= 1
    return analyze_core(0, tasks, policy).verdict is Verdict.GUARANTEED


def first_fit_decreasing(task_set: TaskSet, m: int,
                         policy: Union[Policy, str, dict] = Policy.EDF) -> Union[Partition, InfeasibleReport]:
    """Place tasks by decreasing utilization on the first core that still passes.

    EDF cores accept while ``U <= 1``. RM cores accept while the core stays
    guaranteed: Liu-Layland bound first, time-demand analysis when the bound
    fails. ``policy`` may be one policy for every core or a per-core map
    (missing cores run EDF, as in ``analyze_partition``).
    """
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise PartitionError(f"core count must be >= 1, got {m!r}")
    core_policy = [policy_for(policy, core) for core in range(m)]
    for t in task_set:
        if not t.has_period:
            raise AperiodicPresentError(t.id)
    order = sorted(enumerate(task_set), key=lambda it: (-Fraction(it[1].wcet, it[1].period), it[0]))
    bins: list[list] = [[] for _ in range(m)]
    assignment = {}
    unplaced = []
    for pos, task in order:
        for core in range(m):
            # canonical order inside a core keeps RM tie-breaks identical to
            # what analyze_partition will see
            candidate = sorted(bins[core] + [(pos, task)], key=lambda it: it[0])
            if _fits(TaskSet(tuple(t for _, t in candidate)), core_policy[core]):
                bins[core] = candidate
                assignment[task.id] = core
                break
        else:
            unplaced.append(task.id)
    # keep the canonical order in the assignment mapping
    assignment = {t.id: assignment[t.id] for t in task_set if t.id in assignment}
    if unplaced:
        return InfeasibleReport(Partition(m, assignment), tuple(unplaced))
    return Partition(m, assignment)
