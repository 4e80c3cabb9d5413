"""Independent brute-force reference implementations used by the tests.

Nothing here imports the package's engine, analysis or partition modules.
Tasks are plain tuples so the oracle cannot share bugs with the model
layer: ``(wcet, period)`` or ``(wcet, period, deadline)`` or
``(wcet, period, deadline, phase)``.
"""

from fractions import Fraction
from itertools import product
from math import gcd


def _norm(task):
    c, t = task[0], task[1]
    d = task[2] if len(task) > 2 else t
    phase = task[3] if len(task) > 3 else 0
    return c, t, d, phase


def lcm_all(periods):
    h = 1
    for p in periods:
        h = h * p // gcd(h, p)
    return h


def simulate(tasks, horizon, policy="edf"):
    """Tick-by-tick uniprocessor simulation with no deadline handling.

    Late jobs keep their normal priority (plain EDF / plain fixed
    priority). Fixed priority uses the order of ``tasks`` as given, so
    callers pass them already sorted.

    Returns ``(completions, misses, executed)`` where ``completions`` maps
    ``(task_index, job_number)`` to the completion instant, ``misses`` is a
    list of ``(deadline, task_index, job_number, executed_at_deadline)``
    and ``executed`` maps job keys to ticks run.
    """
    tasks = [_norm(t) for t in tasks]
    jobs = {}
    for i, (c, t, d, phase) in enumerate(tasks):
        r, k = phase, 1
        while r < horizon:
            jobs[(i, k)] = {"release": r, "deadline": r + d, "left": c, "wcet": c}
            r += t
            k += 1
    completions = {}
    misses = []
    for now in range(horizon + 1):
        for key, j in sorted(jobs.items()):
            if j["deadline"] == now and j["left"] > 0:
                misses.append((now, key[0], key[1], j["wcet"] - j["left"]))
        if now == horizon:
            break
        ready = [key for key, j in jobs.items() if j["release"] <= now and j["left"] > 0]
        if not ready:
            continue
        if policy == "edf":
            best = min(ready, key=lambda k: (jobs[k]["deadline"], jobs[k]["release"], k))
        else:
            best = min(ready, key=lambda k: (k[0], k[1]))
        jobs[best]["left"] -= 1
        if jobs[best]["left"] == 0:
            completions[best] = now + 1
    executed = {k: j["wcet"] - j["left"] for k, j in jobs.items()}
    return completions, misses, executed


def first_job_response(tasks_by_priority, i):
    """Completion of the first job of task ``i`` at a synchronous release.

    Returns ``None`` when that job misses its deadline.
    """
    sub = [(_norm(t)[0], _norm(t)[1], _norm(t)[2], 0) for t in tasks_by_priority[: i + 1]]
    c, t, d, _ = sub[i]
    completions, _, _ = simulate(sub, d + 1, policy="fp")
    done = completions.get((i, 1))
    if done is None or done > d:
        return None
    return done


def utilization(tasks):
    return sum((Fraction(_norm(t)[0], _norm(t)[1]) for t in tasks), Fraction(0))


def edf_demand_feasible(jobs, now):
    """Processor-demand check for a known set of pending jobs.

    ``jobs`` is a list of ``(remaining, abs_deadline)``. Feasible iff every
    deadline ``d`` has cumulative demand <= d - now.
    """
    for _, d in jobs:
        demand = sum(rem for rem, dd in jobs if dd <= d)
        if demand > d - now:
            return False
    return True


def exhaustive_partition_exists(utils, m, fits):
    """Try all m**n assignments of items to bins; ``fits`` judges one bin."""
    n = len(utils)
    for assign in product(range(m), repeat=n):
        bins = [[] for _ in range(m)]
        for item, core in enumerate(assign):
            bins[core].append(item)
        if all(fits(b) for b in bins):
            return True
    return False
