"""Per-core tick loop of the scheduling simulator.

The same Python source is used twice: compiled with ``numba.njit`` when
numba is importable, and executed as plain Python over numpy arrays
otherwise. Setting ``MCSCHED_DISABLE_NUMBA=1`` forces the plain path.

Job arrays (one entry per job, sorted by release then canonical task rank
then job index):

    release, deadline, wcet   int64 ticks
    rm_key                    int64, the task period (fixed-priority key)
    rank, index               int64, canonical task position and job number
    kind                      int64, KIND_* constant

Outputs:

    run       int64[horizon]  job executing in each tick, -1 when idle
    finish    int64[n]        completion instant, -1 if unfinished
    miss      int64[n]        deadline-miss instant, -1 if none
    status    int64[n]        STATUS_* constant
    executed  int64[n]        ticks received
"""

import os
import types

import numpy as np

KIND_PERIODIC = 0
KIND_SPORADIC = 1
KIND_APERIODIC = 2

POLICY_EDF = 0
POLICY_RM = 1

LATE_DEMOTE = 0
LATE_ABORT = 1

STATUS_NORMAL = 0
STATUS_ADMITTED = 1
STATUS_REJECTED = 2
STATUS_ABORTED = 3


def _outranks(a, b, background, policy, deadline, release, rm_key, rank, index):
    """True when job ``a`` has strictly higher priority than job ``b``."""
    if policy == POLICY_RM and not background:
        ka, kb = rm_key[a], rm_key[b]
    else:
        ka, kb = deadline[a], deadline[b]
    if ka != kb:
        return ka < kb
    if release[a] != release[b]:
        return release[a] < release[b]
    if rank[a] != rank[b]:
        return rank[a] < rank[b]
    return index[a] < index[b]


def _admits(j, now, ptr, active, nact, late, remaining,
            release, deadline, wcet, kind):
    """Processor-demand admission test for sporadic job ``j`` at ``now``.

    Demand at a checkpoint ``d`` counts the remaining work of every pending
    deadline-bearing job due by ``d``, every not-yet-released periodic job
    due by ``d``, and the candidate itself.
    """
    n = release.shape[0]
    for c in range(nact + 1):
        if c == nact:
            d = deadline[j]
        else:
            a = active[c]
            if late[a] or kind[a] == KIND_APERIODIC:
                continue
            d = deadline[a]
        demand = 0
        if deadline[j] <= d:
            demand += wcet[j]
        for q in range(nact):
            a = active[q]
            if late[a] or kind[a] == KIND_APERIODIC:
                continue
            if deadline[a] <= d:
                demand += remaining[a]
        f = ptr
        while f < n and release[f] < d:
            if kind[f] == KIND_PERIODIC and deadline[f] <= d:
                demand += wcet[f]
            f += 1
        if demand > d - now:
            return False
    return True


def _expire(now, active, nact, late, deadline, miss, status, late_policy):
    """Flag jobs whose deadline has arrived unfinished; returns the new active count."""
    q = 0
    while q < nact:
        a = active[q]
        if not late[a] and deadline[a] <= now:
            miss[a] = now
            if late_policy == LATE_ABORT:
                status[a] = STATUS_ABORTED
                nact -= 1
                active[q] = active[nact]
                continue
            late[a] = True
        q += 1
    return nact


def simulate_core_python(release, deadline, wcet, rm_key, rank, index, kind,
                         policy, late_policy, horizon):
    n = release.shape[0]
    run = np.full(horizon, -1, dtype=np.int64)
    finish = np.full(n, -1, dtype=np.int64)
    miss = np.full(n, -1, dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)
    remaining = wcet.copy()
    late = np.zeros(n, dtype=np.bool_)
    active = np.empty(n, dtype=np.int64)
    nact = 0
    ptr = 0
    for now in range(horizon + 1):
        # deadline checks come first so that admission never counts a job
        # that is already past due
        nact = _expire(now, active, nact, late, deadline, miss, status, late_policy)
        if now == horizon:
            break
        while ptr < n and release[ptr] == now:
            j = ptr
            ptr += 1
            if kind[j] == KIND_SPORADIC and policy == POLICY_EDF:
                if _admits(j, now, ptr, active, nact, late, remaining,
                           release, deadline, wcet, kind):
                    status[j] = STATUS_ADMITTED
                else:
                    status[j] = STATUS_REJECTED
                    continue
            active[nact] = j
            nact += 1
        best = -1
        best_pos = -1
        best_bg = True
        for q in range(nact):
            a = active[q]
            bg = late[a] or kind[a] == KIND_APERIODIC
            if best == -1 or (best_bg and not bg):
                best, best_pos, best_bg = a, q, bg
            elif bg == best_bg and _outranks(a, best, bg, policy, deadline, release,
                                             rm_key, rank, index):
                best, best_pos = a, q
        if best >= 0:
            run[now] = best
            remaining[best] -= 1
            if remaining[best] == 0:
                finish[best] = now + 1
                nact -= 1
                active[best_pos] = active[nact]
    executed = wcet - remaining
    for j in range(n):
        if status[j] == STATUS_REJECTED:
            executed[j] = 0
    return run, finish, miss, status, executed


def _numba_disabled():
    return os.environ.get("MCSCHED_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


simulate_core_numba = None
try:
    import numba

    _outranks_jit = numba.njit(cache=True)(_outranks)
    _admits_jit = numba.njit(cache=True)(_admits)
    _expire_jit = numba.njit(cache=True)(_expire)

    # the njit'd function resolves helper names from its own globals, so the
    # compiled variant is built from a namespace that points at the jitted
    # helpers rather than the Python ones
    _ns = dict(globals())
    _ns["_outranks"] = _outranks_jit
    _ns["_admits"] = _admits_jit
    _ns["_expire"] = _expire_jit
    _sim_for_jit = types.FunctionType(simulate_core_python.__code__, _ns, "simulate_core_numba")
    simulate_core_numba = numba.njit(cache=True)(_sim_for_jit)
except ImportError:  # pragma: no cover - keeps the package usable where numba cannot install
    pass

if simulate_core_numba is not None and not _numba_disabled():
    simulate_core = simulate_core_numba
    BACKEND = "numba"
else:
    simulate_core = simulate_core_python
    BACKEND = "python"
