import os
import random
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mcsched import Partition, TaskSet, TaskSpec, validate_task_set  # noqa: E402

ACCEPTANCE_LINES = []

PERIOD_POOL = (2, 4, 5, 8, 10, 16, 20, 25, 40)


def make_set(params, kind="periodic"):
    """Build a validated TaskSet from ``(C, T[, D[, phase]])`` tuples.

    Task ids are t1, t2, ... in the given order.
    """
    specs = []
    for i, p in enumerate(params, start=1):
        c, t = p[0], p[1]
        d = p[2] if len(p) > 2 else None
        phase = p[3] if len(p) > 3 else 0
        specs.append(TaskSpec(f"t{i}", kind, c, t, d, phase))
    return validate_task_set(TaskSet(tuple(specs)))


def one_core(ts, m=1):
    return Partition(m, {t.id: 0 for t in ts})


def uunifast(n, total, rng):
    shares = []
    remaining = total
    for i in range(1, n):
        nxt = remaining * rng.random() ** (1.0 / (n - i))
        shares.append(remaining - nxt)
        remaining = nxt
    shares.append(remaining)
    return shares


def random_params(rng, n, target, periods=PERIOD_POOL, constrained=False, round_up=False):
    """Integer (C, T[, D]) tuples with utilization shares drawn by UUniFast."""
    out = []
    for u in uunifast(n, target, rng):
        t = rng.choice(periods)
        c = int(u * t + (0.999999 if round_up else 0))
        c = min(t, max(1, c))
        if constrained:
            out.append((c, t, rng.randint(c, t)))
        else:
            out.append((c, t))
    return out


def util(params):
    return sum((Fraction(p[0], p[1]) for p in params), Fraction(0))


@pytest.fixture
def rng():
    return random.Random(20261016)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
