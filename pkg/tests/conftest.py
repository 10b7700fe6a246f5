"""Shared fixtures and instance builders for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

from privmatch.model import Location, ProblemInstance, Task, Worker


def make_instance(workers, tasks, epsilon_per_meter=0.4 / 1000,
                  perturbed_equal_true=True):
    """Build an instance from compact tuples.

    ``workers`` entries are (x, y, reach) and ``tasks`` entries are (x, y).
    With ``perturbed_equal_true`` the perturbed location mirrors the true one,
    which makes reachability graphs easy to reason about in unit tests.
    """
    ws = []
    for i, (x, y, reach) in enumerate(workers):
        loc = Location(x, y)
        ws.append(Worker(i, loc, reach, loc if perturbed_equal_true else None))
    ts = []
    for j, (x, y) in enumerate(tasks):
        loc = Location(x, y)
        ts.append(Task(j, loc, loc if perturbed_equal_true else None))
    return ProblemInstance(tuple(ws), tuple(ts), epsilon_per_meter)


def make_split_instance(worker_rows, task_rows, epsilon_per_meter=0.4 / 1000):
    """Instance where true and perturbed locations differ.

    ``worker_rows`` entries are (true_xy, perturbed_xy, reach) and
    ``task_rows`` entries are (true_xy, perturbed_xy).
    """
    ws = tuple(Worker(i, Location(*t), reach, Location(*p))
               for i, (t, p, reach) in enumerate(worker_rows))
    ts = tuple(Task(j, Location(*t), Location(*p))
               for j, (t, p) in enumerate(task_rows))
    return ProblemInstance(ws, ts, epsilon_per_meter)


def random_planar_instance(rng, n_workers, n_tasks, domain=1000.0, reach=300.0,
                           noise=0.0):
    """Uniform random instance; optional Gaussian perturbation noise."""
    ws = []
    for i in range(n_workers):
        true = Location(*rng.uniform(0, domain, 2))
        pert = Location(true.x + rng.normal(0, noise), true.y + rng.normal(0, noise)) \
            if noise else true
        ws.append(Worker(i, true, reach, pert))
    ts = []
    for j in range(n_tasks):
        true = Location(*rng.uniform(0, domain, 2))
        pert = Location(true.x + rng.normal(0, noise), true.y + rng.normal(0, noise)) \
            if noise else true
        ts.append(Task(j, true, pert))
    return ProblemInstance(tuple(ws), tuple(ts), 0.4 / 1000)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
