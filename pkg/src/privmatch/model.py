"""Core domain types: locations, workers, tasks, matchings, problem instances."""
from __future__ import annotations

import math
from dataclasses import dataclass, field


class StructuralError(Exception):
    """A matching or group references entities that do not exist, or breaks
    a structural invariant (duplicate worker/task in a matching)."""


@dataclass(frozen=True)
class Location:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")


@dataclass(frozen=True)
class Worker:
    id: int
    true_loc: Location
    reach: float
    perturbed_loc: Location | None = None

    def __post_init__(self):
        if self.reach <= 0:
            raise ValueError(f"worker {self.id}: reach must be > 0, got {self.reach}")


@dataclass(frozen=True)
class Task:
    id: int
    true_loc: Location
    perturbed_loc: Location | None = None


@dataclass(frozen=True, order=True)
class MatchedPair:
    worker_id: int
    task_id: int


class Matching:
    """A set of worker-task pairs. No worker and no task appears twice."""

    def __init__(self, pairs=()):
        self._by_worker: dict[int, int] = {}
        self._by_task: dict[int, int] = {}
        for p in pairs:
            self.add(p)

    def add(self, pair: MatchedPair) -> None:
        if pair.worker_id in self._by_worker:
            raise StructuralError(f"worker {pair.worker_id} already matched")
        if pair.task_id in self._by_task:
            raise StructuralError(f"task {pair.task_id} already matched")
        self._by_worker[pair.worker_id] = pair.task_id
        self._by_task[pair.task_id] = pair.worker_id

    @property
    def pairs(self) -> list[MatchedPair]:
        return [MatchedPair(w, t) for w, t in sorted(self._by_worker.items())]

    def task_of(self, worker_id: int) -> int | None:
        return self._by_worker.get(worker_id)

    def __len__(self) -> int:
        return len(self._by_worker)

    def __contains__(self, pair: MatchedPair) -> bool:
        return self._by_worker.get(pair.worker_id) == pair.task_id

    def __eq__(self, other) -> bool:
        return isinstance(other, Matching) and self._by_worker == other._by_worker

    def __repr__(self) -> str:
        return f"Matching({self.pairs!r})"

    def replace(self, remove_workers, new_pairs) -> "Matching":
        """Return a copy with the given workers' pairs removed and new pairs added."""
        remove = set(remove_workers)
        kept = [p for p in self.pairs if p.worker_id not in remove]
        return Matching(kept + list(new_pairs))


@dataclass(frozen=True)
class ProblemInstance:
    """Workers, tasks and privacy parameters for one assignment batch.

    ``epsilon_per_meter`` is the rate of the planar-Laplace noise, i.e. the
    privacy budget divided by the protection radius.
    """

    workers: tuple[Worker, ...]
    tasks: tuple[Task, ...]
    epsilon_per_meter: float
    rng_seed: int = 0

    def __post_init__(self):
        if self.epsilon_per_meter <= 0:
            raise ValueError("epsilon_per_meter must be > 0")
        wids = [w.id for w in self.workers]
        tids = [t.id for t in self.tasks]
        if len(set(wids)) != len(wids) or len(set(tids)) != len(tids):
            raise ValueError("duplicate entity ids")

    def worker(self, worker_id: int) -> Worker:
        try:
            return self._worker_index[worker_id]
        except KeyError:
            raise StructuralError(f"unknown worker id {worker_id}") from None

    def task(self, task_id: int) -> Task:
        try:
            return self._task_index[task_id]
        except KeyError:
            raise StructuralError(f"unknown task id {task_id}") from None

    @property
    def _worker_index(self) -> dict[int, Worker]:
        idx = object.__getattribute__(self, "__dict__").get("_widx")
        if idx is None:
            idx = {w.id: w for w in self.workers}
            object.__setattr__(self, "_widx", idx)
        return idx

    @property
    def _task_index(self) -> dict[int, Task]:
        idx = object.__getattribute__(self, "__dict__").get("_tidx")
        if idx is None:
            idx = {t.id: t for t in self.tasks}
            object.__setattr__(self, "_tidx", idx)
        return idx


def euclidean_distance(a: Location, b: Location) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def is_reachable_true(w: Worker, t: Task) -> bool:
    """Whether the task lies within the worker's reach, using true locations.

    The comparison is inclusive: a task exactly at distance ``reach`` counts.
    """
    return euclidean_distance(w.true_loc, t.true_loc) <= w.reach


def utility(m: Matching, instance: ProblemInstance) -> int:
    """Number of matched pairs that are reachable under the true locations."""
    count = 0
    for p in m.pairs:
        w = instance.worker(p.worker_id)
        t = instance.task(p.task_id)
        if is_reachable_true(w, t):
            count += 1
    return count
