"""Geo-indistinguishable location perturbation and reachability likelihoods.

The perturbation mechanism is the standard planar Laplace: the noise angle is
uniform and the noise radius follows an Erlang-2 distribution with rate equal
to the per-meter privacy parameter. The radius is sampled as the sum of two
independent exponential draws, which has exactly that distribution.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .model import Location, ProblemInstance, Task, Worker


@dataclass(frozen=True)
class GeoIParams:
    """Noise rate in 1/meters (privacy budget divided by protection radius)."""

    epsilon_per_meter: float

    def __post_init__(self):
        if self.epsilon_per_meter <= 0:
            raise ValueError("epsilon_per_meter must be > 0")


def sample_noise(params: GeoIParams, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Sample planar-Laplace noise vectors, shape (size, 2)."""
    scale = 1.0 / params.epsilon_per_meter
    radius = rng.exponential(scale, size) + rng.exponential(scale, size)
    theta = rng.uniform(0.0, 2.0 * np.pi, size)
    return np.column_stack((radius * np.cos(theta), radius * np.sin(theta)))


def perturb(loc: Location, params: GeoIParams, rng: np.random.Generator) -> Location:
    dx, dy = sample_noise(params, rng, 1)[0]
    return Location(loc.x + dx, loc.y + dy)


def perturb_instance(instance: ProblemInstance,
                     rng: np.random.Generator | None = None) -> ProblemInstance:
    """Give every worker and task an independently perturbed location.

    All entities use the same noise rate (``instance.epsilon_per_meter``).
    """
    if rng is None:
        rng = np.random.default_rng(instance.rng_seed)
    params = GeoIParams(instance.epsilon_per_meter)
    workers = tuple(
        Worker(w.id, w.true_loc, w.reach, perturb(w.true_loc, params, rng))
        for w in instance.workers
    )
    tasks = tuple(
        Task(t.id, t.true_loc, perturb(t.true_loc, params, rng))
        for t in instance.tasks
    )
    return ProblemInstance(workers, tasks, instance.epsilon_per_meter, instance.rng_seed)


class ReachProbEstimator:
    """Monte-Carlo estimate of P(true distance <= reach | observed distance).

    Both endpoints are modeled as independently perturbed. The estimator is a
    discretized posterior with a uniform prior over candidate true separations
    on a grid [0, 3*observed]: each candidate is weighted by the empirical
    likelihood that re-perturbing both endpoints reproduces a separation
    within a small band around the observed one. A single pool of
    noise-difference vectors (fixed seed) is shared by all queries, which
    keeps results deterministic and smooth across nearby inputs.
    """

    GRID_STEPS = 150
    QUANTUM = 10.0  # meters; cache key resolution for observed distances

    def __init__(self, sample_count: int = 20_000, rng_seed: int = 0):
        if sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        self.sample_count = sample_count
        self.rng_seed = rng_seed
        self._cache: dict[tuple[float, float, float], float] = {}
        self._lock = threading.Lock()
        self._noise_pool: dict[float, np.ndarray] = {}

    def _noise_diffs(self, params: GeoIParams) -> np.ndarray:
        """Pooled (noise_a - noise_b) vectors for this noise rate."""
        key = params.epsilon_per_meter
        pool = self._noise_pool.get(key)
        if pool is None:
            rng = np.random.default_rng(self.rng_seed)
            pool = sample_noise(params, rng, self.sample_count) \
                - sample_noise(params, rng, self.sample_count)
            with self._lock:
                self._noise_pool[key] = pool
        return pool

    def reach_probability(self, observed_distance: float, reach: float,
                          params: GeoIParams) -> float:
        if observed_distance < 0 or reach < 0:
            raise ValueError("observed_distance and reach must be >= 0")
        if reach == 0:
            return 0.0
        q = round(observed_distance / self.QUANTUM) * self.QUANTUM
        key = (q, reach, params.epsilon_per_meter)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        value = self._estimate(q, reach, params)
        with self._lock:
            self._cache[key] = value
        return value

    def _estimate(self, observed: float, reach: float, params: GeoIParams) -> float:
        if observed == 0:
            # Coincident perturbed points: the only grid candidate is s = 0.
            return 1.0
        span = 3.0 * observed
        grid = np.linspace(0.0, span, self.GRID_STEPS + 1)
        band = observed / 50.0

        diffs = self._noise_diffs(params)
        # Perturbed separation for candidate s: |(s, 0) + (noise_a - noise_b)|.
        sep = np.hypot(grid[:, None] + diffs[:, 0][None, :], diffs[:, 1][None, :])
        likelihood = np.mean(np.abs(sep - observed) <= band, axis=1)

        total = likelihood.sum()
        if total <= 0:
            # Observed separation is in the far tail of every candidate; fall
            # back on the prior restricted to the grid.
            posterior = np.full(grid.shape, 1.0 / grid.size)
        else:
            posterior = likelihood / total
        # Integrate the posterior as a piecewise-constant density over the
        # cell around each grid point (clipped to [0, span]), so the result
        # varies continuously in reach instead of jumping at grid points.
        step = grid[1] - grid[0]
        lo = np.clip(grid - step / 2.0, 0.0, span)
        hi = np.clip(grid + step / 2.0, 0.0, span)
        overlap = np.clip(np.minimum(hi, reach) - lo, 0.0, None)
        width = hi - lo
        p = float(np.sum(posterior * overlap / width))
        return min(1.0, max(0.0, p))
