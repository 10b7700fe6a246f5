"""Experiment harness: dataset generation/ingestion, method runs, sweeps.

Synthetic instances sample worker and task locations uniformly from an
8000 m x 8000 m square. Real coordinates (latitude/longitude CSV) are
projected to planar meters with an equirectangular projection and shifted so
the lower-left corner is the origin.
"""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .geo import ReachProbEstimator, perturb_instance
from .matching import (match_max_cardinality, match_optimal,
                       match_randomized_rounding)
from .model import Location, ProblemInstance, Task, Worker, utility
from .switching import SwitchConfig, run_switch

DOMAIN_SIZE = 8000.0
DEFAULT_R = 1000.0
# Calibrated so the ground-truth optimum matches >= ~90% of tasks at n=100
# on the synthetic domain; re-derivable with calibrate_reach().
DEFAULT_REACH = 1075.0
EARTH_RADIUS_M = 6_371_000.0

METHODS = ("OM", "ORR", "KS", "OPT")

CSV_FIELDS = ("method", "n_workers", "n_tasks", "epsilon", "k", "lambda",
              "trial", "utility", "matching_size", "wall_time_s")


class DataError(Exception):
    """Malformed input data file."""


@dataclass(frozen=True)
class ExperimentConfig:
    method: str = "OM"
    n_workers: int = 100
    n_tasks: int = 100
    epsilon: float = 0.4
    r: float = DEFAULT_R
    reach_default: float = DEFAULT_REACH
    k: int = 2
    lam: int = 20
    trials: int = 1
    rng_seed: int = 0
    dataset: str = "synthetic"  # "synthetic" or a CSV path
    key_bits: int = 512
    estimator_samples: int = 20_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def epsilon_per_meter(self) -> float:
        return self.epsilon / self.r


@dataclass(frozen=True)
class RunResult:
    method: str
    n_workers: int
    n_tasks: int
    epsilon: float
    k: int
    lam: int
    trial: int
    utility: int
    matching_size: int
    wall_time_s: float
    rounds: tuple = ()

    def csv_row(self) -> dict:
        return {
            "method": self.method, "n_workers": self.n_workers,
            "n_tasks": self.n_tasks, "epsilon": self.epsilon, "k": self.k,
            "lambda": self.lam, "trial": self.trial, "utility": self.utility,
            "matching_size": self.matching_size,
            "wall_time_s": f"{self.wall_time_s:.6f}",
        }


def gen_synthetic(n_workers: int, n_tasks: int, reach_default: float,
                  rng: np.random.Generator,
                  epsilon_per_meter: float = 0.4 / DEFAULT_R) -> ProblemInstance:
    """Uniform i.i.d. locations on the square synthetic domain."""
    if n_workers < 0 or n_tasks < 0:
        raise ValueError("counts must be >= 0")
    wxy = rng.uniform(0.0, DOMAIN_SIZE, (n_workers, 2))
    txy = rng.uniform(0.0, DOMAIN_SIZE, (n_tasks, 2))
    workers = tuple(Worker(i, Location(x, y), reach_default)
                    for i, (x, y) in enumerate(wxy))
    tasks = tuple(Task(j, Location(x, y)) for j, (x, y) in enumerate(txy))
    return ProblemInstance(workers, tasks, epsilon_per_meter)


def ingest_latlon(path: str | Path, reach_default: float,
                  epsilon_per_meter: float = 0.4 / DEFAULT_R) -> ProblemInstance:
    """Read a role/lat/lon (or role/x/y) CSV into a planar instance.

    Latitude/longitude rows are projected equirectangularly: x scales the
    longitude offset by cos(mean latitude), y scales the latitude offset,
    both by the Earth radius; the lower-left point then shifts to (0, 0).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return ProblemInstance((), (), epsilon_per_meter)
        header = [h.strip().lower() for h in header]
        if header[:3] == ["role", "lat", "lon"]:
            geographic = True
        elif header[:3] == ["role", "x", "y"]:
            geographic = False
        else:
            raise DataError(f"{path}:1: expected header role,lat,lon or role,x,y")

        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                role = row[0].strip().lower()
                a, b = float(row[1]), float(row[2])
            except (IndexError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: malformed row {row!r}") from exc
            if role not in ("w", "t"):
                raise DataError(f"{path}:{lineno}: role must be w or t")
            rows.append((role, a, b))

    if not rows:
        return ProblemInstance((), (), epsilon_per_meter)

    if geographic:
        mean_lat = math.radians(sum(a for _, a, _ in rows) / len(rows))
        pts = [(EARTH_RADIUS_M * math.radians(lon) * math.cos(mean_lat),
                EARTH_RADIUS_M * math.radians(lat))
               for _, lat, lon in rows]
    else:
        pts = [(a, b) for _, a, b in rows]
    min_x = min(p[0] for p in pts)
    min_y = min(p[1] for p in pts)
    pts = [(x - min_x, y - min_y) for x, y in pts]

    workers, tasks = [], []
    for (role, _, _), (x, y) in zip(rows, pts):
        if role == "w":
            workers.append(Worker(len(workers), Location(x, y), reach_default))
        else:
            tasks.append(Task(len(tasks), Location(x, y)))
    return ProblemInstance(tuple(workers), tuple(tasks), epsilon_per_meter)


def _trial_instance(cfg: ExperimentConfig, trial: int) -> ProblemInstance:
    """Perturbed instance for one trial; identical across methods for a
    given (seed, trial) so method comparisons are paired."""
    gen_rng = np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, trial, 0]))
    if cfg.dataset == "synthetic":
        inst = gen_synthetic(cfg.n_workers, cfg.n_tasks, cfg.reach_default,
                             gen_rng, cfg.epsilon_per_meter)
    else:
        inst = ingest_latlon(cfg.dataset, cfg.reach_default, cfg.epsilon_per_meter)
    perturb_rng = np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, trial, 1]))
    return perturb_instance(inst, perturb_rng)


def _run_method(cfg: ExperimentConfig, instance: ProblemInstance, trial: int):
    method_rng = np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, trial, 2]))
    rounds = ()
    if cfg.method == "OM":
        m = match_max_cardinality(instance)
    elif cfg.method == "OPT":
        m = match_optimal(instance)
    elif cfg.method == "ORR":
        estimator = ReachProbEstimator(cfg.estimator_samples,
                                       rng_seed=cfg.rng_seed)
        m = match_randomized_rounding(instance, estimator, method_rng)
    else:  # KS
        seed = int(np.random.SeedSequence([cfg.rng_seed, trial, 3]).generate_state(1)[0])
        switch_cfg = SwitchConfig(k=cfg.k, max_rounds=cfg.lam,
                                  rng_seed=seed, key_bits=cfg.key_bits)
        m, reports = run_switch(instance, switch_cfg)
        rounds = tuple(reports)
    return m, rounds


def run_experiment(cfg: ExperimentConfig) -> list[RunResult]:
    results = []
    for trial in range(cfg.trials):
        instance = _trial_instance(cfg, trial)
        start = time.perf_counter()
        m, rounds = _run_method(cfg, instance, trial)
        elapsed = time.perf_counter() - start
        results.append(RunResult(
            cfg.method, len(instance.workers), len(instance.tasks),
            cfg.epsilon, cfg.k, cfg.lam, trial,
            utility(m, instance), len(m), elapsed, rounds))
    return results


def write_csv(results: list[RunResult], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for r in results:
            writer.writerow(r.csv_row())


def summarize(results: list[RunResult]) -> dict:
    out = {}
    for metric in ("utility", "matching_size", "wall_time_s"):
        values = [getattr(r, metric) for r in results]
        out[metric] = {
            "mean": float(np.mean(values)) if values else 0.0,
            "std": float(np.std(values)) if values else 0.0,
            "min": float(np.min(values)) if values else 0.0,
            "max": float(np.max(values)) if values else 0.0,
        }
    out["trials"] = len(results)
    return out


def write_summary(results: list[RunResult], path: str | Path) -> None:
    with Path(path).open("w") as fh:
        json.dump(summarize(results), fh, indent=2)
        fh.write("\n")


def calibrate_reach(target_fraction: float = 0.9, n: int = 100, trials: int = 5,
                    rng_seed: int = 0, tol: float = 10.0) -> float:
    """Smallest reach (binary search) whose ground-truth optimum matches at
    least ``target_fraction`` of tasks on synthetic instances."""
    lo, hi = 10.0, DOMAIN_SIZE

    def opt_fraction(reach: float) -> float:
        total = 0
        for trial in range(trials):
            rng = np.random.default_rng(np.random.SeedSequence([rng_seed, trial]))
            inst = gen_synthetic(n, n, reach, rng)
            total += len(match_optimal(inst))
        return total / (trials * n)

    if opt_fraction(hi) < target_fraction:
        return hi
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if opt_fraction(mid) >= target_fraction:
            hi = mid
        else:
            lo = mid
    return hi
