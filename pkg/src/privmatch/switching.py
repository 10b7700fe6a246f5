"""Round-based orchestration: baseline matching, grouping, secure in-group
re-matching, repeated for a bounded number of rounds.

Each round partitions the current matching into groups, runs the secure
exchange per group, and commits all accepted swaps at once. A round that
applies no swap ends the run early. Per-group utility can only improve, so
the overall utility is nondecreasing across rounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import protocol
from .grouping import KDivision, exact_pair_division, greedy_grouping
from .matching import match_max_cardinality
from .model import Matching, ProblemInstance


@dataclass(frozen=True)
class SwitchConfig:
    k: int = 2
    max_rounds: int = 20
    grouping: str = "greedy"  # "greedy" | "exact2"
    rng_seed: int = 0
    key_bits: int = protocol.DEFAULT_KEY_BITS
    keep_transcripts: bool = False
    # Grouping tie resolution as a fraction of the mean noise radius. Group
    # scores are computed from perturbed locations, so differences below the
    # noise scale are not meaningful; treating them as ties (broken randomly
    # per round) lets successive rounds explore different divisions.
    tie_quantum_frac: float = 1.0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.grouping not in ("greedy", "exact2"):
            raise ValueError(f"unknown grouping {self.grouping!r}")


@dataclass(frozen=True)
class RoundReport:
    round_index: int
    groups_formed: int
    swaps_applied: int
    utility_delta: int
    transcripts: tuple = ()


def _round_rng(cfg: SwitchConfig, round_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, round_index]))


def refresh_division(m: Matching, cfg: SwitchConfig, instance: ProblemInstance,
                     round_index: int) -> KDivision:
    """Division for one round; the rng stream advances with the round index,
    so tie-breaks and odd-k random picks differ across rounds."""
    rng = _round_rng(cfg, round_index)
    if cfg.grouping == "exact2":
        return exact_pair_division(m, instance, rng)
    quantum = cfg.tie_quantum_frac * 2.0 / instance.epsilon_per_meter
    return greedy_grouping(m, cfg.k, instance, rng, score_quantum=quantum)


def run_switch(instance: ProblemInstance,
               cfg: SwitchConfig) -> tuple[Matching, list[RoundReport]]:
    """Baseline matching plus up to ``max_rounds`` of grouped secure swaps."""
    m = match_max_cardinality(instance)
    reports: list[RoundReport] = []
    for r in range(cfg.max_rounds):
        division = refresh_division(m, cfg, instance, r)
        rng = np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, r, 1]))
        swaps = 0
        delta = 0
        transcripts = []
        for gi, group in enumerate(division.groups):
            if len(group.pairs) < 2:
                continue
            result = protocol.run_group_exchange(group, instance, rng,
                                                 key_bits=cfg.key_bits)
            if cfg.keep_transcripts:
                transcripts.append((r, gi, result.transcript))
            if result.swapped:
                swaps += 1
                delta += result.group_utility_after - result.group_utility_before
                m = m.replace((p.worker_id for p in group.pairs),
                              result.new_pairs)
        reports.append(RoundReport(r, len(division.groups), swaps, delta,
                                   tuple(transcripts)))
        if swaps == 0:
            break
    return m, reports
