"""Grouping of matched pairs by perturbed-location proximity.

A division partitions the current matching into groups of ``k`` pairs
(at most one group may be short). The score of a 2-group is the perturbed
worker-worker distance plus the perturbed task-task distance; a k-group
scores the sum over all its 2-subsets. Lower is better: low-score groups are
spatially clustered, so swapping tasks inside them is more likely to help.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .model import Matching, MatchedPair, ProblemInstance


@dataclass(frozen=True)
class KGroup:
    pairs: tuple[MatchedPair, ...]

    def __post_init__(self):
        workers = [p.worker_id for p in self.pairs]
        if len(set(workers)) != len(workers):
            raise ValueError("duplicate worker in group")

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class KDivision:
    groups: tuple[KGroup, ...]
    k: int


@dataclass(frozen=True)
class WeightedCompleteGraph:
    """Complete graph on matched pairs, edge weights = 2-group scores."""

    vertices: tuple[MatchedPair, ...]
    weights: dict  # (i, j) with i < j -> weight


@dataclass(frozen=True)
class BipartiteCopyGraph:
    """Left/right copies of a complete graph's nodes; edge (i, j') for i < j."""

    left: tuple[int, ...]
    right: tuple[int, ...]
    edges: tuple[tuple[int, int, float], ...]


def pair_score(p1: MatchedPair, p2: MatchedPair, instance: ProblemInstance) -> float:
    """Score of a 2-group: perturbed worker distance + perturbed task distance."""
    if p1.worker_id == p2.worker_id:
        raise ValueError("2-group needs two distinct workers")
    w1 = instance.worker(p1.worker_id).perturbed_loc
    w2 = instance.worker(p2.worker_id).perturbed_loc
    t1 = instance.task(p1.task_id).perturbed_loc
    t2 = instance.task(p2.task_id).perturbed_loc
    return math.hypot(w1.x - w2.x, w1.y - w2.y) + math.hypot(t1.x - t2.x, t1.y - t2.y)


def group_score(g: KGroup, instance: ProblemInstance) -> float:
    return sum(pair_score(p1, p2, instance)
               for p1, p2 in itertools.combinations(g.pairs, 2))


def division_score(d: KDivision, instance: ProblemInstance) -> float:
    return sum(group_score(g, instance) for g in d.groups)


def _score_matrix(pairs: list[MatchedPair], instance: ProblemInstance) -> np.ndarray:
    wx = np.asarray([instance.worker(p.worker_id).perturbed_loc.x for p in pairs])
    wy = np.asarray([instance.worker(p.worker_id).perturbed_loc.y for p in pairs])
    tx = np.asarray([instance.task(p.task_id).perturbed_loc.x for p in pairs])
    ty = np.asarray([instance.task(p.task_id).perturbed_loc.y for p in pairs])
    dw = np.hypot(wx[:, None] - wx[None, :], wy[:, None] - wy[None, :])
    dt = np.hypot(tx[:, None] - tx[None, :], ty[:, None] - ty[None, :])
    return dw + dt


def greedy_grouping(m0: Matching, k: int, instance: ProblemInstance,
                    rng: np.random.Generator, score_quantum: float = 0.0) -> KDivision:
    """Pack groups greedily, repeatedly taking the cheapest unused 2-group.

    Odd ``k`` tops each group off with a random unused pair. Ties on equal
    scores break lexicographically on the pair indices, so the result is
    deterministic for a given rng state.

    ``score_quantum`` > 0 widens the tie notion: scores are compared at that
    resolution and ties within a bucket are ordered randomly (from ``rng``).
    Score differences far below the perturbation noise scale carry no real
    signal, and the round-based orchestrator relies on this to explore a
    different division each round.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    pairs = m0.pairs
    n = len(pairs)
    if n == 0:
        return KDivision((), k)

    scores = _score_matrix(pairs, instance)
    iu, ju = np.triu_indices(n, 1)
    flat = scores[iu, ju]
    if score_quantum > 0:
        buckets = np.floor(flat / score_quantum)
        order = np.lexsort((rng.random(flat.size), buckets))
    else:
        # Ascending by score, then (i, j) for deterministic tie-breaks.
        order = np.lexsort((ju, iu, flat))
    ranked = list(zip(iu[order], ju[order]))

    used = [False] * n
    cursor = 0
    d = math.ceil(n / k)
    groups = []
    for _ in range(d):
        g: list[int] = []
        while len(g) < k:
            if len(g) == k - 1:
                unused = [i for i in range(n) if not used[i]]
                if not unused:
                    break
                pick = unused[rng.integers(len(unused))]
                used[pick] = True
                g.append(pick)
                break
            while cursor < len(ranked):
                i, j = ranked[cursor]
                cursor += 1
                if not used[i] and not used[j]:
                    used[i] = used[j] = True
                    g.extend((i, j))
                    break
            else:
                # Cheapest-2-group stream exhausted; append leftovers in order.
                for i in range(n):
                    if not used[i] and len(g) < k:
                        used[i] = True
                        g.append(i)
                break
        if g:
            groups.append(KGroup(tuple(pairs[i] for i in sorted(g))))
    return KDivision(tuple(groups), k)


def build_score_graph(m0: Matching, instance: ProblemInstance) -> WeightedCompleteGraph:
    pairs = m0.pairs
    scores = _score_matrix(pairs, instance)
    weights = {(i, j): float(scores[i, j])
               for i, j in itertools.combinations(range(len(pairs)), 2)}
    return WeightedCompleteGraph(tuple(pairs), weights)


def graph_transform(g: WeightedCompleteGraph) -> BipartiteCopyGraph:
    """Duplicate each node into a left original and a right copy.

    An edge (i, j') with the source weight is added for i < j only, so each
    undirected source edge appears once and no node connects to its own copy.
    """
    n = len(g.vertices)
    if n < 2:
        raise ValueError("need at least 2 vertices")
    edges = tuple((i, j, g.weights[(i, j)])
                  for i, j in itertools.combinations(range(n), 2))
    return BipartiteCopyGraph(tuple(range(n)), tuple(range(n)), edges)


def exact_pair_division(m0: Matching, instance: ProblemInstance,
                        rng: np.random.Generator | None = None) -> KDivision:
    """Minimum-score division into groups of 2.

    Solved as minimum-weight perfect matching on the complete score graph.
    An odd matching sets one randomly chosen pair aside as a singleton group.
    """
    pairs = list(m0.pairs)
    leftover = None
    if len(pairs) % 2 == 1:
        if rng is None:
            rng = np.random.default_rng(0)
        leftover = pairs.pop(rng.integers(len(pairs)))
    if not pairs:
        groups = [KGroup((leftover,))] if leftover else []
        return KDivision(tuple(groups), 2)

    scores = _score_matrix(pairs, instance)
    graph = nx.Graph()
    graph.add_nodes_from(range(len(pairs)))
    for i, j in itertools.combinations(range(len(pairs)), 2):
        graph.add_edge(i, j, weight=float(scores[i, j]))
    mate = nx.min_weight_matching(graph)

    groups = [KGroup(tuple(sorted((pairs[i], pairs[j])))) for i, j in mate]
    groups.sort(key=lambda g: g.pairs[0])
    if leftover is not None:
        groups.append(KGroup((leftover,)))
    return KDivision(tuple(groups), 2)
