"""Server-side matchers over the perturbed (or true) reachability graph.

Three matchers are provided:

* ``match_max_cardinality`` -- binary reachability graph from the perturbed
  locations, max-flow, saturated edges returned.
* ``match_randomized_rounding`` -- edge capacities are reachability
  likelihoods, max-flow, then each worker samples one task proportionally to
  the flow on its outgoing edges.
* ``match_optimal`` -- the ground-truth oracle: max-cardinality matching on
  the true reachability graph.
"""
from __future__ import annotations

import numpy as np

from . import flow as flownet
from .geo import GeoIParams, ReachProbEstimator
from .model import Location, Matching, MatchedPair, ProblemInstance

# Likelihood edges below this carry no useful signal and only slow the flow.
_PROB_FLOOR = 1e-3


class StateError(Exception):
    """A required location field (perturbed or true) is missing."""


def _locations(instance: ProblemInstance, use_perturbed: bool):
    if use_perturbed:
        for e in list(instance.workers) + list(instance.tasks):
            if e.perturbed_loc is None:
                raise StateError(f"entity {e.id} has no perturbed location")
        wloc = [(w.perturbed_loc.x, w.perturbed_loc.y) for w in instance.workers]
        tloc = [(t.perturbed_loc.x, t.perturbed_loc.y) for t in instance.tasks]
    else:
        wloc = [(w.true_loc.x, w.true_loc.y) for w in instance.workers]
        tloc = [(t.true_loc.x, t.true_loc.y) for t in instance.tasks]
    return np.asarray(wloc, dtype=float), np.asarray(tloc, dtype=float)


def _distance_matrix(instance: ProblemInstance, use_perturbed: bool) -> np.ndarray:
    wloc, tloc = _locations(instance, use_perturbed)
    if wloc.size == 0 or tloc.size == 0:
        return np.zeros((len(instance.workers), len(instance.tasks)))
    return np.hypot(wloc[:, 0][:, None] - tloc[:, 0][None, :],
                    wloc[:, 1][:, None] - tloc[:, 1][None, :])


def _node_ids(instance: ProblemInstance):
    n_w = len(instance.workers)
    worker_node = {w.id: 2 + i for i, w in enumerate(instance.workers)}
    task_node = {t.id: 2 + n_w + j for j, t in enumerate(instance.tasks)}
    return worker_node, task_node


def build_reachability_graph(instance: ProblemInstance,
                             use_perturbed: bool = True) -> flownet.FlowNetwork:
    """Unit-capacity flow network with a worker-task edge wherever the
    selected locations put the task within the worker's reach (inclusive)."""
    dist = _distance_matrix(instance, use_perturbed)
    worker_node, task_node = _node_ids(instance)
    net = flownet.FlowNetwork()
    for w in instance.workers:
        net.add_edge(flownet.SOURCE, worker_node[w.id], 1.0)
    for t in instance.tasks:
        net.add_edge(task_node[t.id], flownet.SINK, 1.0)
    if dist.size:
        reach = np.asarray([w.reach for w in instance.workers])
        for i, j in np.argwhere(dist <= reach[:, None]):
            net.add_edge(worker_node[instance.workers[i].id],
                         task_node[instance.tasks[j].id], 1.0)
    return net


def _saturated_matching(net: flownet.FlowNetwork,
                        instance: ProblemInstance) -> Matching:
    worker_node, task_node = _node_ids(instance)
    node_to_worker = {v: k for k, v in worker_node.items()}
    node_to_task = {v: k for k, v in task_node.items()}
    m = Matching()
    for (u, v) in net.edges():
        if u in node_to_worker and v in node_to_task and net.flow(u, v) > 0.5:
            m.add(MatchedPair(node_to_worker[u], node_to_task[v]))
    return m


def match_max_cardinality(instance: ProblemInstance) -> Matching:
    """Max-cardinality matching on the perturbed reachability graph."""
    net = build_reachability_graph(instance, use_perturbed=True)
    flownet.max_flow(net)
    return _saturated_matching(net, instance)


def match_optimal(instance: ProblemInstance) -> Matching:
    """Ground-truth oracle: max-cardinality matching on true locations."""
    net = build_reachability_graph(instance, use_perturbed=False)
    flownet.max_flow(net)
    return _saturated_matching(net, instance)


def selection_probabilities(flows: list[float]) -> list[float]:
    """Per-task selection probabilities for one worker's outgoing flows."""
    total = sum(flows)
    if total <= 0:
        return [0.0 for _ in flows]
    return [f / total for f in flows]


def match_randomized_rounding(instance: ProblemInstance,
                              estimator: ReachProbEstimator,
                              rng: np.random.Generator) -> Matching:
    """Likelihood-weighted max-flow followed by randomized rounding.

    Each worker samples one incident task with probability proportional to
    the flow on its edges. Workers are processed in ascending id order; a
    task claimed by an earlier worker is removed from later candidate sets
    (with renormalization), and a worker left without candidates stays
    unmatched.
    """
    dist = _distance_matrix(instance, use_perturbed=True)
    params = GeoIParams(instance.epsilon_per_meter)
    worker_node, task_node = _node_ids(instance)

    net = flownet.FlowNetwork()
    for w in instance.workers:
        net.add_edge(flownet.SOURCE, worker_node[w.id], 1.0)
    for t in instance.tasks:
        net.add_edge(task_node[t.id], flownet.SINK, 1.0)
    for i, w in enumerate(instance.workers):
        for j, t in enumerate(instance.tasks):
            prob = estimator.reach_probability(dist[i, j], w.reach, params)
            if prob >= _PROB_FLOOR:
                net.add_edge(worker_node[w.id], task_node[t.id], prob)
    flownet.max_flow(net)
    return round_flows(net, instance, rng)


def round_flows(net: flownet.FlowNetwork, instance: ProblemInstance,
                rng: np.random.Generator) -> Matching:
    """Sample one task per worker proportionally to its outgoing flow.

    Workers go in ascending id order; tasks claimed earlier are dropped from
    later candidate sets with renormalization.
    """
    worker_node, task_node = _node_ids(instance)
    claimed: set[int] = set()
    m = Matching()
    for w in sorted(instance.workers, key=lambda w: w.id):
        candidates = []
        weights = []
        for t in instance.tasks:
            f = net.flow(worker_node[w.id], task_node[t.id])
            if f > 0 and t.id not in claimed:
                candidates.append(t.id)
                weights.append(f)
        total = sum(weights)
        if not candidates or total <= 0:
            continue
        probs = [x / total for x in weights]
        chosen = candidates[rng.choice(len(candidates), p=probs)]
        claimed.add(chosen)
        m.add(MatchedPair(w.id, chosen))
    return m
