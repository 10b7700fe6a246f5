"""Flow networks with a fattest-path-first Ford-Fulkerson max-flow.

Node ids are integers: SOURCE and SINK are dedicated ids, workers and tasks
get contiguous ids from the builder. Capacities may be fractional, which the
randomized-rounding matcher relies on.
"""
from __future__ import annotations

import heapq

SOURCE = 0
SINK = 1

# Augmenting paths with a bottleneck below this are treated as exhausted.
_EPS = 1e-12


class FlowNetwork:
    def __init__(self):
        self.capacity: dict[tuple[int, int], float] = {}
        self.residual: dict[int, dict[int, float]] = {SOURCE: {}, SINK: {}}

    def add_node(self, node: int) -> None:
        self.residual.setdefault(node, {})

    def add_edge(self, u: int, v: int, capacity: float) -> None:
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        self.add_node(u)
        self.add_node(v)
        self.capacity[(u, v)] = capacity
        self.residual[u][v] = capacity
        self.residual[v].setdefault(u, 0.0)

    def flow(self, u: int, v: int) -> float:
        cap = self.capacity.get((u, v))
        if cap is None:
            return 0.0
        return cap - self.residual[u][v]

    def flow_value(self) -> float:
        return sum(self.flow(SOURCE, v) for v in self.residual[SOURCE])

    def edges(self):
        return self.capacity.keys()


def _fattest_path(net: FlowNetwork) -> list[int] | None:
    """Widest augmenting source-to-sink path in the residual graph.

    Dijkstra-style search maximizing the bottleneck; ties between equal
    bottlenecks fall back on node-id order for determinism.
    """
    best: dict[int, float] = {SOURCE: float("inf")}
    parent: dict[int, int] = {}
    heap = [(-float("inf"), SOURCE)]
    while heap:
        neg_width, u = heapq.heappop(heap)
        width = -neg_width
        if width < best.get(u, 0.0):
            continue
        if u == SINK:
            break
        for v, r in net.residual[u].items():
            if r <= _EPS:
                continue
            w = min(width, r)
            if w > best.get(v, 0.0):
                best[v] = w
                parent[v] = u
                heapq.heappush(heap, (-w, v))
    if SINK not in parent:
        return None
    path = [SINK]
    while path[-1] != SOURCE:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def max_flow(net: FlowNetwork) -> float:
    """Run fattest-path Ford-Fulkerson in place; returns the flow value."""
    while True:
        path = _fattest_path(net)
        if path is None:
            return net.flow_value()
        bottleneck = min(net.residual[u][v] for u, v in zip(path, path[1:]))
        if bottleneck <= _EPS:
            return net.flow_value()
        for u, v in zip(path, path[1:]):
            net.residual[u][v] -= bottleneck
            net.residual[v][u] += bottleneck


def check_flow(net: FlowNetwork, tol: float = 1e-9) -> None:
    """Assert capacity bounds and flow conservation; raises AssertionError."""
    for (u, v), cap in net.capacity.items():
        f = net.flow(u, v)
        assert -tol <= f <= cap + tol, f"flow {f} out of [0, {cap}] on ({u}, {v})"
    for node in net.residual:
        if node in (SOURCE, SINK):
            continue
        net_in = sum(net.flow(u, node) for u in net.residual[node])
        net_out = sum(net.flow(node, v) for v in net.residual[node])
        assert abs(net_in - net_out) <= tol, f"conservation violated at {node}"
