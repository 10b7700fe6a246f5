"""Simulated multi-party secure exchange within one group of matched pairs.

Two group members are elected as proxies. Every member sends its encrypted
true coordinates to proxy A; the proxies compute all pairwise squared
distances with the two-party protocol, and proxy B (the key holder) decrypts
them privately, re-matches the group's workers to its tasks exactly, and
reports only the new assignment. No plaintext coordinate ever crosses a
party boundary, which ``audit_transcript`` verifies after the fact.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import flow as flownet
from . import paillier
from .grouping import KGroup
from .model import Location, MatchedPair, ProblemInstance, StructuralError
from .paillier import Ciphertext, serialize_int
from .secure import ProtocolError, ProxyA, ProxyB, secure_distance

DEFAULT_KEY_BITS = 512


@dataclass(frozen=True)
class Party:
    role: str  # "worker" | "task" | "proxy_a" | "proxy_b"
    entity_id: int
    private_true_loc: Location


@dataclass
class Transcript:
    records: list[tuple[str, str, str, bytes]] = field(default_factory=list)

    def record(self, sender: str, receiver: str, kind: str, payload: bytes) -> None:
        self.records.append((sender, receiver, kind, payload))

    def export_lines(self, round_index: int = 0, group_index: int = 0) -> list[str]:
        return [
            f"{round_index},{group_index},{s},{r},{kind},{payload.hex()}"
            for s, r, kind, payload in self.records
        ]


@dataclass(frozen=True)
class GroupResult:
    new_pairs: tuple[MatchedPair, ...]
    group_utility_before: int
    group_utility_after: int
    swapped: bool
    transcript: Transcript


def elect_proxies(g: KGroup, rng: np.random.Generator) -> tuple[tuple[str, int], tuple[str, int]]:
    """Pick two distinct members (workers or tasks) uniformly at random."""
    if len(g.pairs) < 2:
        raise ProtocolError("group too small to elect proxies")
    members = [("worker", p.worker_id) for p in g.pairs]
    members += [("task", p.task_id) for p in g.pairs]
    i, j = rng.choice(len(members), size=2, replace=False)
    return members[int(i)], members[int(j)]


def _best_assignment(reachable: np.ndarray) -> tuple[list[int], int]:
    """Max number of reachable worker-task pairs inside the group.

    Returns a full permutation (task index per worker) and the count of
    reachable pairs it realizes. Exhaustive for small groups, max-flow above.
    """
    k = reachable.shape[0]
    if k <= 5:
        best_perm, best_count = None, -1
        for perm in itertools.permutations(range(k)):
            count = sum(1 for i, j in enumerate(perm) if reachable[i, j])
            if count > best_count:
                best_perm, best_count = list(perm), count
        return best_perm, best_count

    net = flownet.FlowNetwork()
    w_node = {i: 2 + i for i in range(k)}
    t_node = {j: 2 + k + j for j in range(k)}
    for i in range(k):
        net.add_edge(flownet.SOURCE, w_node[i], 1.0)
        net.add_edge(t_node[i], flownet.SINK, 1.0)
    for i in range(k):
        for j in range(k):
            if reachable[i, j]:
                net.add_edge(w_node[i], t_node[j], 1.0)
    flownet.max_flow(net)
    perm: list[int | None] = [None] * k
    for i in range(k):
        for j in range(k):
            if reachable[i, j] and net.flow(w_node[i], t_node[j]) > 0.5:
                perm[i] = j
                break
    count = sum(1 for p in perm if p is not None)
    free_tasks = iter(sorted(set(range(k)) - {p for p in perm if p is not None}))
    perm = [p if p is not None else next(free_tasks) for p in perm]
    return perm, count


def run_group_exchange(g: KGroup, instance: ProblemInstance,
                       rng: np.random.Generator,
                       key_bits: int = DEFAULT_KEY_BITS) -> GroupResult:
    """Execute the secure in-group re-matching end to end (in process).

    The incoming assignment is replaced only when the group's exact true
    matching is strictly better; leftover workers are re-paired with
    leftover tasks so the group always returns a full permutation.
    """
    transcript = Transcript()
    if len(g.pairs) < 2:
        return GroupResult(tuple(g.pairs), 0, 0, False, transcript)

    workers = [instance.worker(p.worker_id) for p in g.pairs]
    tasks = [instance.task(p.task_id) for p in g.pairs]
    k = len(g.pairs)

    proxy_a_id, proxy_b_id = elect_proxies(g, rng)

    keys = paillier.keygen(key_bits, rng)
    pk = keys.public
    b_name = f"{proxy_b_id[0]}{proxy_b_id[1]}"
    a_name = f"{proxy_a_id[0]}{proxy_a_id[1]}"
    transcript.record(b_name, "*", "pubkey", serialize_int(pk.n))

    party_a = ProxyA(pk, rng)
    party_b = ProxyB(keys, rng)

    def send_encrypted(sender: str, loc: Location) -> tuple[Ciphertext, Ciphertext]:
        ex = paillier.encrypt(round(loc.x), pk, rng)
        ey = paillier.encrypt(round(loc.y), pk, rng)
        transcript.record(sender, a_name, "ciphertext", ex.serialize())
        transcript.record(sender, a_name, "ciphertext", ey.serialize())
        return ex, ey

    enc_workers = [send_encrypted(f"worker{w.id}", w.true_loc) for w in workers]
    enc_tasks = [send_encrypted(f"task{t.id}", t.true_loc) for t in tasks]

    # Pairwise squared distances; plaintexts exist only inside proxy B.
    sq_dist = np.zeros((k, k), dtype=object)
    for i in range(k):
        for j in range(k):
            enc = secure_distance(party_a, party_b, enc_workers[i], enc_tasks[j],
                                  transcript)
            transcript.record(a_name, b_name, "ciphertext", enc.serialize())
            sq_dist[i, j] = paillier.decrypt(enc, keys)

    reachable = np.array([[sq_dist[i, j] <= round(workers[i].reach) ** 2
                           for j in range(k)] for i in range(k)])

    before = sum(1 for i in range(k) if reachable[i, i])
    perm, after = _best_assignment(reachable)
    swapped = after > before
    if swapped:
        new_pairs = tuple(MatchedPair(workers[i].id, tasks[perm[i]].id)
                          for i in range(k))
        result_after = after
    else:
        new_pairs = tuple(g.pairs)
        result_after = before

    payload = ";".join(f"{p.worker_id}:{p.task_id}" for p in new_pairs).encode()
    transcript.record(b_name, "server", "result", payload)
    return GroupResult(new_pairs, before, result_after, swapped, transcript)


def _plaintext_patterns(instance: ProblemInstance) -> list[bytes]:
    patterns = []
    for e in list(instance.workers) + list(instance.tasks):
        for coord in (round(e.true_loc.x), round(e.true_loc.y)):
            if coord >= 0:
                patterns.append(serialize_int(coord))
    return patterns


def audit_transcript(t: Transcript, instance: ProblemInstance) -> bool:
    """True iff no protocol payload carries a plaintext true coordinate.

    Checks two things: every location-bearing message parses as a
    well-formed serialized value of ciphertext size, and no payload contains
    the length-prefixed plaintext encoding of any party's true coordinate.
    """
    patterns = _plaintext_patterns(instance)
    pubkey_n = None
    for sender, receiver, kind, payload in t.records:
        if kind == "pubkey":
            length = int.from_bytes(payload[:4], "big")
            pubkey_n = int.from_bytes(payload[4:4 + length], "big")
            continue
        if kind == "result":
            continue
        if kind != "ciphertext":
            return False
        if len(payload) < 4:
            return False
        length = int.from_bytes(payload[:4], "big")
        if len(payload) != 4 + length:
            return False
        value = int.from_bytes(payload[4:], "big")
        if pubkey_n is not None and not (0 < value < pubkey_n ** 2):
            return False
        # A genuine Paillier ciphertext is indistinguishable from random in
        # [0, N^2); a tiny value is a near-certain plaintext leak.
        if pubkey_n is not None and value.bit_length() < pubkey_n.bit_length() // 2:
            return False
        for pattern in patterns:
            if pattern in payload:
                return False
    return True
