import math

import pytest

from conftest import make_instance
from privmatch.model import (Location, MatchedPair, Matching, ProblemInstance,
                             StructuralError, Task, Worker, euclidean_distance,
                             is_reachable_true, utility)


def test_distance_identity():
    assert euclidean_distance(Location(0, 0), Location(0, 0)) == 0.0


def test_distance_345():
    assert euclidean_distance(Location(0, 0), Location(3, 4)) == 5.0


def test_distance_translated_345():
    assert euclidean_distance(Location(1, 2), Location(4, 6)) == 5.0


def test_distance_symmetric():
    a, b = Location(2.5, -1.0), Location(-7.0, 9.5)
    assert euclidean_distance(a, b) == euclidean_distance(b, a)


def test_location_rejects_nan_and_inf():
    with pytest.raises(ValueError):
        Location(float("nan"), 0)
    with pytest.raises(ValueError):
        Location(0, float("inf"))


def test_reachable_boundary_inclusive():
    w = Worker(0, Location(0, 0), 5.0)
    assert is_reachable_true(w, Task(0, Location(5, 0)))
    assert not is_reachable_true(w, Task(1, Location(5.001, 0)))


def test_reachable_colocated():
    w = Worker(0, Location(10, 10), 1000.0)
    assert is_reachable_true(w, Task(0, Location(10, 10)))


def test_worker_rejects_nonpositive_reach():
    with pytest.raises(ValueError):
        Worker(0, Location(0, 0), 0.0)
    with pytest.raises(ValueError):
        Worker(0, Location(0, 0), -3.0)


def test_utility_empty_matching():
    inst = make_instance([(0, 0, 10)], [(1, 1)])
    assert utility(Matching(), inst) == 0


def test_utility_counts_only_truly_reachable():
    # Three assigned pairs; the third task sits outside its worker's range,
    # so only two pairs count.
    inst = make_instance(
        [(0, 0, 10), (100, 0, 10), (200, 0, 10)],
        [(105, 0), (5, 0), (200, 50)])
    m = Matching([MatchedPair(0, 1), MatchedPair(1, 0), MatchedPair(2, 2)])
    assert utility(m, inst) == 2


def test_utility_all_reachable():
    inst = make_instance([(i * 10, 0, 5) for i in range(5)],
                         [(i * 10 + 1, 0) for i in range(5)])
    m = Matching([MatchedPair(i, i) for i in range(5)])
    assert utility(m, inst) == 5


def test_utility_bounded_by_matching_size(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        inst = make_instance(
            [tuple(rng.uniform(0, 100, 2)) + (50.0,) for _ in range(n)],
            [tuple(rng.uniform(0, 100, 2)) for _ in range(n)])
        m = Matching([MatchedPair(i, i) for i in range(n)])
        assert utility(m, inst) <= len(m)


def test_utility_invariant_under_reordering():
    inst = make_instance([(0, 0, 10), (50, 0, 10)], [(5, 0), (55, 0)])
    m1 = Matching([MatchedPair(0, 0), MatchedPair(1, 1)])
    m2 = Matching([MatchedPair(1, 1), MatchedPair(0, 0)])
    assert utility(m1, inst) == utility(m2, inst)
    assert m1 == m2


def test_matching_rejects_duplicate_worker():
    with pytest.raises(StructuralError):
        Matching([MatchedPair(0, 0), MatchedPair(0, 1)])


def test_matching_rejects_duplicate_task():
    with pytest.raises(StructuralError):
        Matching([MatchedPair(0, 0), MatchedPair(1, 0)])


def test_matching_membership_and_lookup():
    m = Matching([MatchedPair(3, 7)])
    assert MatchedPair(3, 7) in m
    assert MatchedPair(3, 8) not in m
    assert m.task_of(3) == 7
    assert m.task_of(4) is None


def test_matching_replace_swaps_pairs():
    m = Matching([MatchedPair(0, 0), MatchedPair(1, 1), MatchedPair(2, 2)])
    out = m.replace([0, 1], [MatchedPair(0, 1), MatchedPair(1, 0)])
    assert out == Matching([MatchedPair(0, 1), MatchedPair(1, 0), MatchedPair(2, 2)])
    # original untouched
    assert m.task_of(0) == 0


def test_utility_dangling_id_raises():
    inst = make_instance([(0, 0, 10)], [(1, 1)])
    with pytest.raises(StructuralError):
        utility(Matching([MatchedPair(9, 0)]), inst)


def test_instance_rejects_duplicate_ids():
    loc = Location(0, 0)
    with pytest.raises(ValueError):
        ProblemInstance((Worker(0, loc, 1), Worker(0, loc, 1)), (), 0.1)
    with pytest.raises(ValueError):
        ProblemInstance((), (Task(1, loc), Task(1, loc)), 0.1)


def test_instance_rejects_nonpositive_epsilon():
    with pytest.raises(ValueError):
        ProblemInstance((), (), 0.0)


def test_instance_entity_lookup():
    inst = make_instance([(0, 0, 10)], [(1, 1)])
    assert inst.worker(0).id == 0
    assert inst.task(0).id == 0
    with pytest.raises(StructuralError):
        inst.worker(5)
    with pytest.raises(StructuralError):
        inst.task(5)
