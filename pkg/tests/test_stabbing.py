import time

import numpy as np
import pytest

from arcs import Interval, IntervalUnion, stab_count_at, stab_max


def make_union(owner, *pairs):
    return IntervalUnion(owner, tuple(Interval(a, b) for a, b in pairs))


def random_instance(rng, max_owners=100):
    items = []
    for owner in range(rng.integers(1, max_owners + 1)):
        comps = []
        cursor = rng.uniform(-5, 5)
        for _ in range(rng.integers(1, 4)):
            lo = cursor + rng.uniform(0, 1.5)
            hi = lo + rng.uniform(0, 2)
            comps.append(Interval(lo, hi))
            cursor = hi + rng.uniform(0.01, 1)
        items.append(IntervalUnion(owner, tuple(comps)))
    return items


def brute_force_best(items):
    endpoints = [c.lo for u in items for c in u.components]
    endpoints += [c.hi for u in items for c in u.components]
    return max(stab_count_at(items, x) for x in endpoints)


def test_basic_example():
    items = [make_union(1, (0, 1)), make_union(2, (0.5, 2)), make_union(3, (3, 4))]
    omega, stabbed = stab_max(items)
    assert omega == 0.5
    assert stabbed.tolist() == [1, 2]
    assert stab_count_at(items, 0.75) == 2
    assert stab_count_at(items, 10.0) == 0


def test_single_item_leftmost():
    omega, stabbed = stab_max([make_union(7, (2.5, 4.0))])
    assert omega == 2.5
    assert stabbed.tolist() == [7]


def test_touching_closed_endpoints_both_count():
    items = [make_union(1, (0, 1)), make_union(2, (1, 2))]
    omega, stabbed = stab_max(items)
    assert omega == 1.0
    assert stabbed.tolist() == [1, 2]


def test_empty_input():
    omega, stabbed = stab_max([])
    assert omega == 0.0
    assert stabbed.size == 0


def test_empty_union_rejected():
    with pytest.raises(ValueError):
        stab_max([IntervalUnion(0, ())])


def test_degenerate_point_interval():
    items = [make_union(0, (1.0, 1.0)), make_union(1, (0.5, 1.5))]
    omega, stabbed = stab_max(items)
    assert omega == 1.0
    assert stabbed.tolist() == [0, 1]


def test_owner_counted_once():
    # two components of one owner around the stab point; dedup keeps count 1
    items = [make_union(0, (0, 1), (1, 2)), make_union(1, (0.9, 1.1))]
    omega, stabbed = stab_max(items)
    assert stabbed.tolist() == [0, 1]
    assert stab_count_at(items, 1.0) == 2


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)
    with pytest.raises(ValueError):
        Interval(0.0, float("inf"))


def test_union_normalization_merges_and_sorts():
    u = make_union(0, (3, 4), (0, 1), (0.5, 2), (2, 2.5))
    assert [(c.lo, c.hi) for c in u.components] == [(0.0, 2.5), (3.0, 4.0)]


def test_matches_brute_force_on_random_instances():
    rng = np.random.default_rng(42)
    for _ in range(300):
        items = random_instance(rng)
        omega, stabbed = stab_max(items)
        assert stab_count_at(items, omega) == stabbed.size
        assert stabbed.size == brute_force_best(items)


def test_count_at_matches_stab_max_cardinality():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        items = random_instance(rng, max_owners=20)
        omega, stabbed = stab_max(items)
        assert stab_count_at(items, omega) == stabbed.size


def test_leftmost_optimum():
    rng = np.random.default_rng(17)
    for _ in range(200):
        items = random_instance(rng, max_owners=30)
        omega, stabbed = stab_max(items)
        # any strictly smaller endpoint coordinate must stab fewer owners
        for u in items:
            for c in u.components:
                for x in (c.lo, c.hi):
                    if x < omega:
                        assert stab_count_at(items, x) < stabbed.size


def test_monotone_in_interval_growth():
    rng = np.random.default_rng(23)
    for _ in range(100):
        items = random_instance(rng, max_owners=25)
        _, before = stab_max(items)
        k = int(rng.integers(0, len(items)))
        grown = list(items)
        comps = list(grown[k].components)
        c = comps[int(rng.integers(0, len(comps)))]
        comps.append(Interval(c.lo - rng.uniform(0, 1), c.hi + rng.uniform(0, 1)))
        grown[k] = IntervalUnion(grown[k].owner, tuple(comps))
        _, after = stab_max(grown)
        assert after.size >= before.size


def test_large_instance_near_sort_speed():
    rng = np.random.default_rng(0)
    n = 1_000_000
    lo = rng.uniform(0, 1000, n)
    hi = lo + rng.uniform(0, 1.0, n)
    from arcs.stabbing import _stab_flat

    endpoints = np.concatenate([lo, hi])
    t0 = time.perf_counter()
    np.sort(endpoints)
    sort_time = time.perf_counter() - t0

    owners = np.arange(n, dtype=np.int64)
    t0 = time.perf_counter()
    omega, count, stabbed = _stab_flat(owners, lo, hi)
    stab_time = time.perf_counter() - t0
    assert count == stabbed.size
    assert stab_time < 4.0 * sort_time + 0.5
