import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abctrees.enumeration import brute_force_min, free_trees
from abctrees.graph import Tree, abc_index, canonical_code, degree_sequence, free_code, root_at, star_tree
from abctrees.search import greedy_tree
from abctrees.transforms import (
    MOVE_KINDS,
    Move,
    apply_move,
    exchange,
    exchange_delta,
    extremal_canonicalize,
    improving_move,
    legal_similarity,
    local_search,
    p1_violations,
)


def random_tree(n, rng):
    return Tree.from_parents([-1] + [rng.randrange(v) for v in range(1, n)])


def disjoint_pairs(r):
    out = []
    for v in range(r.n):
        for w in range(v + 1, r.n):
            if r.root in (v, w) or r.is_ancestor(v, w) or r.is_ancestor(w, v):
                continue
            out.append((v, w))
    return out


rooted = st.tuples(st.integers(4, 30), st.integers(0, 10**9)).map(
    lambda a: root_at(random_tree(a[0], random.Random(a[1])), 0))


@given(rooted, st.integers(0, 10**6))
@settings(max_examples=80, deadline=None)
def test_exchange_delta_matches_recompute(r, pick):
    pairs = disjoint_pairs(r)
    if not pairs:
        return
    v, w = pairs[pick % len(pairs)]
    s = exchange(r, v, w)
    assert s.n == r.n
    assert sorted(s.tree.degrees.tolist()) == sorted(r.tree.degrees.tolist())
    assert abs(abc_index(s.tree) - abc_index(r.tree) - exchange_delta(r, v, w)) < 1e-12


def test_similarity_preserves_abc():
    rng = random.Random(11)
    done = 0
    while done < 1000:
        r = root_at(random_tree(rng.randrange(6, 40), rng), 0)
        pairs = [p for p in disjoint_pairs(r) if legal_similarity(r, *p)]
        if not pairs:
            continue
        v, w = rng.choice(pairs)
        assert abs(abc_index(exchange(r, v, w).tree) - abc_index(r.tree)) < 1e-12
        done += 1


def test_lemma_a_exchanges_decrease():
    rng = random.Random(12)
    done = 0
    while done < 1000:
        r = root_at(random_tree(rng.randrange(6, 40), rng), 0)
        d = r.tree.degrees
        pairs = [(v, w) for v, w in disjoint_pairs(r)
                 if (d[r.parent[v]] - d[r.parent[w]]) * (d[v] - d[w]) < 0]
        if not pairs:
            continue
        v, w = rng.choice(pairs)
        assert abc_index(exchange(r, v, w).tree) < abc_index(r.tree)
        done += 1


def test_exchange_errors():
    r = root_at(Tree(6, [(0, 1), (1, 2), (0, 3), (3, 4), (3, 5)]), 0)
    with pytest.raises(ValueError):
        exchange(r, 0, 4)
    with pytest.raises(ValueError):
        exchange(r, 1, 2)
    with pytest.raises(ValueError):
        exchange_delta(r, 3, 9)


def test_local_search_star():
    trace = []
    out = local_search(star_tree(10), budget=1000, trace=trace)
    assert abc_index(out) < abc_index(star_tree(10))
    vals = [abc_index(star_tree(10))] + [step["abc"] for step in trace]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert all(step["kind"] in MOVE_KINDS for step in trace)
    assert abs(vals[-1] - abc_index(out)) < 1e-9


def test_local_search_random_order_60():
    rng = random.Random(60)
    for _ in range(100):
        t = random_tree(60, rng)
        trace = []
        out = local_search(t, budget=200, trace=trace)
        assert out.n == 60
        assert len(trace) <= 200
        assert abc_index(out) <= abc_index(t) + 1e-12
        vals = [abc_index(t)] + [s["abc"] for s in trace]
        assert all(b < a for a, b in zip(vals, vals[1:]))


def test_local_search_fixed_point_on_minimum():
    t = brute_force_min(12).witnesses[0]
    assert improving_move(t) is None
    assert free_code(local_search(t)) == free_code(t)


def test_local_search_budget_zero():
    t = star_tree(9)
    assert free_code(local_search(t, budget=0)) == free_code(t)


def test_apply_move_matches_reported_delta():
    rng = random.Random(4)
    for _ in range(30):
        t = random_tree(25, rng)
        found = improving_move(t)
        if found is None:
            continue
        move, delta = found
        assert isinstance(move, Move)
        u = apply_move(t, move)
        assert u.n == t.n
        assert abs(abc_index(u) - abc_index(t) - delta) < 1e-9
        assert delta < 0


@pytest.mark.parametrize("n", [10, 12, 14, 15, 16])
def test_canonicalize_minimum(n):
    for t in brute_force_min(n).witnesses:
        c = extremal_canonicalize(t)
        assert abs(abc_index(c.tree) - abc_index(t)) < 1e-12
        assert p1_violations(c) == []
        again = extremal_canonicalize(c.tree)
        assert canonical_code(again) == canonical_code(c)


@pytest.mark.parametrize("n", [11, 13])
def test_canonicalize_rooting_conflict(n):
    # a 3-3 edge at the root: the ≻-largest rooting keeps a larger subtree one level down
    t = brute_force_min(n).witnesses[0]
    c = extremal_canonicalize(t)
    assert abs(abc_index(c.tree) - abc_index(t)) < 1e-12
    assert p1_violations(c) != []
    assert canonical_code(extremal_canonicalize(c.tree)) == canonical_code(c)


def test_canonicalize_matches_greedy_on_minima():
    for n in range(7, 15):
        for t in brute_force_min(n).witnesses:
            c = extremal_canonicalize(t)
            g = greedy_tree(degree_sequence(t))
            assert abs(abc_index(g.tree) - abc_index(c.tree)) < 1e-12


def test_canonicalize_keeps_abc_everywhere():
    for t in free_trees(9):
        assert abs(abc_index(extremal_canonicalize(t).tree) - abc_index(t)) < 1e-12
