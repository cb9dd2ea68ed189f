import math
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abctrees.branches import B, build_branch
from abctrees.graph import (
    DegreeSequence,
    InvalidTreeError,
    Tree,
    abc_index,
    canonical_code,
    compare_subtrees,
    degree_sequence,
    edge_weight,
    free_code,
    path_tree,
    root_at,
    root_by_max_degree,
    star_tree,
)


def random_tree(n, rng):
    return Tree.from_parents([-1] + [rng.randrange(v) for v in range(1, n)])


trees = st.integers(2, 40).flatmap(
    lambda n: st.lists(st.integers(0, 10**6), min_size=n - 1, max_size=n - 1).map(
        lambda xs: Tree.from_parents([-1] + [x % (v + 1) for v, x in enumerate(xs)])))


def test_edge_weight_values():
    assert edge_weight(2, 1) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert edge_weight(2, 5) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert edge_weight(1, 1) == 0.0
    with pytest.raises(ValueError):
        edge_weight(0, 3)


def test_edge_weight_monotone_grid():
    f = edge_weight
    for a in (0, 1, 2, 5):
        for x in range(2, 201, 7):
            for y in range(2, 201, 7):
                for b in range(0, y - 1, 5):
                    g = f(x + a, y - b) - f(x, y)
                    assert f(x + 1 + a, y - b) - f(x + 1, y) >= g - 1e-12
                    assert f(x + a, y + 1 - b) - f(x, y + 1) <= g + 1e-12


def test_small_indices():
    assert abc_index(path_tree(5)) == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    assert abc_index(path_tree(2)) == 0.0
    assert abc_index(Tree(1, [])) == 0.0
    # star: n - 1 edges of weight sqrt((n-2)/(n-1))
    assert abc_index(star_tree(10)) == pytest.approx(9 * math.sqrt(8 / 9), abs=1e-12)


def test_invalid_trees():
    with pytest.raises(InvalidTreeError):
        Tree(3, [(0, 1)])
    with pytest.raises(InvalidTreeError):
        Tree(4, [(0, 1), (1, 0), (2, 3)])
    with pytest.raises(InvalidTreeError):
        Tree(4, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(InvalidTreeError):
        Tree(2, [(0, 5)])


@given(trees, st.randoms(use_true_random=False))
@settings(max_examples=60, deadline=None)
def test_label_invariance(t, rnd):
    perm = list(range(t.n))
    rnd.shuffle(perm)
    u = t.relabel(perm)
    assert abs(abc_index(u) - abc_index(t)) < 1e-12
    assert free_code(u) == free_code(t)


@given(trees)
@settings(max_examples=60, deadline=None)
def test_abc_matches_networkx_walk(t):
    g = t.to_networkx()
    ref = math.fsum(math.sqrt((g.degree[u] + g.degree[v] - 2) / (g.degree[u] * g.degree[v]))
                    for u, v in g.edges)
    assert abs(abc_index(t) - ref) < 1e-12
    assert abc_index(t) >= 0
    assert (abc_index(t) == 0) == (t.n <= 2)


def test_degree_sequence():
    assert degree_sequence(path_tree(4)).degrees == (2, 2, 1, 1)
    with pytest.raises(ValueError):
        DegreeSequence((3, 1, 1))
    with pytest.raises(ValueError):
        DegreeSequence((1, 2, 1))


def test_root_by_max_degree_prefers_larger_code():
    # double star: centres 0 and 1 of degree 3; 0 carries a longer arm
    t = Tree(8, [(0, 1), (0, 2), (0, 3), (3, 7), (1, 4), (1, 5), (4, 6)])
    r = root_by_max_degree(t)
    other = root_at(t, 1 if r.root == 0 else 0)
    assert canonical_code(r) >= canonical_code(other)


def test_codes_label_invariant_and_distinct():
    a = build_branch(B(3))
    perm = list(range(a.n))
    random.Random(3).shuffle(perm)
    b = root_at(a.tree.relabel(perm), perm[a.root])
    assert canonical_code(a) == canonical_code(b)
    p2 = path_tree(2)
    assert canonical_code(root_at(p2, 0)) == canonical_code(root_at(p2, 1))


def test_free_trees_of_order_5_distinct():
    reps = [Tree.from_parents(p) for p in ([-1, 0, 1, 2, 3], [-1, 0, 0, 0, 1], [-1, 0, 0, 0, 0])]
    codes = {canonical_code(root_by_max_degree(t)) for t in reps}
    assert len(codes) == 3


def test_root_degree_order():
    # larger root degree wins
    a = root_at(star_tree(4), 0)
    b = root_at(path_tree(3), 1)
    assert compare_subtrees(a, b) == 1


@given(trees, trees, trees)
@settings(max_examples=40, deadline=None)
def test_compare_is_total_preorder(t1, t2, t3):
    rs = [root_by_max_degree(t) for t in (t1, t2, t3)]
    c = compare_subtrees
    for a in rs:
        assert c(a, a) == 0
        for b in rs:
            assert c(a, b) == -c(b, a)
            assert (c(a, b) == 0) == nx.is_isomorphic(a.tree.to_networkx(), b.tree.to_networkx())
    a, b, d = rs
    if c(a, b) >= 0 and c(b, d) >= 0:
        assert c(a, d) >= 0


def test_equal_code_iff_rooted_isomorphic():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randrange(2, 9)
        t1, t2 = random_tree(n, rng), random_tree(n, rng)
        r1, r2 = root_at(t1, 0), root_at(t2, 0)
        g1, g2 = t1.to_networkx(), t2.to_networkx()
        nx.set_node_attributes(g1, {0: True}, "root")
        nx.set_node_attributes(g2, {0: True}, "root")
        iso = nx.is_isomorphic(g1, g2, node_match=lambda x, y: x.get("root") == y.get("root"))
        assert (canonical_code(r1) == canonical_code(r2)) == iso
