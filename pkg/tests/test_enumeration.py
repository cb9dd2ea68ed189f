import math

import networkx as nx
import pytest

from abctrees._backend import compiled_kernels, py_kernels
from abctrees.enumeration import (
    CapacityError,
    brute_force_min,
    free_trees,
    min_by_degree_sequence,
    prufer_classes,
)
from abctrees.graph import DegreeSequence, abc_index, degree_sequence, free_code, path_tree
from abctrees.structure import larger_neighbour_violations, validate_structure

# OEIS A000055
FREE_COUNTS = {1: 1, 2: 1, 3: 1, 4: 2, 5: 3, 6: 6, 7: 11, 8: 23, 9: 47, 10: 106, 11: 235,
               12: 551, 13: 1301, 14: 3159, 15: 7741, 16: 19320}

needs_compiled = pytest.mark.skipif(compiled_kernels() is None, reason="compiled kernels not built")


def test_counts_match_prufer_oracle():
    for n in range(3, 9):
        codes = [free_code(t) for t in free_trees(n)]
        assert len(codes) == len(set(codes))
        assert set(codes) == prufer_classes(n)


@pytest.mark.parametrize("n", range(1, 17))
def test_counts(n):
    assert free_trees(n).count() == FREE_COUNTS[n]


def test_counts_match_networkx():
    for n in range(3, 12):
        ours = {free_code(t) for t in free_trees(n)}
        ref = {free_code(_from_nx(g)) for g in nx.nonisomorphic_trees(n)}
        assert ours == ref


def _from_nx(g):
    from abctrees.graph import Tree

    return Tree(g.number_of_nodes(), list(g.edges))


def test_stream_deterministic():
    a = [free_code(t) for t in free_trees(10)]
    b = [free_code(t) for t in free_trees(10)]
    assert a == b


@needs_compiled
def test_backends_agree_on_stream():
    ck = compiled_kernels()
    for n in range(3, 13):
        assert [list(s) for s in ck.level_sequences(n)] == [list(s) for s in py_kernels.level_sequences(n)]


def test_capacity():
    with pytest.raises(CapacityError):
        free_trees(23)
    with pytest.raises(CapacityError):
        brute_force_min(30)
    with pytest.raises(CapacityError):
        prufer_classes(10)


def test_brute_small_values():
    assert brute_force_min(5).best_value == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    r = brute_force_min(12)
    assert r.best_value == pytest.approx(7.716565036233378, abs=1e-12)
    assert len(r.witnesses) == 1


def test_brute_matches_networkx_scan():
    for n in range(4, 11):
        ref = min(abc_index(_from_nx(g)) for g in nx.nonisomorphic_trees(n))
        assert abs(brute_force_min(n).best_value - ref) < 1e-12


def test_brute_python_backend_agrees():
    for n in (7, 9, 11):
        a = brute_force_min(n)
        b = brute_force_min(n, backend="python")
        assert abs(a.best_value - b.best_value) < 1e-12
        assert [free_code(t) for t in a.witnesses] == [free_code(t) for t in b.witnesses]


def test_brute_partition_invariant():
    a = brute_force_min(13, workers=1)
    b = brute_force_min(13, workers=3)
    assert a.best_value == b.best_value
    assert [free_code(t) for t in a.witnesses] == [free_code(t) for t in b.witnesses]


def test_witnesses_sorted_descending():
    r = brute_force_min(9)
    codes = [free_code(t) for t in r.witnesses]
    assert codes == sorted(codes, reverse=True)


@pytest.mark.parametrize("n", range(3, 17))
def test_witness_structure(n):
    for t in brute_force_min(n).witnesses:
        chk = validate_structure(t)
        assert chk["leaf_next_to_degree_2"].passed
        if n >= 10:
            assert chk["at_most_one_2_2_edge"].passed
        if n > 9 and n != 13:
            assert chk["equal_degree_edges"].passed
        assert larger_neighbour_violations(t) == []


def test_n13_has_two_max_degree_edges():
    # unique minimum at n=13: root of degree 3 with two degree-3 sons
    r = brute_force_min(13)
    assert len(r.witnesses) == 1
    t = r.witnesses[0]
    same = [(u, v) for u, v in t.edges if t.degrees[u] == t.degrees[v]]
    assert len(same) == 2 and all(t.degrees[u] == 3 for u, _ in same)
    assert not validate_structure(t)["equal_degree_edges"].passed
    assert r.best_value == pytest.approx(2 * 2 / 3 + 10 * math.sqrt(2) / 2, abs=1e-12)


def test_degree_classes():
    classes = min_by_degree_sequence(7)
    assert len(classes) == 7
    val, t = classes[DegreeSequence((3, 3, 2, 1, 1, 1, 1))]
    realizations = [abc_index(x) for x in free_trees(7)
                    if degree_sequence(x) == DegreeSequence((3, 3, 2, 1, 1, 1, 1))]
    assert val == pytest.approx(min(realizations), abs=1e-12)
    spider = min_by_degree_sequence(5)[DegreeSequence((3, 2, 1, 1, 1))][0]
    assert spider == pytest.approx(2 * math.sqrt(2 / 3) + math.sqrt(2), abs=1e-12)


def test_degree_classes_cover_brute():
    for n in range(4, 12):
        classes = min_by_degree_sequence(n)
        assert abs(min(v for v, _ in classes.values()) - brute_force_min(n).best_value) < 1e-12


def test_path_is_min_at_5():
    assert free_code(brute_force_min(5).witnesses[0]) == free_code(path_tree(5))
