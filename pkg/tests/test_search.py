import math

import pytest

from abctrees._backend import compiled_kernels
from abctrees.branches import B, B3StarStar, C, FamilyConfig, assemble, closed_form_abc
from abctrees.enumeration import brute_force_min, min_by_degree_sequence
from abctrees.graph import DegreeSequence, abc_index, degree_sequence, free_code
from abctrees.search import (
    C0,
    FREE_WINDOW,
    family_search,
    first_positive_r,
    gamma_bounds,
    greedy_tree,
    transition_scan,
)

needs_compiled = pytest.mark.skipif(compiled_kernels() is None, reason="compiled kernels not built")


def test_greedy_realizes_sequence():
    seq = DegreeSequence((4, 3, 3, 2, 2, 1, 1, 1, 1, 1, 1))
    t = greedy_tree(seq)
    assert degree_sequence(t.tree) == seq
    assert t.n == 11


def test_greedy_star_and_path():
    assert abc_index(greedy_tree(DegreeSequence((4, 1, 1, 1, 1))).tree) == pytest.approx(4 * math.sqrt(3 / 4))
    assert abc_index(greedy_tree(DegreeSequence((2, 2, 2, 1, 1))).tree) == pytest.approx(2 * math.sqrt(2))


@pytest.mark.parametrize("n", range(5, 11))
def test_greedy_is_optimal_per_sequence(n):
    for seq, (val, _) in min_by_degree_sequence(n).items():
        assert abc_index(greedy_tree(seq).tree) <= val + 1e-12


def test_greedy_on_family_tree():
    t = assemble(FamilyConfig.of((B(3), 43), B3StarStar()))
    g = greedy_tree(degree_sequence(t))
    assert abs(abc_index(g.tree) - abc_index(t)) < 1e-10


@pytest.mark.parametrize("n", range(10, 19))
def test_unconstrained_family_dominates_brute(n):
    # every family tree is a tree, so the family optimum cannot beat the true minimum
    r = family_search(n, constraints=False)
    assert r.best_value >= brute_force_min(n).best_value - 1e-12 if n <= 16 else r.best_value > 0
    assert abs(abc_index(assemble(r.best_config)) - r.best_value) < 1e-10


def test_family_hits_brute_where_known():
    for n in (12, 14, 16):
        r = family_search(n, constraints=False)
        assert r.best_value == pytest.approx(brute_force_min(n).best_value, abs=1e-12)


def test_n312_landmark():
    r = family_search(312)
    cfg = r.best_config
    assert cfg.count(B3StarStar()) == 1 and cfg.count(B(3)) == 43
    assert abs(abc_index(assemble(cfg)) - r.best_value) < 1e-10
    assert r.best_value == pytest.approx(211.23034477839352, abs=1e-9)


def test_transition_pair_518_525():
    assert family_search(518).r == 0
    assert family_search(525).r == 1


def test_ties_are_distinct_and_sorted():
    r = family_search(525)
    codes = [free_code(assemble(c)) for c in r.ties]
    assert len(codes) == len(set(codes))
    assert codes == sorted(codes, reverse=True)


@pytest.mark.parametrize("n", [330, 414, 416, 600, 777, 1001])
def test_free_window_covers_full_range(n, monkeypatch):
    narrow = family_search(n).best_value
    import abctrees.search as s

    monkeypatch.setattr(s, "FREE_WINDOW", (-150, 150))
    wide = family_search(n).best_value
    assert narrow == pytest.approx(wide, abs=1e-10)
    assert FREE_WINDOW == (-3, 2)


@needs_compiled
@pytest.mark.parametrize("n", [40, 312, 700, 2000])
def test_kernels_agree(n):
    a = family_search(n, backend="compiled")
    b = family_search(n, backend="python")
    assert a.best_value == pytest.approx(b.best_value, abs=1e-10)
    assert free_code(assemble(a.best_config)) == free_code(assemble(b.best_config))


def test_worker_invariance():
    a = family_search(939, workers=1)
    b = family_search(939, workers=3)
    assert a.best_value == b.best_value and a.best_config == b.best_config


def test_gamma_constant_and_bounds():
    assert C0 == pytest.approx((1 + 26 * math.sqrt(55) + 156 * math.sqrt(106)) / (365 * math.sqrt(53)),
                               abs=1e-15)
    g = gamma_bounds(36501)
    assert g.lower < closed_form_abc(FamilyConfig.of((C(52), 100))) < g.upper
    assert gamma_bounds(100).lower == -math.inf
    r = 100
    width = 2 * 365 * C0 + 51 ** 2 / 8 * math.sqrt(1 / 53) * (1 / r - 1 / (r + 1))
    assert g.upper - g.lower == pytest.approx(width, abs=1e-8)


def test_gamma_contains_family_values():
    for n in (366, 731, 1096, 5000):
        g = gamma_bounds(n)
        v = family_search(n).best_value
        assert v <= g.upper + 1e-9


def test_transition_scan_rows():
    rows = transition_scan(518, 526)
    assert [row[0] for row in rows] == list(range(518, 527))
    assert rows[0][1] == 0 and rows[-2][1] == 1


def test_first_positive_r_residue_zero():
    n, res = first_positive_r(0, 500, 540)
    assert n == 525 and res.r == 1
    assert first_positive_r(0, 500, 510) == (None, None)
