import math

import pytest

from abctrees._backend import compiled_kernels
from abctrees.branches import B, B1Minus, C, FamilyConfig, assemble, closed_form_abc
from abctrees.graph import Tree, abc_index
from abctrees.lemmas import (
    REGISTRY,
    SEVEN_K8_THRESHOLDS,
    DomainError,
    SweepSpec,
    UnknownLemmaError,
    aux_deltas,
    delta_7k8,
    delta_ck_split,
    delta_compactify,
    delta_dis2,
    delta_kk,
    delta_uexc,
    expr_deg2root_bk_b1,
    expr_s_zero_root_b3,
    lemma_ids,
    sweep,
)

needs_compiled = pytest.mark.skipif(compiled_kernels() is None, reason="compiled kernels not built")


class Builder:
    """Rooted trees from nested child lists; a leaf is []."""

    def __init__(self):
        self.edges = []
        self.n = 0

    def add(self, node, parent=None):
        v = self.n
        self.n += 1
        if parent is not None:
            self.edges.append((parent, v))
        for c in node:
            self.add(c, v)
        return v

    def tree(self):
        return Tree(self.n, self.edges)


def build(node):
    b = Builder()
    b.add(node)
    return b.tree()


B1 = [[]]


def Bk(k):
    return [B1] * k


def Ck(k):
    return [Bk(3)] * k


def test_registry_ids():
    ids = lemma_ids()
    assert len(ids) == len(set(ids)) == len(REGISTRY)
    assert {"kk-path", "ck-split", "compactify-52", "7k8", "uexc-g"} <= set(ids)
    with pytest.raises(UnknownLemmaError):
        sweep("nope")


def test_domains():
    with pytest.raises(DomainError):
        delta_ck_split(141, 500)
    with pytest.raises(DomainError):
        delta_7k8(3, 20)
    with pytest.raises(DomainError):
        delta_compactify(52, 400)
    with pytest.raises(DomainError):
        delta_dis2(10, 2)
    with pytest.raises(DomainError):
        delta_kk(5, 1)
    with pytest.raises(DomainError):
        delta_7k8(2.5, 40)


@pytest.mark.parametrize("k,dR", [(143, 143), (145, 300), (151, 151)])
def test_ck_split_realized(k, dR):
    h = (k + 1) // 2
    others = [Bk(3)] * (dR - 1)
    t = build([Ck(k)] + others)
    t2 = build([[Bk(4)] * 3 + [Bk(3)] * (h - 4), [Bk(3)] * (h - 1)] + others)
    assert t.n == t2.n
    assert abs(abc_index(t) - abc_index(t2) - delta_ck_split(k, dR)) < 1e-9


def test_ck_split_even_realized():
    k, dR = 144, 150
    h = k // 2
    others = [Bk(3)] * (dR - 1)
    t = build([Ck(k)] + others)
    t2 = build([[Bk(4)] * 3 + [Bk(3)] * (h - 3), [Bk(3)] * (h - 1)] + others)
    assert t.n == t2.n
    assert abs(abc_index(t) - abc_index(t2) - delta_ck_split(k, dR)) < 1e-9


@pytest.mark.parametrize("k,du", [(53, 365), (53, 370), (60, 366)])
def test_compactify_realized(k, du):
    d1 = du - 365
    a = FamilyConfig.of((C(k), 365), (B(3), d1)) if d1 else FamilyConfig.of((C(k), 365))
    b = FamilyConfig.of((C(52), 7 * k + 1), (B(3), d1)) if d1 else FamilyConfig.of((C(52), 7 * k + 1))
    assert a.n == b.n
    assert abs(closed_form_abc(a) - closed_form_abc(b) - delta_compactify(k, du)) < 1e-9


def test_compactify_small_tree_matches_closed_form():
    a = FamilyConfig.of((C(53), 365))
    assert abs(abc_index(assemble(a)) - closed_form_abc(a)) < 1e-8


@pytest.mark.parametrize("k,du,dR", [(1, 16, 3), (1, 25, 40), (2, 30, 5), (3, 40, 12)])
def test_7k8_bound_below_realized(k, du, dR):
    # u hangs from R; the other sons of u are C_{k+1} roots (degree k + 2)
    m = du - 7 * k - 9
    rest = [Ck(k + 1)] * m
    others = [Bk(3)] * (dR - 1)
    t = build([[Ck(k)] * (7 * k + 8) + rest] + others)
    t2 = build([[Ck(k + 1)] * (7 * k + 1) + rest] + others)
    assert t.n == t2.n
    assert abc_index(t) - abc_index(t2) >= delta_7k8(k, du) - 1e-9


def test_7k8_bound_is_the_limit():
    # with d_x1 = du - 1 and dR large the realized change approaches the bound
    k, du, dR = 1, 20, 4000
    m = du - 7 * k - 9
    big = [Bk(3)] * (du - 2)
    rest = [big] + [Ck(k + 1)] * (m - 1)
    others = [[]] * (dR - 1)
    t = build([[Ck(k)] * (7 * k + 8) + rest] + others)
    t2 = build([[Ck(k + 1)] * (7 * k + 1) + rest] + others)
    real = abc_index(t) - abc_index(t2)
    bound = delta_7k8(k, du)
    assert bound - 1e-9 <= real < bound + 1e-3


@pytest.mark.parametrize("k", sorted(SEVEN_K8_THRESHOLDS))
def test_7k8_thresholds(k):
    thr = SEVEN_K8_THRESHOLDS[k]
    assert delta_7k8(k, thr - 1) < 0 < delta_7k8(k, thr)
    assert all(delta_7k8(k, du) > 0 for du in range(thr, thr + 400))
    last = max(du for du in range(7 * k + 8, thr + 1) if delta_7k8(k, du) <= 0)
    assert last == thr - 1


def test_7k8_positive_for_small_k():
    for k in (1, 10, 48):
        assert min(delta_7k8(k, du) for du in range(7 * k + 8, 7 * k + 2000)) > 0


@pytest.mark.parametrize("k,dR", [(2, 17), (3, 20), (2, 40)])
def test_b1_merge_realized(k, dR):
    others = [Bk(5)] * (dR - 2)
    t = build([Bk(k), B1] + others)
    t2 = build([Bk(k + 1)] + others)
    assert t.n == t2.n
    assert abs(abc_index(t) - abc_index(t2) - aux_deltas("deg2root-bk-b1", dR=dR, k=k)) < 1e-10


def test_b1_merge_formula_outside_box():
    e = expr_deg2root_bk_b1()
    others = [Bk(5)] * 6
    t = build([Bk(3), B1] + others)
    t2 = build([Bk(4)] + others)
    assert abs(abc_index(t) - abc_index(t2) - e.eval({"dR": 8, "k": 3})) < 1e-10


@pytest.mark.parametrize("dR", [370, 2948])
def test_b3_at_root_realized(dR):
    a = FamilyConfig.of((C(53), 364), (C(52), dR - 365), (B(3), 1))
    b = FamilyConfig.of((C(53), 365), (C(52), dR - 366))
    assert a.n == b.n
    want = expr_s_zero_root_b3().eval({"dR": dR})
    assert abs(closed_form_abc(a) - closed_form_abc(b) - want) < 1e-8
    if dR == 370:
        assert abs(abc_index(assemble(a)) - abc_index(assemble(b)) - want) < 1e-8
    else:
        assert abs(aux_deltas("s-zero-root-b3", dR=dR) - want) < 1e-12


def test_uexc_g_is_worst_m():
    for dR, du, dp in [(100, 30, 6), (3271, 12, 6), (50, 20, 10), (200, 60, 53)]:
        vals = [delta_uexc(dR, du, dp, m) for m in range(du - 2)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] == delta_uexc(dR, du, dp)


def test_uexc_g_literal_box_has_negatives():
    assert delta_uexc(3271, 12, 6) == pytest.approx(-0.00212, abs=5e-6)
    assert delta_uexc(3271, 40, 16) > 0


def test_kk_known_point():
    # (k, m) = (4, 2)
    f = lambda x, y: math.sqrt((x + y - 2) / (x * y))
    k, m = 4, 2
    want = (f(k, k) - f(k, k + 1) + f(k, k) - f(k + 1, k - 1) + f(k, m) - f(k + 1, m)
            + (k - 2) * (2 * f(k, m) - f(k + 1, m) - f(k - 1, m)))
    assert delta_kk(k, m) == pytest.approx(want, abs=1e-14)
    assert delta_kk(k, m) > 0


@pytest.mark.parametrize("lid", ["dis2-deg6", "ck-split", "compactify-52", "b-exc-du13", "b4-to-root"])
def test_small_sweeps_verified(lid):
    rep = sweep(lid)
    assert rep.status == "verified"
    assert rep.min_value > 0 and rep.negative == 0


def test_sweep_partition_invariant():
    spec = SweepSpec("7k8", (("k", 1, 51), ("du", 8, 1500)))
    a = sweep(spec, workers=1, parts=1)
    b = sweep(spec, workers=1, parts=5)
    c = sweep(spec, workers=3)
    for r in (b, c):
        assert (r.min_value, r.argmin, r.status, r.evaluations) == (a.min_value, a.argmin, a.status, a.evaluations)


@needs_compiled
@pytest.mark.parametrize("lid", ["7k8", "dis2-deg6", "ck-split-even", "b-exc-mod7", "uexc-g-d53-diag"])
def test_backends_agree(lid):
    a = sweep(lid, backend="compiled")
    b = sweep(lid, backend="python")
    assert a.status == b.status and a.evaluations == b.evaluations
    assert a.min_value == pytest.approx(b.min_value, abs=1e-12)
    assert a.argmin == b.argmin


def test_counterexample_reported():
    rep = sweep(SweepSpec("7k8", (("k", 49, 49), ("du", 351, 1000))))
    assert rep.status == "counterexample"
    assert rep.negative == 473 - 351 + 1
    assert rep.first_negative["du"] == 351


def test_precision_spot_check_stable():
    rep = sweep(SweepSpec("7k8", (("k", 1, 51), ("du", 8, 4000))))
    assert rep.spot_check["checked"] > 0
    assert rep.spot_check["changed"] == 0


def test_report_json():
    import json

    d = sweep("dis2-deg6").to_dict()
    assert json.loads(json.dumps(d))["lemma_id"] == "dis2-deg6"


def test_b1minus_size():
    assert B1Minus().size == 2 and build(B1).n == 2
