"""Acceptance criteria; each test prints one PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -s`` or
``python tests/test_acceptance.py``.
"""
import math
import random
import sys

import pytest

from abctrees.branches import B, B3StarStar, C, FamilyConfig, assemble, closed_form_abc
from abctrees.enumeration import brute_force_min, min_by_degree_sequence
from abctrees.graph import Tree, abc_index, root_at
from abctrees.lemmas import SweepSpec, sweep
from abctrees.search import C0, KNOWN_TRANSITIONS, family_search, first_positive_r, gamma_bounds, greedy_tree
from abctrees.structure import validate_structure
from abctrees.transforms import exchange, legal_similarity, local_search

# tolerances pinned from the criteria
C0_TOL = 5e-9
CLOSED_FORM_TOL = 1e-10
GAMMA_SLACK = 1e-3
ABC_TOL = 1e-12
LANDMARK_TOL = 1e-10
GREEDY_TOL = 1e-12
TRANSITION_WINDOW = 7
TRANSITION_EXACT_MIN = 5
C_EXCEPTIONS = 364

# criterion 5: the sweeps it names, with default (10^4) caps
SWEEPS = ["kk-path", "dis2-deg6", "ck-split", "ck-split-even", "compactify-52", "7k8",
          "uexc-g", "uexc-g-d53", "uexc-g-d53-diag"]
AUX = ["k4-case1", "deg2root-4xB1", "deg2root-bk-b1", "b-exc-du13", "b-exc-du15", "b-exc-mod7",
       "b-exc-small-dr", "bk-size-b6", "bkstar-size", "b4star-to-b3ss", "degree-gap", "b5-to-b4",
       "b4-to-root", "s323-merge", "s-zero-root-b3"]


def report(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()
    return ok


def random_tree(n, rng):
    return Tree.from_parents([-1] + [rng.randrange(v) for v in range(1, n)])


def criterion_1():
    """The constant c0."""
    err = abs(C0 - 0.67737178)
    return report(1, err <= C0_TOL, f"c0 = {C0!r}; |c0 - 0.67737178| = {err:.2g}")


def criterion_2():
    """Closed form of r x C_52 against the tree and the gamma bounds, r = 1..200."""
    worst_cf, worst_gap, outside = 0.0, -math.inf, []
    for r in range(1, 201):
        cfg = FamilyConfig.of((C(52), r))
        t = assemble(cfg)
        cf = closed_form_abc(cfg)
        worst_cf = max(worst_cf, abs(abc_index(t) - cf))
        g = gamma_bounds(t.n)
        if not g.lower - GAMMA_SLACK <= cf <= g.upper + GAMMA_SLACK:
            outside.append(r)
        worst_gap = max(worst_gap, cf - g.upper, g.lower - cf)
    ok = worst_cf <= CLOSED_FORM_TOL and not outside
    return report(2, ok, f"max |tree - closed form| {worst_cf:.2g}; "
                         f"max excursion past bounds {worst_gap:.3g}; outside {outside}")


def criterion_3():
    """Structure of every brute-force witness for n = 3..18."""
    fails = []
    for n in range(3, 19):
        for t in brute_force_min(n).witnesses:
            c = validate_structure(t)
            items = ["leaf_next_to_degree_2"]
            # P_5 and P_6 are the unique minima and have two 2-2 edges
            if n > 9:
                items += ["at_most_one_2_2_edge", "equal_degree_edges"]
            fails += [(n, it, c[it].witnesses) for it in items if not c[it].passed]
    return report(3, not fails, f"failures {fails}")


def criterion_4():
    """Greedy tree is optimal for every realizable degree sequence, n = 7..14."""
    worst, count = 0.0, 0
    for n in range(7, 15):
        for seq, (val, _) in min_by_degree_sequence(n).items():
            worst = max(worst, abc_index(greedy_tree(seq).tree) - val)
            count += 1
    return report(4, worst <= GREEDY_TOL, f"{count} sequences; max excess {worst:.3g}")


def criterion_5():
    """Lemma sweeps end with status verified."""
    bad, total = [], 0.0
    for lid in SWEEPS + AUX:
        rep = sweep(SweepSpec(lid))
        total += rep.elapsed
        if rep.status != "verified":
            bad.append((lid, rep.status, rep.first_negative))
    return report(5, not bad, f"{len(SWEEPS) + len(AUX)} sweeps in {total:.0f}s; not verified {bad}")


def criterion_6():
    """n = 312 landmark."""
    r = family_search(312)
    cfg = r.best_config
    shape = cfg.count(B3StarStar()) == 1 and cfg.count(B(3)) == 43
    close = abs(abc_index(assemble(cfg)) - r.best_value) <= LANDMARK_TOL
    return report(6, shape and close, f"{cfg.describe()} value {r.best_value!r}")


def criterion_7():
    """First n with r >= 1 per residue class."""
    exact, worst, rows = 0, 0, []
    for res, want in sorted(KNOWN_TRANSITIONS.items()):
        got, best = first_positive_r(res, 300, 1200)
        if got is None:
            worst = math.inf
            rows.append((res, want, None))
            continue
        exact += got == want
        worst = max(worst, abs(got - want))
        row = (res, want, got)
        if got != want:
            for m in sorted((got, want)):
                fs = family_search(m)
                row += (m, fs.best_config.describe(), fs.best_value)
        rows.append(row)
    ok = exact >= TRANSITION_EXACT_MIN and worst <= TRANSITION_WINDOW
    return report(7, ok, f"{exact}/7 exact, max offset {worst}; {rows}")


def criterion_8():
    """Large n: no root B3 branches and C_52 up to 364 exceptions."""
    ok, rows = True, []
    for r in (500, 1000, 3000):
        n = 365 * r + 1
        res = family_search(n)
        sizes = {}
        for kind, cnt in res.best_config.c_branches():
            sizes[kind.b3] = sizes.get(kind.b3, 0) + cnt
        other = {k: c for k, c in sizes.items() if k != 52}
        good = (res.s == 0 and set(other) <= {51, 53} and sum(other.values()) <= C_EXCEPTIONS)
        ok &= good
        rows.append((n, res.s, sizes, res.best_value))
    return report(8, ok, f"{rows}")


def criterion_9():
    """Exchange and local-search properties."""
    rng = random.Random(2024)
    sim_err, lem_bad = 0.0, 0
    done_sim = done_lem = 0
    while done_sim < 1000 or done_lem < 1000:
        r = root_at(random_tree(rng.randrange(6, 40), rng), 0)
        d = r.tree.degrees
        v, w = rng.randrange(1, r.n), rng.randrange(1, r.n)
        if v == w or r.is_ancestor(v, w) or r.is_ancestor(w, v):
            continue
        before = abc_index(r.tree)
        if legal_similarity(r, v, w) and done_sim < 1000:
            sim_err = max(sim_err, abs(abc_index(exchange(r, v, w).tree) - before))
            done_sim += 1
        elif (d[r.parent[v]] - d[r.parent[w]]) * (d[v] - d[w]) < 0 and done_lem < 1000:
            lem_bad += abc_index(exchange(r, v, w).tree) >= before
            done_lem += 1
    mono = True
    for _ in range(100):
        t = random_tree(60, rng)
        trace = []
        out = local_search(t, budget=1000, trace=trace)
        vals = [abc_index(t)] + [s["abc"] for s in trace]
        mono &= len(trace) <= 1000 and all(b < a for a, b in zip(vals, vals[1:]))
        mono &= abs(vals[-1] - abc_index(out)) < 1e-9
    ok = sim_err <= ABC_TOL and lem_bad == 0 and mono
    return report(9, ok, f"similarity max |dABC| {sim_err:.2g}; non-decreasing (a)-exchanges {lem_bad}; "
                         f"local search monotone {mono}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_criterion(crit):
    assert crit()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
