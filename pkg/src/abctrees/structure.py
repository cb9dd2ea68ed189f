"""Structural checks that ABC-minimal trees are known to satisfy.

Every check is combinatorial: degrees, adjacency and distances only.
The rooted checks use a maximum-degree root chosen by ``root_by_max_degree``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Tree, root_at, root_by_max_degree

__all__ = ["ItemResult", "Checklist", "validate_structure", "larger_neighbour_violations", "ITEMS"]

ITEMS = (
    "leaf_next_to_degree_2",
    "at_most_one_2_2_edge",
    "equal_degree_edges",
    "degrees_decrease",
    "big_degrees_near_root",
    "degree_3_and_5_counts",
    "no_degree_6_to_15_below_root",
    "leaves_within_distance_5",
    "one_exceptional_vertex",
)


@dataclass
class ItemResult:
    name: str
    passed: bool
    witnesses: list = field(default_factory=list)


@dataclass
class Checklist:
    items: dict

    def __getitem__(self, name: str) -> ItemResult:
        return self.items[name]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.items.values())

    def failed(self) -> list[str]:
        return [k for k, r in self.items.items() if not r.passed]

    def to_dict(self) -> dict:
        return {k: {"passed": r.passed, "witnesses": r.witnesses} for k, r in self.items.items()}


def _leaf_next_to_2(t: Tree, deg) -> ItemResult:
    bad = [v for v in range(t.n) if deg[v] == 1 and deg[t.adj[v][0]] != 2]
    return ItemResult(ITEMS[0], not bad, bad[:20])


def _same_degree_edges(t: Tree, deg) -> dict[int, list]:
    out: dict[int, list] = {}
    for u, v in t.edges:
        if deg[u] == deg[v]:
            out.setdefault(int(deg[u]), []).append((u, v))
    return out


def _two_two(same) -> ItemResult:
    e = same.get(2, [])
    return ItemResult(ITEMS[1], len(e) <= 1, e[:20] if len(e) > 1 else [])


def _equal_degree(same, dmax) -> ItemResult:
    bad = []
    for k, es in sorted(same.items()):
        if k < 2:
            continue
        if len(es) > 1 or k not in (2, dmax):
            bad.extend(es[:5])
    return ItemResult(ITEMS[2], not bad, bad[:20])


def _decrease(t: Tree, deg, dmax) -> ItemResult:
    """Degrees strictly decrease away from every maximum-degree vertex.

    Allowed exceptions: a 2-2 edge while n < 415, and a first step into a
    second vertex of maximum degree.
    """
    bad = []
    for s in np.flatnonzero(deg == dmax).tolist():
        r = root_at(t, s, sort_children=False)
        for v in r.order():
            for c in r.children[v]:
                if deg[c] < deg[v]:
                    continue
                if deg[c] == deg[v] == 2 and t.n < 415:
                    continue
                if v == s and deg[c] == dmax:
                    continue
                bad.append((v, c))
        if bad:
            break
    return ItemResult(ITEMS[3], not bad, bad[:20])


def _near_root(r, deg) -> ItemResult:
    root = r.root
    bad = [v for v in range(r.n) if deg[v] >= 6 and v != root and r.parent[v] != root]
    return ItemResult(ITEMS[4], not bad, bad[:20])


def _is_bk(r, v, deg) -> bool:
    ch = r.children[v]
    return bool(ch) and all(deg[c] == 2 and len(r.children[c]) == 1 and deg[r.children[c][0]] == 1 for c in ch)


def _counts(r, deg) -> ItemResult:
    d3 = [v for v in range(r.n) if deg[v] == 3]
    d5 = [v for v in range(r.n) if deg[v] == 5]
    b5 = [v for v in range(r.n) if v != r.root and deg[v] == 6 and _is_bk(r, v, deg)]
    wit = []
    if len(d3) > 11:
        wit.append({"degree_3": len(d3)})
    if len(d5) > 4:
        wit.append({"degree_5": len(d5)})
    if len(b5) > 1:
        wit.append({"B5": b5})
    return ItemResult(ITEMS[5], not wit, wit)


def _gap(r, deg) -> ItemResult:
    bad = [v for v in range(r.n) if v != r.root and 6 <= deg[v] <= 15]
    return ItemResult(ITEMS[6], not bad, bad[:20])


def _depth(r, deg) -> ItemResult:
    h = r.heights()
    bad = [v for v in range(r.n) if deg[v] == 1 and h[v] > 5]
    return ItemResult(ITEMS[7], not bad, bad[:20])


def _exceptional(r, deg) -> ItemResult:
    ex = []
    for v in range(r.n):
        if v == r.root or deg[v] < 3:
            continue
        in_b = any(deg[c] == 2 and len(r.children[c]) == 1 and deg[r.children[c][0]] == 1
                   for c in r.children[v])
        if in_b and not _is_bk(r, v, deg):
            ex.append(v)
    return ItemResult(ITEMS[8], len(ex) <= 1, ex if len(ex) > 1 else [])


def validate_structure(t: Tree) -> Checklist:
    """Run every structural item on t (n >= 3)."""
    if t.n < 3:
        raise ValueError("structural checks need n >= 3")
    deg = t.degrees
    dmax = int(deg.max())
    same = _same_degree_edges(t, deg)
    r = root_by_max_degree(t)
    res = [
        _leaf_next_to_2(t, deg),
        _two_two(same),
        _equal_degree(same, dmax),
        _decrease(t, deg, dmax),
        _near_root(r, deg),
        _counts(r, deg),
        _gap(r, deg),
        _depth(r, deg),
        _exceptional(r, deg),
    ]
    return Checklist({x.name: x for x in res})


def larger_neighbour_violations(t: Tree) -> list[int]:
    """Vertices adjacent to two or more vertices of strictly larger degree."""
    deg = t.degrees
    return [v for v in range(t.n) if sum(1 for w in t.adj[v] if deg[w] > deg[v]) > 1]
