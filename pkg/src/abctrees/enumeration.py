"""Free-tree enumeration and the brute-force ABC-minimal oracle."""
from __future__ import annotations

import heapq
import itertools
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import _backend
from ._backend import py_kernels
from .graph import DegreeSequence, Tree, abc_index, free_code

__all__ = [
    "CapacityError",
    "DEFAULT_CAP",
    "DEGREE_CAP",
    "TreeStream",
    "SearchResult",
    "free_trees",
    "brute_force_min",
    "min_by_degree_sequence",
    "prufer_classes",
    "tree_from_levels",
]

DEFAULT_CAP = 22
DEGREE_CAP = 16
TIE_TOL = 1e-10


class CapacityError(ValueError):
    """Requested order exceeds the enumeration cap."""


def _kern(backend: str | None):
    if backend == "python":
        return py_kernels
    return _backend.kernels


def _check(n: int, cap: int, lo: int = 1) -> int:
    n = int(n)
    if n < lo:
        raise ValueError(f"n must be >= {lo}, got {n}")
    if n > cap:
        raise CapacityError(f"n={n} exceeds the enumeration cap {cap}")
    return n


def tree_from_levels(seq) -> Tree:
    return Tree.from_parents(py_kernels.levels_to_parents(list(seq)), validate=False)


class TreeStream:
    """All free trees of order n, each isomorphism class once, in a fixed order."""

    def __init__(self, n: int, cap: int = DEFAULT_CAP, backend: str | None = None):
        self.n = _check(n, cap)
        self._k = _kern(backend)

    def level_sequences(self):
        for s in self._k.level_sequences(self.n):
            yield list(s)

    def __iter__(self):
        for s in self.level_sequences():
            yield tree_from_levels(s)

    def count(self) -> int:
        return int(self._k.count_trees(self.n))


def free_trees(n: int, cap: int = DEFAULT_CAP, backend: str | None = None) -> TreeStream:
    return TreeStream(n, cap, backend)


@dataclass
class SearchResult:
    n: int
    best_value: float
    witnesses: list
    stats: dict = field(default_factory=dict)


def _mp_abc(t: Tree, dps: int = 50):
    import mpmath

    with mpmath.workdps(dps):
        deg = t.degrees
        s = mpmath.mpf(0)
        for u, v in t.edges:
            x, y = int(deg[u]), int(deg[v])
            s += mpmath.sqrt(mpmath.mpf(x + y - 2) / (x * y))
        return +s


def _brute_part(backend, n, tol, part, nparts):
    return _kern(backend).brute_min(n, tol, part, nparts)


def brute_force_min(n: int, cap: int = DEFAULT_CAP, tie_tol: float = TIE_TOL,
                    workers: int | None = None, backend: str | None = None) -> SearchResult:
    """Minimum ABC index over all trees of order n with every minimizer.

    Candidates within 2 * tie_tol in double precision are re-evaluated with
    50 digits; witnesses are those within tie_tol of the exact minimum,
    ordered by descending canonical code.
    """
    n = _check(n, cap, lo=3)
    t0 = time.perf_counter()
    nw = max(1, int(workers or os.environ.get("ABC_THREADS", "1") or 1))
    backend = backend or _backend.BACKEND
    args = [(backend, n, 2 * tie_tol, p, nw) for p in range(nw)]
    if nw > 1:
        with ProcessPoolExecutor(max_workers=nw) as ex:
            parts = list(ex.map(_brute_part, *zip(*args)))
    else:
        parts = [_brute_part(*args[0])]
    best = min(p[0] for p in parts)
    examined = sum(int(p[2]) for p in parts)
    cands = [tree_from_levels(s) for p in parts if p[0] <= best + 2 * tie_tol for s in p[1]]
    exact = [(_mp_abc(t), t) for t in cands]
    lo = min(v for v, _ in exact)
    wit = [t for v, t in exact if v - lo <= tie_tol]
    wit.sort(key=free_code, reverse=True)
    return SearchResult(n, float(lo), wit, {"examined": examined, "elapsed": time.perf_counter() - t0,
                                           "backend": backend, "workers": nw})


def min_by_degree_sequence(n: int, cap: int = DEGREE_CAP, backend: str | None = None) -> dict:
    """DegreeSequence -> (minimum ABC, a minimizing tree) over all trees of order n."""
    n = _check(n, cap, lo=3)
    raw = _kern(backend).degree_class_min(n)
    out = {}
    for key, (val, seq) in raw.items():
        t = tree_from_levels(seq)
        out[DegreeSequence(tuple(int(x) for x in key))] = (abc_index(t), t)
    return dict(sorted(out.items(), key=lambda kv: kv[0].degrees, reverse=True))


def prufer_classes(n: int) -> set[bytes]:
    """Isomorphism classes of trees of order n from all labelled trees (small n only)."""
    if n > 9:
        raise CapacityError("Prüfer enumeration is limited to n <= 9")
    if n <= 2:
        return {free_code(Tree(n, [(0, 1)] if n == 2 else []))}
    out = set()
    for code in itertools.product(range(n), repeat=n - 2):
        out.add(free_code(_prufer_tree(n, code)))
    return out


def _prufer_tree(n: int, code) -> Tree:
    deg = [1] * n
    for x in code:
        deg[x] += 1
    edges = []
    leaves = [v for v in range(n) if deg[v] == 1]
    heapq.heapify(leaves)
    for x in code:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        deg[x] -= 1
        if deg[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, v))
    return Tree(n, edges, validate=False)
