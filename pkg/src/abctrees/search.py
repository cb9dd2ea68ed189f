"""Greedy trees, the structured family search, gamma_n bounds and transition scans.

The family search minimizes ``closed_form_abc`` over configurations made of
B3-branches at the root, r balanced C-branches (C_k and C_{k+1}), a few
extra B-type branches and at most one free C-branch that carries extras.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import _backend
from ._backend import py_kernels
from .branches import B, B1Minus, B3StarStar, BStar, C, FamilyConfig, closed_form_abc
from .graph import DegreeSequence, RootedTree, Tree, free_code, root_at

__all__ = [
    "C0",
    "GammaBounds",
    "FamilySearchResult",
    "greedy_tree",
    "family_search",
    "family_candidates",
    "gamma_bounds",
    "transition_scan",
    "first_positive_r",
    "KNOWN_TRANSITIONS",
]

C0 = (1 + 26 * math.sqrt(55) + 156 * math.sqrt(106)) / (365 * math.sqrt(53))
KMAX = 150
S_CAP = 322
FREE_WINDOW = (-3, 2)
TIE_TOL = 1e-10

# first n with r >= 1, by n mod 7
KNOWN_TRANSITIONS = {0: 525, 1: 939, 2: 422, 3: 864, 4: 508, 5: 740, 6: 664}

_EXTRA = {
    "B1-": B1Minus(),
    "B2": B(2),
    "B2*": BStar(2),
    "B3*": BStar(3),
    "B3**": B3StarStar(),
    "B4": B(4),
    "B5": B(5),
}


# greedy trees ---------------------------------------------------------------

def greedy_tree(seq) -> RootedTree:
    """Breadth-first realization of ``seq`` with degrees handed out in descending order."""
    if not isinstance(seq, DegreeSequence):
        seq = DegreeSequence.of(seq)
    d = list(seq.degrees)
    n = len(d)
    edges = []
    nxt = 1
    for v in range(n):
        slots = d[v] if v == 0 else d[v] - 1
        for _ in range(slots):
            edges.append((v, nxt))
            nxt += 1
    return root_at(Tree(n, edges), 0)


# gamma bounds ---------------------------------------------------------------

@dataclass(frozen=True)
class GammaBounds:
    n: int
    lower: float
    upper: float
    c0: float = C0


def gamma_bounds(n: int) -> GammaBounds:
    """c0*n -/+ (365*c0 + 25.5/sqrt(53)) with the first O(1/n) Taylor term.

    r = (n-1)//365 copies of C_52 bound the minimum from below, r+1 copies
    from above; the correction is -51^2/(8m)/sqrt(53) for m copies.
    The lower bound is -inf while r = 0.
    """
    n = int(n)
    if n < 3:
        raise ValueError("gamma bounds need n >= 3")
    r = (n - 1) // 365
    s53 = math.sqrt(1 / 53)
    mid = 25.5 * s53
    up = C0 * n + 365 * C0 + mid - 51 ** 2 / (8 * (r + 1)) * s53
    lo = C0 * n - 365 * C0 + mid - 51 ** 2 / (8 * r) * s53 if r >= 1 else -math.inf
    return GammaBounds(n, lo, up, C0)


# family search --------------------------------------------------------------

@dataclass
class FamilySearchResult:
    n: int
    best_config: FamilyConfig
    best_value: float
    ties: list
    r: int
    s: int
    stats: dict = field(default_factory=dict)


def _extra_lists(n: int, constraints: bool):
    if constraints:
        excs = [None, "B3**"] if n >= 415 else [None, "B2*", "B3*", "B3**"]
        b1s = [0]
    else:
        excs = [None, "B2*", "B3*", "B3**"]
        b1s = range(4)
    for b1 in b1s:
        for exc in excs:
            plain = exc is None or not constraints
            for b2 in range(12):
                for b4 in range(5 if plain else 1):
                    for b5 in range(2 if plain else 1):
                        yield ["B1-"] * b1 + ["B2"] * b2 + ["B4"] * b4 + ["B5"] * b5 + ([exc] if exc else [])


def _placements(extras: list[str]):
    """Root-only placement, then every split sending extras into the free C-branch."""
    yield list(extras), []
    b2 = [x for x in extras if x == "B2"]
    other = sorted({x for x in extras if x not in ("B2", "B1-")})
    for take_b2 in ([False, True] if b2 else [False]):
        for one in [None] + other:
            F = (b2 if take_b2 else []) + ([one] if one else [])
            if not F:
                continue
            root = list(extras)
            for x in F:
                root.remove(x)
            yield root, F


def _counts(names):
    cnt = [0] * 5
    for x in names:
        cnt[_EXTRA[x].degree - 2] += 1
    return cnt


def family_candidates(n: int, constraints: bool = True):
    """Kernel argument tuples, one per placement of the extras."""
    out = []
    lo, hi = FREE_WINDOW
    for extras in _extra_lists(n, constraints):
        for root, F in _placements(extras):
            esize = sum(_EXTRA[x].size for x in root)
            free_c = 1 if F else 0
            base = n - 1 - esize - (1 + sum(_EXTRA[x].size for x in F) if F else 0)
            if base < 0:
                continue
            eint = math.fsum(_EXTRA[x].internal for x in root)
            fint = math.fsum(_EXTRA[x].internal for x in F)
            out.append(((root, F), (base, len(root), eint, _counts(root), free_c, len(F), fint,
                                    _counts(F), lo, hi, KMAX, int(constraints),
                                    S_CAP if constraints else -1)))
    return out


def _build(root, F, r, K, kf, s) -> FamilyConfig:
    items = [(_EXTRA[x], 1) for x in root]
    if s:
        items.append((B(3), s))
    if r:
        k, a = divmod(K, r)
        items.append((C(k), r - a))
        if a:
            items.append((C(k + 1), a))
    if F:
        items.append((C(kf, [(_EXTRA[x], 1) for x in F]), 1))
    return FamilyConfig.of(*items)


def _run_chunk(backend: str, args_list):
    kern = py_kernels if backend == "python" else _backend.kernels
    return [kern.family_grid(*a) for a in args_list]


def family_search(n: int, constraints: bool = True, workers: int | None = None,
                  backend: str | None = None) -> FamilySearchResult:
    """Exhaustive minimum of closed_form_abc over the family of order n.

    With constraints on, the catalog limits apply (at most 11 B2, 4 B4, one B5,
    one starred or B3** branch and no 2-2 edge from n = 415 on) together with
    the copy limits on C_k-branches and the s <= 322 limit for root degree
    >= 2888.  With constraints off, up to three B1- branches are allowed and
    the copy limits are dropped.
    """
    n = int(n)
    if n < 3:
        raise ValueError("family search needs n >= 3")
    t0 = time.perf_counter()
    backend = backend or _backend.BACKEND
    cands = family_candidates(n, constraints)
    nw = max(1, int(workers or os.environ.get("ABC_THREADS", "1") or 1))
    args = [a for _, a in cands]
    if nw > 1 and len(args) > 1:
        chunks = [args[i::nw] for i in range(nw)]
        with ProcessPoolExecutor(max_workers=nw) as ex:
            parts = list(ex.map(_run_chunk, [backend] * nw, chunks))
        res = [None] * len(args)
        for i in range(nw):
            res[i::nw] = parts[i]
    else:
        res = _run_chunk(backend, args)
    best = min(r[0] for r in res)
    if not math.isfinite(best):
        raise RuntimeError(f"no family configuration of order {n}")
    found = {}
    for (place, _), (cost, r, K, kf, s) in zip(cands, res):
        if cost <= best + 1e-9 + 1e-12 * abs(best):
            cfg = _build(place[0], place[1], r, K, kf, s)
            if cfg.n != n:
                raise AssertionError(f"size mismatch {cfg.n} != {n}")
            found.setdefault(cfg, closed_form_abc(cfg))
    lo = min(found.values())
    ties = [c for c, v in found.items() if v - lo <= TIE_TOL]
    if len(ties) > 1:
        from .branches import assemble

        # configs rooted at different centres can assemble to the same tree
        coded = {}
        for c in ties:
            coded.setdefault(free_code(assemble(c)), c)
        ties = [coded[k] for k in sorted(coded, reverse=True)]
    top = ties[0]
    return FamilySearchResult(n, top, found[top], ties, top.r, top.s,
                              {"placements": len(args), "elapsed": time.perf_counter() - t0,
                               "backend": backend, "constraints": bool(constraints)})


def transition_scan(n_from: int, n_to: int, step: int = 1, constraints: bool = True,
                    backend: str | None = None) -> list[tuple]:
    """Rows (n, r, s, best_value) from family_search for n_from..n_to."""
    if n_from > n_to:
        raise ValueError("n_from must not exceed n_to")
    rows = []
    for n in range(int(n_from), int(n_to) + 1, int(step)):
        res = family_search(n, constraints, backend=backend)
        rows.append((n, res.r, res.s, res.best_value))
    return rows


def first_positive_r(residue: int, start: int, stop: int, constraints: bool = True,
                     backend: str | None = None):
    """Smallest n = residue mod 7 in [start, stop] whose family optimum has r >= 1."""
    n = start + (residue - start) % 7
    while n <= stop:
        res = family_search(n, constraints, backend=backend)
        if res.r >= 1:
            return n, res
        n += 7
    return None, None
