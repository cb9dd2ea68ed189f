"""Pure-Python implementations of the hot loops.

The compiled module ``_kernels`` exposes the same functions with the same
signatures and results; ``_backend`` picks one at import time.
"""
from __future__ import annotations

import math

import numpy as np

NAME = "python"


# free trees as level sequences ----------------------------------------------
#
# A rooted tree is written as the depths of its vertices in preorder.  Free
# trees are generated as canonical level sequences rooted at a centre, in the
# order of the algorithm of Wright, Richmond, Odlyzko and McKay, using the
# Beyer-Hedetniemi successor for rooted trees.

def _next_rooted(seq: list[int], p: int | None = None) -> list[int] | None:
    if p is None:
        p = len(seq) - 1
        while seq[p] == 1:
            p -= 1
    if p == 0:
        return None
    q = p - 1
    while seq[q] != seq[p] - 1:
        q -= 1
    out = list(seq)
    for i in range(p, len(out)):
        out[i] = out[i - p + q]
    return out


def _split(seq: list[int]) -> tuple[list[int], list[int]]:
    m = len(seq)
    seen = False
    for i in range(len(seq)):
        if seq[i] == 1:
            if seen:
                m = i
                break
            seen = True
    left = [x - 1 for x in seq[1:m]]
    rest = [0] + seq[m:]
    return left, rest


def _next_free(seq: list[int]) -> list[int] | None:
    left, rest = _split(seq)
    lh, rh = max(left), max(rest)
    valid = rh >= lh
    if valid and rh == lh:
        if len(left) > len(rest) or (len(left) == len(rest) and left > rest):
            valid = False
    if valid:
        return seq
    p = len(left)
    nxt = _next_rooted(seq, p)
    if seq[p] > 2:
        nl, _ = _split(nxt)
        suffix = list(range(1, max(nl) + 2))
        nxt[-len(suffix):] = suffix
    return nxt


def level_sequences(n: int):
    """Yield one level sequence per free tree of order n."""
    if n == 1:
        yield [0]
        return
    if n == 2:
        yield [0, 1]
        return
    seq = list(range(n // 2 + 1)) + list(range(1, (n + 1) // 2))
    while seq is not None:
        seq = _next_free(seq)
        if seq is None:
            return
        yield seq
        seq = _next_rooted(seq)


def levels_to_parents(seq) -> list[int]:
    par = [-1] * len(seq)
    stack: list[int] = []
    for v, d in enumerate(seq):
        del stack[d:]
        if stack:
            par[v] = stack[-1]
        stack.append(v)
    return par


def _weight_table(n: int) -> list[list[float]]:
    tab = [[0.0] * (n + 1) for _ in range(n + 1)]
    for x in range(1, n + 1):
        for y in range(1, n + 1):
            tab[x][y] = math.sqrt((x + y - 2) / (x * y))
    return tab


def _abc_levels(par: list[int], tab) -> tuple[float, list[int]]:
    n = len(par)
    deg = [0] * n
    for v in range(1, n):
        deg[v] += 1
        deg[par[v]] += 1
    s = 0.0
    for v in range(1, n):
        s += tab[deg[v]][deg[par[v]]]
    return s, deg


def brute_min(n: int, tol: float, part: int = 0, nparts: int = 1):
    """Minimum ABC over free trees of order n (trees with index = part mod nparts).

    Returns (best value, list of level sequences within tol of it, count).
    """
    tab = _weight_table(n)
    best = math.inf
    wit: list[tuple[float, list[int]]] = []
    count = 0
    for idx, seq in enumerate(level_sequences(n)):
        if idx % nparts != part:
            continue
        count += 1
        val, _ = _abc_levels(levels_to_parents(seq), tab)
        if val < best:
            best = val
            wit = [(v, s) for v, s in wit if v <= best + tol]
            wit.append((val, list(seq)))
        elif val <= best + tol:
            wit.append((val, list(seq)))
    return best, [s for _, s in wit], count


def degree_class_min(n: int):
    """Map sorted degree tuple -> (min ABC, level sequence) over free trees of order n."""
    tab = _weight_table(n)
    out: dict[tuple, tuple[float, list[int]]] = {}
    for seq in level_sequences(n):
        val, deg = _abc_levels(levels_to_parents(seq), tab)
        key = tuple(sorted(deg, reverse=True))
        cur = out.get(key)
        if cur is None or val < cur[0]:
            out[key] = (val, list(seq))
    return out


def count_trees(n: int) -> int:
    return sum(1 for _ in level_sequences(n))


# lemma sweeps ---------------------------------------------------------------

def _bound(level, side, cp, p) -> int:
    if side == "lo":
        rows = np.flatnonzero(cp.lo_level == level)
        vals = [-((-(int(cp.lo_const[r]) + int(cp.lo_coef[r] @ p))) // int(cp.lo_den[r])) for r in rows]
        return max(vals)
    rows = np.flatnonzero(cp.hi_level == level)
    vals = [(int(cp.hi_const[r]) + int(cp.hi_coef[r] @ p)) // int(cp.hi_den[r]) for r in rows]
    return min(vals)


def _coef_vec(cp, t_mask_terms, p, inner_idx, q):
    """Coefficient of each selected term as float arrays over inner values q."""
    P = len(cp.names)
    out = {}
    for m in range(len(cp.mono_term)):
        t = int(cp.mono_term[m])
        if t not in t_mask_terms:
            continue
        v = np.full(q.shape, float(cp.mono_c[m]))
        for j in range(P):
            e = int(cp.mono_exp[m, j])
            if e:
                base = q.astype(np.float64) if j == inner_idx else float(p[j])
                v = v * base ** e
        out[t] = out.get(t, 0.0) + v
    return out


def _terms_double(cp, terms, p, inner_idx, q):
    """Sum of the given terms, vectorised over inner values q."""
    coef = _coef_vec(cp, set(terms), p, inner_idx, q)
    tot = np.zeros(q.shape)
    for t in terms:
        if t not in coef:
            continue
        pp = p.copy()
        y = (cp.y_const[t] + cp.y_coef[t] @ pp - cp.y_coef[t, inner_idx] * pp[inner_idx]
             + cp.y_coef[t, inner_idx] * q) / cp.y_den[t]
        if cp.x_inf[t]:
            fv = np.sqrt(1.0 / y)
        else:
            x = (cp.x_const[t] + cp.x_coef[t] @ pp - cp.x_coef[t, inner_idx] * pp[inner_idx]
                 + cp.x_coef[t, inner_idx] * q) / cp.x_den[t]
            fv = np.sqrt((x + y - 2.0) / (x * y))
        tot = tot + coef[t] * fv
    return tot


def eval_point_mp(cp, p, dps: int):
    """Value of the compiled expression at integer point p with mpmath."""
    import mpmath

    with mpmath.workdps(dps):
        coef = [0] * len(cp.x_const)
        for m in range(len(cp.mono_term)):
            v = int(cp.mono_c[m])
            for j, e in enumerate(cp.mono_exp[m]):
                if e:
                    v *= int(p[j]) ** int(e)
            coef[int(cp.mono_term[m])] += v
        tot = mpmath.mpf(0)
        for t in range(len(cp.x_const)):
            if coef[t] == 0:
                continue
            y = mpmath.mpf(int(cp.y_const[t]) + sum(int(a) * int(b) for a, b in zip(cp.y_coef[t], p))) / int(cp.y_den[t])
            if cp.x_inf[t]:
                fv = mpmath.sqrt(1 / y)
            else:
                x = mpmath.mpf(int(cp.x_const[t]) + sum(int(a) * int(b) for a, b in zip(cp.x_coef[t], p))) / int(cp.x_den[t])
                fv = mpmath.sqrt((x + y - 2) / (x * y))
            tot += coef[t] * fv
        return +tot


def sweep(cp, part: int, nparts: int, esc: float, prec_bits: int, keep: int, zero_tol: float):
    """Evaluate every point of the compiled domain assigned to this part.

    Points with |value| < esc are recomputed with prec_bits of precision.  A
    recomputed value with magnitude below zero_tol is inconclusive.
    """
    import heapq

    import mpmath

    P = len(cp.names)
    inner = P - 1
    dps = int(math.ceil(prec_bits * math.log10(2))) + 2
    T = len(cp.x_const)
    outer_terms = list(range(cp.n_outer))
    inner_terms = list(range(cp.n_outer, T))
    st = {"count": 0, "escalated": 0, "negative": 0, "inconclusive": 0, "invalid": 0,
          "min_value": math.inf, "argmin": None, "first_negative": None}
    heap: list = []  # (-abs, counter, value, params)
    p = np.zeros(P, dtype=np.int64)
    counter = [0]

    def row():
        lo, hi = _bound(inner, "lo", cp, p), _bound(inner, "hi", cp, p)
        step = int(cp.step[inner])
        if hi < lo:
            return
        q = np.arange(lo, hi + 1, step, dtype=np.int64)
        base = _terms_double(cp, outer_terms, p, inner, np.zeros(1, dtype=np.int64))[0] if outer_terms else 0.0
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = base + _terms_double(cp, inner_terms, p, inner, q)
        st["count"] += len(q)
        bad = ~np.isfinite(vals)
        if bad.any():
            st["invalid"] += int(bad.sum())
            vals = np.where(bad, np.inf, vals)
        esc_idx = np.flatnonzero(np.abs(vals) < esc)
        hp_vals = {}
        for i in esc_idx.tolist():
            pt = p.copy()
            pt[inner] = q[i]
            hv = eval_point_mp(cp, pt, dps)
            st["escalated"] += 1
            if abs(hv) <= zero_tol:
                st["inconclusive"] += 1
            vals[i] = float(hv)
            hp_vals[i] = hv
        neg = np.flatnonzero((vals <= 0) & np.isin(np.arange(len(q)), esc_idx, invert=True))
        neg_hp = [i for i, hv in hp_vals.items() if hv < 0 and abs(hv) > zero_tol]
        n_neg = len(neg) + len(neg_hp)
        if n_neg:
            st["negative"] += n_neg
            first = min(list(neg.tolist()) + neg_hp)
            if st["first_negative"] is None:
                pt = p.copy()
                pt[inner] = q[first]
                st["first_negative"] = tuple(int(x) for x in pt)
        i = int(np.argmin(vals))
        if vals[i] < st["min_value"]:
            pt = p.copy()
            pt[inner] = q[i]
            st["min_value"] = float(vals[i])
            st["argmin"] = tuple(int(x) for x in pt)
        if keep:
            a = np.abs(vals)
            k = min(keep, len(a))
            idx = np.argpartition(a, k - 1)[:k] if k < len(a) else np.arange(len(a))
            for j in sorted(idx.tolist()):
                item = (-float(a[j]), counter[0], float(vals[j]), None)
                if len(heap) < keep:
                    pt = p.copy(); pt[inner] = q[j]
                    heapq.heappush(heap, (item[0], item[1], item[2], tuple(int(x) for x in pt)))
                elif -item[0] < -heap[0][0]:
                    pt = p.copy(); pt[inner] = q[j]
                    heapq.heapreplace(heap, (item[0], item[1], item[2], tuple(int(x) for x in pt)))
                counter[0] += 1

    def rec(level, index_outer):
        if level == inner:
            row()
            return
        lo, hi = _bound(level, "lo", cp, p), _bound(level, "hi", cp, p)
        step = int(cp.step[level])
        for i, v in enumerate(range(lo, hi + 1, step)):
            if level == 0 and nparts > 1 and i % nparts != part:
                continue
            p[level] = v
            rec(level + 1, i)
        p[level] = 0

    if P == 1:
        if part == 0:
            row()
    else:
        rec(0, 0)
    st["smallest"] = sorted(((-a, v, pt) for a, _, v, pt in heap), key=lambda z: (z[0], z[2]))
    return st


# family-search grid -----------------------------------------------------------

_R2 = math.sqrt(2.0) / 2.0
_BIG = 1 << 40


def _f(x, y):
    return np.sqrt((x + y - 2.0) / (x * y))


def _ccap(k: int, D, constrained: bool):
    """Largest allowed number of C_k copies next to a root of degree D (vectorized in D)."""
    D = np.asarray(D)
    if not constrained:
        return np.full(D.shape, _BIG)
    if k >= 143:
        return np.zeros(D.shape, dtype=np.int64)
    if k >= 53:
        return np.full(D.shape, 364)
    lim = 7 * k + 7
    if k <= 48:
        return np.full(D.shape, lim)
    thr = {49: 474, 50: 874, 51: 3273}.get(k)
    if thr is None:
        return np.full(D.shape, _BIG)
    return np.where(D >= thr, lim, _BIG)


def family_grid(base, e, eint, ecnt, free_c, nF, fint, fcnt, dlo, dhi, kmax, constrained, smax):
    """Best (cost, r, K, kf, s) for one placement of the extras; see the compiled twin."""
    ec = [float(x) for x in ecnt]
    fc = [float(x) for x in fcnt]
    c6 = 6.0 * _R2
    best = (math.inf, -1, -1, -1, -1)

    def extras(D):
        out = eint
        for d in range(5):
            if ec[d]:
                out = out + ec[d] * _f(D, d + 2.0)
        return out

    if base >= 0 and base % 7 == 0:
        if free_c:
            for kf in range(0, kmax + 1):
                if kf + nF == 0:
                    continue
                rem = base - 7 * kf
                if rem < 0:
                    break
                s = rem // 7
                D = s + e + 1
                if smax >= 0 and s > smax and D >= 2888:
                    continue
                df = kf + nF + 1
                cost = s * (_f(D, 4.0) + c6) + extras(D) + _f(D, df) + kf * (_f(df, 4.0) + c6) + fint
                cost += sum(fc[d] * _f(df, d + 2.0) for d in range(5))
                if cost < best[0]:
                    best = (float(cost), 0, 0, kf, s)
        else:
            s = base // 7
            D = s + e
            if D >= 1 and not (smax >= 0 and s > smax and D >= 2888):
                cost = s * (_f(D, 4.0) + c6) + extras(D)
                if cost < best[0]:
                    best = (float(cost), 0, 0, -1, s)
    r = base % 7 or 7
    deltas = range(dlo, dhi + 1) if free_c else [0]
    while 8 * r <= base:
        for k in range(1, kmax + 1):
            if constrained and r > int(_ccap(k, 0, True)) + int(_ccap(k + 1, 0, True)):
                continue
            if r * (7 * k + 1) > base:
                break
            g0 = k * (_f(k + 1.0, 4.0) + c6)
            g1 = (k + 1) * (_f(k + 2.0, 4.0) + c6)
            for dd in deltas:
                kf = k + dd if free_c else 0
                if free_c and (kf < 0 or kf > kmax or kf + nF == 0):
                    continue
                rem = base - r - 7 * k * r - 7 * kf
                if rem < 0:
                    continue
                s0 = rem // 7
                a_lo, a_hi = 0, min(r - 1, s0)
                if smax >= 0:
                    a_lo = max(a_lo, s0 - 2887)
                if a_hi < a_lo:
                    continue
                a = np.arange(a_lo, a_hi + 1)
                s = s0 - a
                D = s + r + e + free_c
                ok = np.ones(a.shape, dtype=bool)
                if smax >= 0:
                    ok &= ~((s > smax) & (D >= 2888))
                if constrained:
                    ok &= (r - a <= _ccap(k, D, True)) & (a <= _ccap(k + 1, D, True))
                cost = s * (_f(D, 4.0) + c6) + extras(D)
                cost = cost + (r - a) * (_f(D, k + 1.0) + g0) + a * (_f(D, k + 2.0) + g1)
                if free_c:
                    df = kf + nF + 1
                    fpart = kf * (_f(df, 4.0) + c6) + fint + sum(fc[d] * _f(df, d + 2.0) for d in range(5))
                    cost = cost + _f(D, df) + fpart
                cost = np.where(ok, cost, np.inf)
                i = int(np.argmin(cost))
                if cost[i] < best[0]:
                    best = (float(cost[i]), r, k * r + int(a[i]), kf, int(s[i]))
        r += 7
    return best
