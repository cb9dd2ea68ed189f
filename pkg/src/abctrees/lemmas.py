"""Closed-form differences ABC(T) - ABC(T') and positivity sweeps.

Each registered lemma is a list of pieces; a piece is an ``Expr`` together
with a ``Domain`` of integer parameters.  ``sweep`` evaluates every point of
every piece in double precision, re-evaluates points with |value| < 1e-6 in
multiple precision, and classifies the lemma as verified, counterexample or
inconclusive.

The ``delta_*`` functions evaluate the same expressions at a single point.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from . import _backend
from ._backend import kernels, py_kernels
from .expr import RS, Domain, Expr, F, Sym, compile_expr

__all__ = [
    "DomainError",
    "UnknownLemmaError",
    "CapExceededError",
    "Param",
    "Piece",
    "LemmaDef",
    "SweepSpec",
    "SweepReport",
    "REGISTRY",
    "lemma_ids",
    "pieces_for",
    "sweep",
    "delta_kk",
    "delta_dis2",
    "delta_ck_split",
    "delta_compactify",
    "delta_7k8",
    "delta_uexc",
    "aux_deltas",
    "AUX_IDS",
]

ESCALATE_BELOW = 1e-6
POSITIVE_ABOVE = 1e-9
PREC_BITS = 192  # about 57 significant digits
ZERO_TOL = 1e-40
KEEP = 100
CAP = 10_000


class DomainError(ValueError):
    """Parameters outside the domain of a lemma expression."""


class UnknownLemmaError(KeyError):
    pass


class CapExceededError(ValueError):
    pass


R2 = F(2, 1)  # sqrt(2)/2, the weight of every edge at a degree-2 vertex


# branch data: root degree, vertex count, internal weight --------------------

_BRANCH = {
    "B1-": (2, 2, 1),
    "B2": (3, 5, 4),
    "B2*": (3, 6, 5),
    "B3": (4, 7, 6),
    "B3*": (4, 8, 7),
    "B3**": (4, 10, 8),
    "B4": (5, 9, 8),
    "B5": (6, 11, 10),
}


def _internal(name: str) -> Expr:
    e = _BRANCH[name][2] * R2
    if name == "B3**":
        e = e + F(4, 3)
    return e


def mod7_replacement(k: int, split_b4_b5: bool = False) -> list[tuple[str, int]]:
    """Branches of total size k that replace a B-exceptional branch of size k."""
    if split_b4_b5:
        if k != 20:
            raise DomainError("the B4 + B5 replacement has 20 vertices")
        return [("B4", 1), ("B5", 1)]
    q, r = divmod(k, 7)
    table = {
        0: [("B3", q)],
        1: [("B3", q - 1), ("B3*", 1)],
        2: [("B3", q - 1), ("B4", 1)],
        3: [("B3", q - 1), ("B3**", 1)],
        4: [("B3", q - 2), ("B4", 2)],
        5: [("B3", q), ("B2", 1)],
        6: [("B3", q), ("B2*", 1)],
    }[r]
    if any(c < 0 for _, c in table):
        raise DomainError(f"no replacement for size {k}")
    out = [(n, c) for n, c in table if c]
    assert sum(_BRANCH[n][1] * c for n, c in out) == k
    return out


def _move_to_root(children, vdeg, replacement, dR, dz) -> Expr:
    """Vertex v (degree vdeg) with the given child branches hangs from R.

    T' deletes T_v and attaches the replacement branches to R.  The other
    dR - 1 neighbours of R are taken with degree dz.
    """
    m = sum(c for _, c in replacement)
    dR2 = dR - 1 + m
    e = F(dR, vdeg)
    for n, c in children:
        e = e + c * (F(vdeg, _BRANCH[n][0]) + _internal(n))
    for n, c in replacement:
        e = e - c * (F(dR2, _BRANCH[n][0]) + _internal(n))
    return e + (dR - 1) * (F(dR, dz) - F(dR2, dz))


# expressions ----------------------------------------------------------------

k_, m_ = Sym("k"), Sym("m")
dR_, du_, dp_ = Sym("dR"), Sym("du"), Sym("dprime")
D_, j_, s_ = Sym("D"), Sym("j"), Sym("s")


def expr_kk_path() -> Expr:
    k, m = k_, m_
    return (F(k, k) - F(k, k + 1) + F(k, k) - F(k + 1, k - 1)
            + F(k, m) - F(k + 1, m) + (k - 2) * F(k, m) - (k - 2) * F(k + 1, m)
            + (k - 2) * F(k, m) - (k - 2) * F(k - 1, m))


def expr_dis2() -> Expr:
    dR, du = dR_, du_
    return (F(dR, du) - F(2, 2) + (dR - 1) * (F(dR, 6) - F(dR + du - 2, 6))
            + (du - 1) * (F(du, 6) - F(dR + du - 2, 6)))


def expr_ck_split() -> Expr:
    k, dR = k_, dR_
    h = (k + 1) / 2
    return (F(dR, k + 1) + k * F(k + 1, 4) + (dR - 1) * F(dR, 4) - 2 * F(dR + 1, h)
            - (k - 4) * F(h, 4) - 3 * F(h, 5) - (dR - 1) * F(dR + 1, 4))


def expr_ck_split_even() -> Expr:
    # k = 2h; halves with h and h - 1 sons, the three B4 in the larger half
    h, dR = Sym("h"), dR_
    k = 2 * h
    a, b = h + 1, h
    return (F(dR, k + 1) + k * F(k + 1, 4) + (dR - 1) * F(dR, 4)
            - F(dR + 1, a) - F(dR + 1, b)
            - (h - 3) * F(a, 4) - 3 * F(a, 5) - (h - 1) * F(b, 4)
            - (dR - 1) * F(dR + 1, 4))


def expr_compactify() -> Expr:
    k, du = k_, du_
    d1 = du - 365  # d + 1 with d = du - 366
    dup = du + 7 * k - 364
    return (365 * F(du, k + 1) + 365 * k * (F(k + 1, 4) + 6 * R2) + d1 * F(du, 4)
            - (7 * k + 1) * (F(dup, 53) + 52 * (F(53, 4) + 6 * R2)) - d1 * F(dup, 4))


def expr_7k8() -> Expr:
    k, du = k_, du_
    return (RS(du) - RS(du - 7) + (7 * k + 8) * F(du, k + 1) - (7 * k + 1) * F(du - 7, k + 2)
            + (du - 7 * k - 10) * (F(du, k + 2) - F(du - 7, k + 2))
            + F(du, du - 1) - F(du - 7, du - 1)
            + k * (7 * k + 8) * F(k + 1, 4) - (7 * k + 1) * (k + 1) * F(k + 2, 4) - 6 * F(2, 1))


def expr_uexc_m() -> Expr:
    dR, du, dp, m = dR_, du_, dp_, m_
    return (F(dR, du) - F(dR + 1, du - 1) + (dR - 1) * (F(dR, dp) - F(dR + 1, dp))
            + F(du, dp) - F(dR + 1, dp) + (du - 2) * (F(du, 5) - F(du - 1, 5))
            + m * (F(du, dp) - F(du - 1, dp) - F(du, 5) + F(du - 1, 5)))


def expr_uexc_g() -> Expr:
    dR, du, dp = dR_, du_, dp_
    return (F(dR, du) - F(dR + 1, du - 1) + (dR - 1) * (F(dR, dp) - F(dR + 1, dp))
            + F(du, dp) - F(dR + 1, dp) + (F(du, 5) - F(du - 1, 5))
            + (du - 3) * (F(du, dp) - F(du - 1, dp)))


def expr_k4_case1() -> Expr:
    dR = dR_
    t = F(dR, 4) + 5 * F(4, 3) + F(4, 4) + 10 * F(3, 2) + 10 * F(2, 1)
    t2 = 3 * F(dR + 2, 5) + 12 * F(5, 2) + 12 * F(2, 1)
    return t - t2 + (dR - 1) * (F(dR, 3) - F(dR + 2, 3))


def expr_deg2root_4b1() -> Expr:
    dR = dR_
    return F(2, 2) - F(4, dR - 3) + (dR - 4) * (F(6, dR) - F(6, dR - 3))


def expr_deg2root_bk_b1() -> Expr:
    # B_k and B1- merged into B_{k+1}; the degree-2 edge weights cancel
    dR, k = dR_, k_
    return F(dR, k + 1) - F(dR - 1, k + 2) + (dR - 2) * (F(6, dR) - F(6, dR - 1))


def expr_bexc_du13() -> Expr:
    du = du_
    return RS(du) + 4 * F(du, 5) - RS(du - 1) - 3 * F(du - 1, 5) - F(du - 1, 6)


def expr_bexc_du15() -> Expr:
    du = du_
    return (RS(du) + 4 * F(du, 5) + (du - 6) * F(du, 4)
            - RS(du - 1) - 5 * F(du - 1, 5) - (du - 7) * F(du - 1, 4))


def expr_bexc_small_dr() -> Expr:
    dR = dR_
    return F(3, 4) + F(4, dR) - 2 * F(3, dR + 1) + (dR - 1) * (F(3, dR) - F(3, dR + 1))


def expr_bk_size_b6() -> Expr:
    D, k = D_, k_
    return F(D, k + 1) - F(D + 1, k - 3) - F(D + 1, 4) + F(2, 2)


def expr_bkstar_size() -> Expr:
    D, k = D_, k_
    return F(D, k + 1) - F(D + 1, k - 2) - F(D + 1, 4) + F(2, 2)


def expr_b4star_to_b3ss() -> Expr:
    D = D_
    return F(D, 5) + F(2, 2) - F(D, 4) - F(4, 3)


def expr_b5_to_b4(receiver: int, limit: bool) -> Expr:
    """A B1- moves from a B5 under w to a B_receiver under u (d_w -> infinity if limit)."""
    du = du_
    top = RS(6) - RS(5) if limit else F(D_, 6) - F(D_, 5)
    r = receiver
    return top + F(du, r + 1) - F(du, r + 2) + F(6, 2) - F(r + 2, 2)


def expr_b4_to_root() -> Expr:
    # j B4 children of u move to R; u keeps du - 1 - j children of degree 4,
    # the other neighbours of R are 4 - j of degree 5 and the rest degree 4
    dR, du, j = dR_, du_, j_
    return (F(dR, du) + j * F(du, 5) + (du - 1 - j) * F(du, 4)
            + (dR - 5 + j) * F(dR, 4) + (4 - j) * F(dR, 5)
            - F(dR + j, du - j) - j * F(dR + j, 5) - (du - 1 - j) * F(du - j, 4)
            - (dR - 5 + j) * F(dR + j, 4) - (4 - j) * F(dR + j, 5))


def expr_s323_a() -> Expr:
    dR, s = dR_, s_
    d2 = dR - s + 7
    c = (s + 6) / 7
    return (364 * F(dR, 143) + 364 * F(dR, 142) + 4 * F(dR, 5) + (dR - 2 * 364 - 4) * F(dR, 4) + 6 * R2
            - 364 * F(d2, 142) - 364 * F(d2, 143) - 7 * F(d2, c)
            - 4 * F(d2, 5) - (dR - s - 2 * 364 - 4) * F(d2, 4) - (s - 1) * F(c, 4))


def expr_s323_b() -> Expr:
    dR, s = dR_, s_
    d2 = dR - s + 7
    c = (s + 6) / 7
    # dR - 364 - s - 4 neighbours of degree 53, as the vertex count requires
    return (364 * F(dR, 54) + (dR - 364 - s - 4) * F(dR, 53) + 4 * F(dR, 5) + s * F(dR, 4) + 6 * R2
            - 364 * F(d2, 54) - (dR - 364 - s - 4) * F(d2, 53)
            - 4 * F(d2, 5) - 7 * F(d2, c) - (s - 1) * F(c, 4))


def expr_s_zero_root_b3() -> Expr:
    dR = dR_
    return (364 * F(dR, 54) + (dR - 365) * F(dR, 53) + F(dR, 4) + 52 * F(53, 4)
            - 365 * F(dR - 1, 54) - (dR - 366) * F(dR - 1, 53) - 53 * F(54, 4))


# composition families -------------------------------------------------------

def bexc_tuples():
    """(k1, k2, k3, k4) with d_u = k1+k2+k3+k4 sons of u and size k >= 12."""
    for du in range(4, 15):
        for k1 in range(1, du - 1):
            for k2 in range(0, min(du - 2, 11) + 1):
                for k4 in range(0, min(du - 2, 4) + 1):
                    k3 = du - k1 - k2 - k4
                    if k3 < 0 or k3 > du - 2 or k2 * k4 or k2 + k3 + k4 == 0:
                        continue
                    if 1 + 2 * k1 + 5 * k2 + 7 * k3 + 9 * k4 >= 12:
                        yield (k1, k2, k3, k4)


BEXC_SPECIAL = (2, 3, 0, 0)  # size 20; the B4 + B5 replacement for dR >= 95


def _bexc_children(t):
    return [(n, c) for n, c in zip(("B1-", "B2", "B3", "B4"), t) if c]


def expr_bexc_mod7(t, split_b4_b5: bool = False) -> Expr:
    k = 1 + 2 * t[0] + 5 * t[1] + 7 * t[2] + 9 * t[3]
    return _move_to_root(_bexc_children(t), sum(t) + 1, mod7_replacement(k, split_b4_b5), dR_, 3)


_DEGK_TYPES = ("B2", "B2*", "B3", "B3*", "B3**", "B4", "B5")


def degk_children(k: int):
    """Child multisets of a non-root vertex of degree k (k = 4, 5, 7..15)."""
    types = {4: _DEGK_TYPES[:2], 5: _DEGK_TYPES[:5]}.get(k, _DEGK_TYPES)

    def rec(i, left):
        if i == len(types) - 1:
            yield (left,)
            return
        for a in range(left + 1):
            for r in rec(i + 1, left - a):
                yield (a,) + r

    for t in rec(0, k - 1):
        c = dict(zip(types, t))
        if c.get("B2", 0) > 11 or c.get("B4", 0) > 4:
            continue
        if c.get("B2*", 0) + c.get("B3*", 0) + c.get("B3**", 0) > 1:
            continue
        yield tuple((n, m) for n, m in c.items() if m)


def expr_degk(k: int, children) -> Expr:
    nv = 1 + sum(_BRANCH[n][1] * c for n, c in children)
    if k == 4:
        rep = {16: [("B3", 1), ("B4", 1)], 17: [("B3", 1), ("B2", 2)]}[nv]
    else:
        rep = mod7_replacement(nv)
    return _move_to_root(list(children), k, rep, dR_, 3)


# registry -------------------------------------------------------------------

@dataclass(frozen=True)
class Param:
    """Default box [lo, hi] and cap [cap_lo, cap_hi] for one parameter."""

    name: str
    lo: int
    hi: int
    cap_lo: int
    cap_hi: int
    full_hi: int | None = None


@dataclass
class Piece:
    label: str
    expr: Expr
    domain: Domain


@dataclass
class LemmaDef:
    lemma_id: str
    title: str
    params: tuple
    build: Callable[[dict], list]
    origin: str  # "printed", "derived" (written out from the described change) or "reconstructed"
    notes: tuple = ()
    aux: bool = False


def _box(*specs):
    return Domain.box(*specs)


def _b_kk_path(rng):
    klo, khi = rng["k"]
    out = []
    if klo <= 4 <= khi:
        out.append(Piece("k=4,m=2", expr_kk_path(), _box(("k", 4, 4), ("m", 2, 2))))
    lo = max(klo, 5)
    if lo <= khi:
        out.append(Piece("k>=5", expr_kk_path(), _box(("k", lo, khi), ("m", 2, k_ - 1))))
    return out


def _b_dis2(rng):
    lo, hi = rng["dR"]
    return [Piece("du<=dR", expr_dis2(), _box(("dR", lo, hi), ("du", 3, dR_)))]


def _b_ck(rng):
    klo, khi = rng["k"]
    klo += (klo + 1) % 2
    return [Piece("odd k", expr_ck_split(), _box(("k", klo, khi, 2), ("dR", [k_, rng["dR"][0]], rng["dR"][1])))]


def _b_ck_even(rng):
    klo, khi = rng["k"]
    h = Sym("h")
    return [Piece("even k = 2h", expr_ck_split_even(),
                  _box(("h", (klo + 1) // 2, khi // 2), ("dR", [2 * h, rng["dR"][0]], rng["dR"][1])))]


def _b_compactify(rng):
    return [Piece("53<=k<=142", expr_compactify(), _box(("k", *rng["k"]), ("du", *rng["du"])))]


SEVEN_K8_THRESHOLDS = {49: 474, 50: 874, 51: 3273}


def _b_7k8(rng, explicit):
    klo, khi = rng["k"]
    dlo, dhi = rng["du"]
    out = []
    if klo <= min(khi, 48):
        out.append(Piece("k<=48", expr_7k8(),
                         _box(("k", klo, min(khi, 48)), ("du", [7 * k_ + 8, dlo], dhi))))
    for k, th in SEVEN_K8_THRESHOLDS.items():
        if klo <= k <= khi:
            lo = max(7 * k + 8, dlo) if "du" in explicit else max(th, dlo)
            out.append(Piece(f"k={k}", expr_7k8(), _box(("k", k, k), ("du", lo, dhi))))
    return out


def _b_uexc(rng):
    lo, hi = rng["dR"]
    return [Piece("dprime<=du<dR", expr_uexc_g(),
                  _box(("dR", lo, hi), ("du", 6, dR_ - 1), ("dprime", 6, du_)))]


def _b_uexc_adm(rng):
    lo, hi = rng["dR"]
    return [
        Piece("16<=dprime<=49, du<=7dprime+3", expr_uexc_g(),
              _box(("dR", lo, hi), ("dprime", 16, [dR_ - 2, 49]), ("du", dp_, [dR_ - 1, 7 * dp_ + 3]))),
        Piece("dprime>=50", expr_uexc_g(),
              _box(("dR", lo, hi), ("dprime", 50, dR_ - 2), ("du", dp_, dR_ - 1))),
    ]


def _b_uexc53(rng):
    lo, hi = rng["dR"]
    g = expr_uexc_g()
    return [Piece("dprime=53", g, _box(("dprime", 53, 53), ("dR", max(lo, 53), hi), ("du", 53, dR_)))]


def _b_uexc53_diag(rng):
    lo, hi = rng["dR"]
    g = expr_uexc_g()
    # substitute du = dR by a one-parameter loop
    diag = Expr()
    for x, y, c in g.terms.values():
        sub = lambda L: None if L is None else _subst(L, "du", dR_)
        diag = diag + Expr([(sub(x), sub(y), _subst_poly(c, "du", "dR"))])
    return [Piece("du=dR, dprime=53", diag, _box(("dprime", 53, 53), ("dR", lo, hi)))]


def _subst(lin, name, rep):
    from .expr import Lin

    if name not in lin.coefs:
        return lin
    c = lin.coefs[name]
    rest = Lin(lin.const, {k: v for k, v in lin.coefs.items() if k != name}, 1)
    return (rest + c * rep) / lin.den


def _subst_poly(p, name, new):
    from .expr import Poly

    t: dict = {}
    for mono, c in p.terms.items():
        e: dict = {}
        for k, x in mono:
            k2 = new if k == name else k
            e[k2] = e.get(k2, 0) + x
        key = tuple(sorted(e.items()))
        t[key] = t.get(key, 0) + c
    return Poly(t)


def _single(expr_fn, name, label):
    def b(rng):
        return [Piece(label, expr_fn(), _box((name, *rng[name])))]
    return b


def _b_deg2root_bk(rng):
    return [Piece("k in {2,3}", expr_deg2root_bk_b1(), _box(("k", 2, 3), ("dR", *rng["dR"])))]


def _b_bexc_mod7(rng):
    lo, hi = rng["dR"]
    out = []
    for t in bexc_tuples():
        du = sum(t)
        start = max(lo, du + 1)
        k = 1 + 2 * t[0] + 5 * t[1] + 7 * t[2] + 9 * t[3]
        lab = f"(k1,k2,k3,k4)={t}, size {k}"
        if t == BEXC_SPECIAL:
            if start <= min(hi, 94):
                out.append(Piece(lab + ", dR<=94", expr_bexc_mod7(t), _box(("dR", start, min(hi, 94)))))
            if max(start, 95) <= hi:
                out.append(Piece(lab + ", B4+B5, dR>=95", expr_bexc_mod7(t, True),
                                 _box(("dR", max(start, 95), hi))))
        elif start <= hi:
            out.append(Piece(lab, expr_bexc_mod7(t), _box(("dR", start, hi))))
    return out


def _b_degk(rng):
    klo, khi = rng["k"]
    lo, hi = rng["dR"]
    out = []
    for k in range(klo, khi + 1):
        if k == 6:
            continue
        start = max(lo, 5 if k <= 5 else k)
        if start > hi:
            continue
        for ch in degk_children(k):
            lab = f"k={k}, " + "+".join(f"{c}x{n}" for n, c in ch)
            out.append(Piece(lab, expr_degk(k, ch), _box(("dR", start, hi))))
    return out


def _b_bk_size(expr_fn, kmin, dmin_off):
    def b(rng):
        klo, khi = rng["k"]
        return [Piece("D>=k+1" if dmin_off else "D>=5", expr_fn(),
                      _box(("k", max(klo, kmin), khi), ("D", [k_ + dmin_off, rng["D"][0]], rng["D"][1])))]
    return b


def _b_b5(rng):
    lo, hi = rng["du"]
    out = []
    for r in (2, 3):
        out.append(Piece(f"B{r} receives, dw -> inf", expr_b5_to_b4(r, True), _box(("du", lo, hi))))
        out.append(Piece(f"B{r} receives, dw >= du", expr_b5_to_b4(r, False),
                         _box(("du", lo, hi), ("D", du_, rng["D"][1]))))
    return out


def _b_b4root(rng):
    lo, hi = rng["dR"]
    out = [Piece("dR>=952, 16<=du<=107", expr_b4_to_root(),
                 _box(("j", 1, 4), ("dR", max(lo, 952), hi), ("du", 16, 107)))]
    if lo <= 951:
        out.append(Piece("dR<=951, 16<=du<=dR", expr_b4_to_root(),
                         _box(("j", 1, 4), ("dR", max(lo, 16), min(hi, 951)), ("du", 16, dR_))))
    return out


def _b_s323(rng):
    lo, hi = rng["dR"]
    slo, shi = rng["s"]
    slo += (1 - slo) % 7
    return [
        Piece("C141/C142 neighbours, dR>=2092", expr_s323_a(),
              _box(("s", slo, shi, 7), ("dR", max(lo, 2092), hi))),
        Piece("C52/C53 neighbours, dR>=2888", expr_s323_b(),
              _box(("s", slo, shi, 7), ("dR", max(lo, 2888), hi))),
    ]


def _mk(lemma_id, title, params, build, origin, notes=(), aux=False):
    return LemmaDef(lemma_id, title, tuple(params), build, origin, tuple(notes), aux)


P = Param
REGISTRY: dict[str, LemmaDef] = {}


def _reg(d: LemmaDef):
    REGISTRY[d.lemma_id] = d


_reg(_mk("kk-path", "Path of maximum degree vertices: lower bound in (k, m), 1 < m < k",
         [P("k", 4, CAP, 4, 100_000, full_hi=100_000)], _b_kk_path, "printed",
         ["k = 4 is checked only at m = 2", "default cap k <= 10^4; --full runs to 10^5"]))
_reg(_mk("dis2-deg6", "Vertices at distance 2 with degree >= 6: lower bound for 3 <= du <= dR",
         [P("dR", 3, 100, 3, CAP)], _b_dis2, "printed"))
_reg(_mk("ck-split", "Splitting C_k (odd k >= 143) into two halves",
         [P("k", 143, 199, 143, CAP), P("dR", 0, CAP, 0, CAP)], _b_ck, "printed"))
_reg(_mk("ck-split-even", "Splitting C_k for even k into halves of k/2 and k/2 - 1 sons",
         [P("k", 144, 198, 144, CAP), P("dR", 0, CAP, 0, CAP)], _b_ck_even, "derived",
         ["even variant: three B4 in the larger half"]))
_reg(_mk("compactify-52", "365 copies of C_k rebuilt as 7k + 1 copies of C_52",
         [P("k", 53, 142, 53, 142), P("du", 365, CAP, 365, CAP)], _b_compactify, "printed",
         ["range read as 53 <= k <= 142 (the inline text has the inequalities reversed)",
          "du = 365 is the case d = -1 where R does not exist"]))
_reg(_mk("7k8", "At most 7k + 7 copies of C_k below a vertex of degree du",
         [P("k", 1, 51, 1, 51), P("du", 0, CAP, 0, CAP)], None, "printed",
         ["k = 49, 50, 51 are swept from du = 474, 874, 3273"]))
_reg(_mk("uexc-g", "No U-exceptional branches: worst case g on 6 <= dprime <= du < dR <= 3271",
         [P("dR", 7, 3271, 7, CAP)], _b_uexc, "printed",
         ["the literal box includes small dprime with du much larger than dprime"]))
_reg(_mk("uexc-g-admissible", "g on dprime >= 16 and du <= 7 dprime + 3 for dprime <= 49, dR <= 3271",
         [P("dR", 18, 3271, 18, CAP)], _b_uexc_adm, "derived",
         ["dprime >= 16 by the degree-gap lemma; du <= 7 dprime + 3 from the 7k + 8 lemma"]))
_reg(_mk("uexc-g-d53", "g with dprime = 53 on 53 <= du <= dR <= 10^4",
         [P("dR", 53, CAP, 53, CAP)], _b_uexc53, "printed"))
_reg(_mk("uexc-g-d53-diag", "g with dprime = 53 and du = dR for 3272 <= dR <= 10^4",
         [P("dR", 3272, CAP, 54, CAP)], _b_uexc53_diag, "printed"))
_reg(_mk("k4-case1", "Degree-4 path vertices, first subcase: three B4-like branches",
         [P("dR", 4, CAP, 4, CAP)], _single(expr_k4_case1, "dR", "dR>=4"), "printed", aux=True))
_reg(_mk("deg2root-4xB1", "Four B1- at the root merged into one B3*",
         [P("dR", 12, CAP, 5, CAP)], _single(expr_deg2root_4b1, "dR", "dR>=12"), "printed", aux=True))
_reg(_mk("deg2root-bk-b1", "B_k (k = 2, 3) and a B1- at the root merged into B_{k+1}",
         [P("dR", 17, CAP, 3, CAP)], _b_deg2root_bk, "derived", aux=True,
         notes=["the degree-2 edge weights cancel; other root neighbours taken with degree 6"]))
_reg(_mk("b-exc-du13", "B-exceptional branch, smallest big child of degree 5",
         [P("du", 13, CAP, 2, CAP)], _single(expr_bexc_du13, "du", "du>=13"), "printed", aux=True))
_reg(_mk("b-exc-du15", "B-exceptional branch, smallest big child of degree <= 4",
         [P("du", 15, CAP, 8, CAP)], _single(expr_bexc_du15, "du", "du>=15"), "printed", aux=True))
_reg(_mk("b-exc-mod7", "B-exceptional branch replaced by B3 copies according to its size mod 7",
         [P("dR", 5, CAP, 5, CAP)], _b_bexc_mod7, "derived", aux=True,
         notes=["u has k1 + k2 + k3 + k4 sons and one father", "other neighbours of R have degree 3",
                "the size-20 tuple (2,3,0,0) uses B4 + B5 for dR >= 95"]))
_reg(_mk("b-exc-small-dr", "B3** with an expanded 2-2 edge replaced by B2 and B2*",
         [P("dR", 5, 8, 2, CAP)], _single(expr_bexc_small_dr, "dR", "5<=dR<=8"), "printed", aux=True))
_reg(_mk("bk-size-b6", "B_k with k >= 6 replaced by B_{k-4} and B3*",
         [P("k", 6, 1000, 6, CAP), P("D", 0, CAP, 0, CAP)], _b_bk_size(expr_bk_size_b6, 6, 1), "derived", aux=True))
_reg(_mk("bkstar-size", "B_k* with k >= 5 replaced by B_{k-3} and B3",
         [P("k", 5, 1000, 5, CAP), P("D", 0, CAP, 0, CAP)], _b_bk_size(expr_bkstar_size, 5, 1), "derived", aux=True))
_reg(_mk("b4star-to-b3ss", "B4* replaced by B3**",
         [P("D", 6, CAP, 2, CAP)], _single(expr_b4star_to_b3ss, "D", "D>=6"), "derived", aux=True))
_reg(_mk("degree-gap", "Non-root vertex of degree k replaced by B3 copies (k = 4, 5, 7..15)",
         [P("k", 4, 15, 4, 15), P("dR", 5, CAP, 5, CAP)], _b_degk, "reconstructed", aux=True,
         notes=["replacement by size mod 7; other neighbours of R have degree 3",
                "only the constraints k2 <= 11, k4 <= 4 and at most one starred branch are imposed"]))
_reg(_mk("b5-to-b4", "A B1- moved from a B5 to a B2 or B3 under a vertex of degree >= 16",
         [P("du", 16, CAP, 3, CAP), P("D", 0, CAP, 0, CAP)], _b_b5, "derived", aux=True))
_reg(_mk("b4-to-root", "B4 children of u (16 <= du <= 107) moved to a root of degree >= 952",
         [P("dR", 16, CAP, 16, CAP)], _b_b4root, "reconstructed", aux=True,
         notes=["u keeps children of degree 4; the root keeps 4 - j children of degree 5",
                "the bound du <= 107 itself is not re-derived"]))
_reg(_mk("s323-merge", "323 root B3 copies rebuilt as seven C_46",
         [P("dR", 2092, CAP, 1100, CAP), P("s", 323, 323, 8, 2000)], _b_s323, "printed", aux=True,
         notes=["second bound uses dR - 364 - s - 4 neighbours of degree 53 (the display drops s)"]))
_reg(_mk("s-zero-root-b3", "A root B3 merged into a C_52",
         [P("dR", 2948, CAP, 400, CAP)], _single(expr_s_zero_root_b3, "dR", "dR>=2948"), "printed", aux=True))

AUX_IDS = tuple(k for k, d in REGISTRY.items() if d.aux)


def lemma_ids() -> list[str]:
    return list(REGISTRY)


def _ranges(defn: LemmaDef, overrides: dict | None, full: bool):
    overrides = dict(overrides or {})
    rng = {}
    for p in defn.params:
        lo, hi = p.lo, (p.full_hi if full and p.full_hi else p.hi)
        if p.name in overrides:
            lo, hi = overrides.pop(p.name)
        if lo > hi:
            raise ValueError(f"empty range for {p.name}: {lo}..{hi}")
        if lo < p.cap_lo or hi > p.cap_hi:
            raise CapExceededError(f"{p.name} range {lo}..{hi} outside cap {p.cap_lo}..{p.cap_hi}")
        rng[p.name] = (int(lo), int(hi))
    if overrides:
        raise ValueError(f"unknown parameters for {defn.lemma_id}: {sorted(overrides)}")
    return rng


def pieces_for(lemma_id: str, ranges: dict | None = None, full: bool = False) -> list[Piece]:
    if lemma_id not in REGISTRY:
        raise UnknownLemmaError(lemma_id)
    d = REGISTRY[lemma_id]
    rng = _ranges(d, ranges, full)
    if lemma_id == "7k8":
        return _b_7k8(rng, set(ranges or ()))
    return d.build(rng)


# sweeps ---------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    lemma_id: str
    ranges: tuple = ()  # ((name, lo, hi), ...)
    full: bool = False
    escalate: bool = True
    escalate_below: float = ESCALATE_BELOW
    prec_bits: int = PREC_BITS
    keep: int = KEEP

    def range_dict(self) -> dict:
        return {n: (lo, hi) for n, lo, hi in self.ranges}


@dataclass
class SweepReport:
    lemma_id: str
    evaluations: int
    min_value: float
    argmin: dict | None
    status: str
    elapsed: float
    escalated: int = 0
    negative: int = 0
    inconclusive: int = 0
    first_negative: dict | None = None
    spot_check: dict = field(default_factory=dict)
    pieces: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    backend: str = ""

    def to_dict(self) -> dict:
        return {
            "lemma_id": self.lemma_id, "status": self.status, "evaluations": self.evaluations,
            "min_value": self.min_value, "argmin": self.argmin, "escalated": self.escalated,
            "negative": self.negative, "inconclusive": self.inconclusive,
            "first_negative": self.first_negative, "spot_check": self.spot_check,
            "pieces": self.pieces, "notes": self.notes, "backend": self.backend,
            "elapsed": self.elapsed,
        }


def _kernel(name: str):
    return py_kernels if name == "python" else kernels


def _run_part(backend: str, cp, part, nparts, esc, prec, keep, zero_tol):
    return _kernel(backend).sweep(cp, part, nparts, esc, prec, keep, zero_tol)


def _merge(results: list[dict], keep: int) -> dict:
    out = {"count": 0, "escalated": 0, "negative": 0, "inconclusive": 0, "invalid": 0,
           "min_value": math.inf, "argmin": None, "first_negative": None, "smallest": []}
    for r in results:
        for k in ("count", "escalated", "negative", "inconclusive", "invalid"):
            out[k] += int(r[k])
        if r["argmin"] is not None:
            key = (r["min_value"], tuple(r["argmin"]))
            if out["argmin"] is None or key < (out["min_value"], tuple(out["argmin"])):
                out["min_value"], out["argmin"] = float(r["min_value"]), tuple(r["argmin"])
        if r["first_negative"] is not None:
            fn = tuple(r["first_negative"])
            if out["first_negative"] is None or fn < out["first_negative"]:
                out["first_negative"] = fn
        out["smallest"].extend((float(a), float(v), tuple(p)) for a, v, p in r["smallest"])
    out["smallest"] = sorted(out["smallest"], key=lambda z: (z[0], z[2]))[:keep]
    return out


def _classify(v, zero_tol=ZERO_TOL) -> int:
    return 1 if v > zero_tol else (-1 if v < -zero_tol else 0)


def _workers(n: int | None) -> int:
    if n is None:
        n = int(os.environ.get("ABC_THREADS", "1") or 1)
    return max(1, int(n))


def _escalation_enabled(spec: SweepSpec) -> bool:
    env = os.environ.get("ABC_PRECISION_ESCALATION")
    if env is not None and env.strip().lower() in ("0", "off", "false", "no"):
        return False
    return spec.escalate


def sweep(spec: SweepSpec | str, workers: int | None = None, backend: str | None = None,
          parts: int | None = None) -> SweepReport:
    """Evaluate a registered lemma on its box and certify positivity.

    ``parts`` splits each piece into that many disjoint sub-boxes (default:
    the worker count); the report does not depend on it.
    """
    if isinstance(spec, str):
        spec = SweepSpec(spec)
    t0 = time.perf_counter()
    pieces = pieces_for(spec.lemma_id, spec.range_dict(), spec.full)
    defn = REGISTRY[spec.lemma_id]
    backend = backend or _backend.BACKEND
    nw = _workers(workers)
    nparts = parts or nw
    esc_on = _escalation_enabled(spec)
    esc = spec.escalate_below if esc_on else 0.0
    jobs = []
    compiled = []
    for pc in pieces:
        cp = compile_expr(pc.expr, pc.domain)
        compiled.append(cp)
        for part in range(nparts):
            jobs.append((len(compiled) - 1, (backend, cp, part, nparts, esc, spec.prec_bits, spec.keep, ZERO_TOL)))
    if nw > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=nw) as ex:
            futs = [(i, ex.submit(_run_part, *a)) for i, a in jobs]
            raw = [(i, f.result()) for i, f in futs]
    else:
        raw = [(i, _run_part(*a)) for i, a in jobs]

    piece_rows = []
    total = {"count": 0, "escalated": 0, "negative": 0, "inconclusive": 0, "invalid": 0}
    best = None
    first_neg = None
    smallest = []
    for idx, pc in enumerate(pieces):
        m = _merge([r for i, r in raw if i == idx], spec.keep)
        names = pc.domain.names
        for k in total:
            total[k] += m[k]
        am = dict(zip(names, m["argmin"])) if m["argmin"] is not None else None
        fn = dict(zip(names, m["first_negative"])) if m["first_negative"] is not None else None
        piece_rows.append({"label": pc.label, "evaluations": m["count"], "min_value": m["min_value"],
                           "argmin": am, "negative": m["negative"], "first_negative": fn,
                           "escalated": m["escalated"], "inconclusive": m["inconclusive"]})
        if m["argmin"] is not None and (best is None or m["min_value"] < best[0]):
            best = (m["min_value"], am, pc.label)
        if fn is not None and first_neg is None:
            first_neg = dict(fn, piece=pc.label)
        smallest.extend((a, v, p, idx) for a, v, p in m["smallest"])

    smallest.sort(key=lambda z: (z[0], z[3], z[2]))
    spot = _spot_check(smallest[: spec.keep], compiled, spec.prec_bits) if esc_on else {"checked": 0, "changed": 0}

    if total["count"] == 0:
        status = "inconclusive"
    elif total["negative"] > 0:
        status = "counterexample"
    elif total["inconclusive"] > 0 or total["invalid"] > 0 or spot["changed"] > 0:
        status = "inconclusive"
    elif not esc_on and best is not None and best[0] <= POSITIVE_ABOVE:
        status = "inconclusive"
    else:
        status = "verified"
    argmin = dict(best[1], piece=best[2]) if best else None
    return SweepReport(
        lemma_id=spec.lemma_id, evaluations=total["count"],
        min_value=best[0] if best else math.nan, argmin=argmin, status=status,
        elapsed=time.perf_counter() - t0, escalated=total["escalated"], negative=total["negative"],
        inconclusive=total["inconclusive"] + total["invalid"], first_negative=first_neg,
        spot_check=spot, pieces=piece_rows, notes=[f"{defn.origin} expression"] + list(defn.notes),
        backend=backend,
    )


def _spot_check(points, compiled, prec_bits) -> dict:
    """Re-evaluate the smallest-magnitude points at twice the precision."""
    if not points:
        return {"checked": 0, "changed": 0}
    dps1 = int(math.ceil(prec_bits * math.log10(2))) + 2
    dps2 = 2 * dps1
    changed = []
    for a, v, p, idx in points:
        cp = compiled[idx]
        lo = py_kernels.eval_point_mp(cp, p, dps1)
        hi = py_kernels.eval_point_mp(cp, p, dps2)
        if _classify(lo) != _classify(hi) or _classify(v) != _classify(hi):
            changed.append(list(p))
    return {"checked": len(points), "changed": len(changed), "changed_points": changed[:10],
            "digits": dps2}


# point evaluations ----------------------------------------------------------

_CACHE: dict[str, Expr] = {}


def _cached(name: str, fn) -> Expr:
    e = _CACHE.get(name)
    if e is None:
        e = _CACHE[name] = fn()
    return e


def _int(v, name):
    if isinstance(v, bool) or int(v) != v:
        raise DomainError(f"{name} must be an integer, got {v!r}")
    return int(v)


def delta_kk(k: int, m: int) -> float:
    """Lower bound on ABC(T) - ABC(T') along a path of degree-k vertices."""
    k, m = _int(k, "k"), _int(m, "m")
    if not 1 < m < k:
        raise DomainError(f"need 1 < m < k, got k={k}, m={m}")
    return _cached("kk_path", expr_kk_path).eval({"k": k, "m": m})


def delta_dis2(dR: int, du: int) -> float:
    dR, du = _int(dR, "dR"), _int(du, "du")
    if not 3 <= du <= dR:
        raise DomainError(f"need 3 <= du <= dR, got du={du}, dR={dR}")
    return _cached("dis2", expr_dis2).eval({"dR": dR, "du": du})


def delta_ck_split(k: int, dR: int) -> float:
    """Split of a C_k branch; odd k uses the displayed bound, even k the analogous split."""
    k, dR = _int(k, "k"), _int(dR, "dR")
    if k < 143 or dR < k:
        raise DomainError(f"need k >= 143 and dR >= k, got k={k}, dR={dR}")
    if k % 2:
        return _cached("ck", expr_ck_split).eval({"k": k, "dR": dR})
    return _cached("ck_even", expr_ck_split_even).eval({"h": k // 2, "dR": dR})


def delta_compactify(k: int, du: int) -> float:
    k, du = _int(k, "k"), _int(du, "du")
    if not (53 <= k <= 142 and du >= 365):
        raise DomainError(f"need 53 <= k <= 142 and du >= 365, got k={k}, du={du}")
    return _cached("c52", expr_compactify).eval({"k": k, "du": du})


def delta_7k8(k: int, du: int) -> float:
    k, du = _int(k, "k"), _int(du, "du")
    if not (1 <= k <= 51 and du >= 7 * k + 8):
        raise DomainError(f"need 1 <= k <= 51 and du >= 7k+8, got k={k}, du={du}")
    return _cached("7k8", expr_7k8).eval({"k": k, "du": du})


def delta_uexc(dR: int, du: int, dprime: int, m: int | None = None) -> float:
    """Worst-case bound for a U-exceptional branch; m defaults to du - 3."""
    dR, du, dprime = _int(dR, "dR"), _int(du, "du"), _int(dprime, "dprime")
    if not 6 <= dprime <= du <= dR:
        raise DomainError(f"need 6 <= dprime <= du <= dR, got {dprime}, {du}, {dR}")
    env = {"dR": dR, "du": du, "dprime": dprime}
    if m is None:
        return _cached("uexc_g", expr_uexc_g).eval(env)
    m = _int(m, "m")
    if not 0 <= m <= du - 3:
        raise DomainError(f"need 0 <= m <= du - 3, got m={m}")
    env["m"] = m
    return _cached("uexc_m", expr_uexc_m).eval(env)


def aux_deltas(lemma_id: str, **params) -> float:
    """Value of an auxiliary registered expression at one point.

    Composition families take extra keywords: ``tuple`` for b-exc-mod7 and
    ``k``/``children`` for degree-gap.
    """
    if lemma_id not in REGISTRY or not REGISTRY[lemma_id].aux:
        raise UnknownLemmaError(lemma_id)
    p = dict(params)
    if lemma_id == "b-exc-mod7":
        t = tuple(p.pop("tuple"))
        if t not in set(bexc_tuples()):
            raise DomainError(f"{t} is not an admissible (k1,k2,k3,k4)")
        dR = _int(p["dR"], "dR")
        if dR < sum(t) + 1:
            raise DomainError("dR must be at least the degree of u")
        return expr_bexc_mod7(t, t == BEXC_SPECIAL and dR >= 95).eval({"dR": dR})
    if lemma_id == "degree-gap":
        k = _int(p["k"], "k")
        ch = tuple(sorted(tuple(x) for x in p["children"]))
        valid = {tuple(sorted(c)) for c in degk_children(k)} if k in (4, 5, *range(7, 16)) else set()
        if ch not in valid:
            raise DomainError(f"children {ch} not admissible for degree {k}")
        dR = _int(p["dR"], "dR")
        if dR < max(5, k):
            raise DomainError("dR too small")
        return expr_degk(k, ch).eval({"dR": dR})
    pieces = pieces_for(lemma_id)
    env = {k: _int(v, k) for k, v in p.items()}
    for pc in pieces:
        names = pc.domain.names
        if set(names) - set(env) - {"s"}:
            continue
        e = dict(env)
        if "s" in names and "s" not in e:
            e["s"] = 323
        if _in_domain(pc.domain, e):
            return pc.expr.eval(e)
    raise DomainError(f"{params} outside the domain of {lemma_id}")


def _in_domain(dom: Domain, env: dict) -> bool:
    sub: dict = {}
    for lvl, name in enumerate(dom.names):
        if name not in env or env[name] not in dom.range_of(lvl, sub):
            return False
        sub[name] = env[name]
    return True
