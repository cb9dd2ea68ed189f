"""Branch vocabulary of extremal ABC trees and root-plus-branches families.

A family tree is a root joined to the roots of a multiset of branches:

* ``B1-``  a pendant path with two vertices,
* ``B(k)`` a vertex with k sons of degree 2, each carrying one leaf,
* ``B*(k)`` a ``B(k)`` with one leaf extended, which creates a 2-2 edge,
* ``B3**`` a vertex with two ``B1-`` sons and one ``B(2)`` son,
* ``C(b3, extras)`` a vertex whose sons are ``b3`` copies of ``B(3)`` plus extras.

Every edge inside a branch has an endpoint whose degree does not depend on
where the branch is attached, except the edge to the root.  So the ABC index
of a family tree is sum over branches of ``f(D, d) + internal``, where ``D`` is
the root degree and ``d`` the degree of the branch root.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .graph import (
    RootedTree,
    Tree,
    abc_from_degrees,
    canonical_code,
    edge_weight,
    root_at,
    root_by_max_degree,
)

__all__ = [
    "BranchKind",
    "FamilyConfig",
    "B1Minus",
    "B",
    "BStar",
    "B3StarStar",
    "C",
    "build_branch",
    "assemble",
    "closed_form_abc",
    "recognize",
    "config_to_json",
    "config_from_json",
    "ConstraintError",
]

R2 = math.sqrt(2.0) / 2.0
_STAR_KINDS = ("B*", "B3**")


class ConstraintError(ValueError):
    """A family configuration violates the catalog rules."""


@dataclass(frozen=True, order=True)
class BranchKind:
    """One branch shape.  ``extras`` is a sorted tuple of (BranchKind, count)."""

    kind: str
    k: int = 0
    b3: int = 0
    extras: tuple = ()

    def __post_init__(self):
        if self.kind not in ("B1-", "B", "B*", "B3**", "C"):
            raise ValueError(f"unknown branch kind {self.kind!r}")
        if self.kind == "C":
            merged: dict[BranchKind, int] = {}
            for kd, c in self.extras:
                if c < 0:
                    raise ValueError("negative extra count")
                if c:
                    merged[kd] = merged.get(kd, 0) + int(c)
            object.__setattr__(self, "extras", tuple(sorted(merged.items())))
            if self.b3 < 0:
                raise ValueError("negative B3 count")
            if self.b3 + sum(c for _, c in self.extras) == 0:
                raise ValueError("a C-branch needs at least one son")
            for kd, _ in self.extras:
                if kd.kind == "C":
                    raise ValueError("C-branches cannot nest")

    # structural numbers ---------------------------------------------------
    @property
    def size(self) -> int:
        return _size(self)

    @property
    def sons(self) -> int:
        """Number of children of the branch root."""
        if self.kind == "B1-":
            return 1
        if self.kind in ("B", "B*"):
            return self.k
        if self.kind == "B3**":
            return 3
        return self.b3 + sum(c for _, c in self.extras)

    @property
    def degree(self) -> int:
        """Degree of the branch root once attached to a parent."""
        return self.sons + 1

    @property
    def internal(self) -> float:
        """ABC contribution of all edges below the branch root."""
        return _internal(self)

    def is_c(self) -> bool:
        return self.kind == "C"

    def label(self) -> str:
        if self.kind == "B1-":
            return "B1-"
        if self.kind == "B":
            return f"B{self.k}"
        if self.kind == "B*":
            return f"B{self.k}*"
        if self.kind == "B3**":
            return "B3**"
        ex = "".join(f"+{c}x{kd.label()}" for kd, c in self.extras)
        return f"C{self.b3}{ex}"

    def __repr__(self) -> str:
        return self.label()


def B1Minus() -> BranchKind:
    return BranchKind("B1-")


def B(k: int, unrestricted: bool = False) -> BranchKind:
    if k < 1 or (k > 5 and not unrestricted):
        raise ValueError(f"B(k) needs 1 <= k <= 5, got {k}")
    return BranchKind("B", k=k)


def BStar(k: int, unrestricted: bool = False) -> BranchKind:
    if (k not in (2, 3)) and not (unrestricted and k >= 1):
        raise ValueError(f"B*(k) needs k in (2, 3), got {k}")
    return BranchKind("B*", k=k)


def B3StarStar() -> BranchKind:
    return BranchKind("B3**")


def C(b3: int, extras: Iterable = (), unrestricted: bool = False) -> BranchKind:
    ex = []
    for item in extras:
        if isinstance(item, BranchKind):
            ex.append((item, 1))
        else:
            ex.append((item[0], int(item[1])))
    kind = BranchKind("C", b3=b3, extras=tuple(ex))
    if not unrestricted:
        _check_c_extras(kind)
    return kind


def _check_c_extras(kind: BranchKind) -> None:
    n_b2 = 0
    special = 0
    for kd, c in kind.extras:
        if kd == BranchKind("B", k=2):
            n_b2 += c
        elif kd.kind in ("B*", "B3**") or (kd.kind == "B" and kd.k in (4, 5)):
            special += c
        else:
            raise ConstraintError(f"{kd.label()} is not an allowed C-branch extra")
    if n_b2 > 11:
        raise ConstraintError("a C-branch carries at most 11 B2 extras")
    if special > 1:
        raise ConstraintError("a C-branch carries at most one of B2*, B3*, B3**, B4, B5")


@lru_cache(maxsize=None)
def _size(kind: BranchKind) -> int:
    if kind.kind == "B1-":
        return 2
    if kind.kind == "B":
        return 1 + 2 * kind.k
    if kind.kind == "B*":
        return 2 + 2 * kind.k
    if kind.kind == "B3**":
        return 10
    return 1 + 7 * kind.b3 + sum(c * _size(kd) for kd, c in kind.extras)


@lru_cache(maxsize=None)
def _internal(kind: BranchKind) -> float:
    if kind.kind == "B1-":
        return R2
    if kind.kind == "B":
        return 2 * kind.k * R2
    if kind.kind == "B*":
        return (2 * kind.k + 1) * R2
    if kind.kind == "B3**":
        return 8 * R2 + edge_weight(4, 3)
    d = kind.degree
    b3 = B(3)
    total = kind.b3 * (edge_weight(d, 4) + _internal(b3))
    for kd, c in kind.extras:
        total += c * (edge_weight(d, kd.degree) + _internal(kd))
    return total


# rooted shapes --------------------------------------------------------------

def _branch_parents(kind: BranchKind) -> list[int]:
    """Parent array of the branch with its root at index 0 (root parent -1)."""
    par = [-1]

    def add(p: int) -> int:
        par.append(p)
        return len(par) - 1

    def grow(kd: BranchKind, at: int) -> None:
        if kd.kind == "B1-":
            add(at)
        elif kd.kind in ("B", "B*"):
            for i in range(kd.k):
                a = add(at)
                leaf = add(a)
                if kd.kind == "B*" and i == 0:
                    add(leaf)
        elif kd.kind == "B3**":
            for _ in range(2):
                grow(BranchKind("B1-"), add(at))
            grow(BranchKind("B", k=2), add(at))
        else:
            for _ in range(kd.b3):
                grow(BranchKind("B", k=3), add(at))
            for sub, c in kd.extras:
                for _ in range(c):
                    grow(sub, add(at))

    grow(kind, 0)
    return par


@lru_cache(maxsize=256)
def _template(kind: BranchKind) -> np.ndarray:
    par = _branch_parents(kind)
    return np.array([(p, v) for v, p in enumerate(par) if p >= 0], dtype=np.int64).reshape(-1, 2)


def build_branch(kind: BranchKind) -> RootedTree:
    """The branch as a rooted tree with root 0 (root degree = number of sons)."""
    edges = _template(kind)
    t = Tree(kind.size, edges.tolist())
    return root_at(t, 0)


@lru_cache(maxsize=256)
def _attached_code(kind: BranchKind) -> bytes:
    return canonical_code(build_branch(kind))


# family configurations ------------------------------------------------------

@dataclass(frozen=True)
class FamilyConfig:
    """Multiset of branches attached to a common root."""

    branches: tuple

    def __post_init__(self):
        merged: dict[BranchKind, int] = {}
        for kd, c in self.branches:
            if c < 0:
                raise ValueError("negative branch count")
            if c:
                merged[kd] = merged.get(kd, 0) + int(c)
        ordered = sorted(merged.items(), key=lambda kc: _attached_code(kc[0]), reverse=True)
        object.__setattr__(self, "branches", tuple(ordered))

    @classmethod
    def of(cls, *items) -> "FamilyConfig":
        out = []
        for it in items:
            out.append((it, 1) if isinstance(it, BranchKind) else (it[0], int(it[1])))
        return cls(tuple(out))

    @property
    def n(self) -> int:
        return 1 + sum(c * kd.size for kd, c in self.branches)

    @property
    def root_degree(self) -> int:
        return sum(c for _, c in self.branches)

    def count(self, kind: BranchKind) -> int:
        return dict(self.branches).get(kind, 0)

    def c_branches(self) -> list[tuple[BranchKind, int]]:
        return [(kd, c) for kd, c in self.branches if kd.is_c()]

    @property
    def r(self) -> int:
        return sum(c for kd, c in self.branches if kd.is_c())

    @property
    def s(self) -> int:
        return self.count(BranchKind("B", k=3))

    def totals(self) -> dict[str, int]:
        """Counts of each B-type kind over the whole tree, inside C-branches too."""
        tot: dict[str, int] = {}
        for kd, c in self.branches:
            if kd.is_c():
                tot["B3"] = tot.get("B3", 0) + c * kd.b3
                for sub, cc in kd.extras:
                    tot[sub.label()] = tot.get(sub.label(), 0) + c * cc
            else:
                tot[kd.label()] = tot.get(kd.label(), 0) + c
        return tot

    def check_constraints(self) -> list[str]:
        """Violated catalog rules (empty when the config obeys them)."""
        bad = []
        tot = self.totals()
        if tot.get("B2", 0) > 11:
            bad.append("more than 11 B2 branches")
        if tot.get("B4", 0) > 4:
            bad.append("more than 4 B4 branches")
        if tot.get("B5", 0) > 1:
            bad.append("more than one B5 branch")
        if tot.get("B2*", 0) + tot.get("B3*", 0) + tot.get("B3**", 0) > 1:
            bad.append("more than one starred or B3** branch")
        if tot.get("B1-", 0) > 3:
            bad.append("more than 3 B1- branches")
        for kd, _ in self.branches:
            if kd.kind == "B" and kd.k > 5:
                bad.append(f"{kd.label()} is too large")
            if kd.kind == "B*" and kd.k not in (2, 3):
                bad.append(f"{kd.label()} is not allowed")
            if kd.is_c():
                try:
                    _check_c_extras(kd)
                except ConstraintError as e:
                    bad.append(str(e))
        cs = self.c_branches()
        irregular = sum(c for kd, c in cs if kd.extras)
        plain = sorted({kd.b3 for kd, c in cs if not kd.extras})
        if irregular > 1:
            bad.append("more than one irregular C-branch")
        if plain and plain[-1] - plain[0] > 1:
            # one plain C-branch may play the irregular role
            counts = {kd.b3: c for kd, c in cs if not kd.extras}
            ok = False
            if irregular == 0 and len(plain) >= 2:
                for out in (plain[0], plain[-1]):
                    rest = [b for b in plain if b != out]
                    if counts[out] == 1 and rest[-1] - rest[0] <= 1:
                        ok = True
            if not ok:
                bad.append("C-branch B3 counts differ by more than one")
        return bad

    def describe(self) -> str:
        return " + ".join(f"{c}x{kd.label()}" for kd, c in self.branches)


def assemble(config: FamilyConfig) -> Tree:
    """Root 0 joined to every branch root; branches laid out in descending order."""
    if not config.branches:
        raise ValueError("empty configuration")
    n = config.n
    parts = []
    offset = 1
    for kd, c in config.branches:
        tmpl = _template(kd)
        size = kd.size
        for _ in range(c):
            parts.append(np.array([[0, offset]], dtype=np.int64))
            if len(tmpl):
                parts.append(tmpl + offset)
            offset += size
    edges = np.concatenate(parts)
    return Tree(n, edges.tolist(), validate=n <= 20000)


def closed_form_abc(config: FamilyConfig) -> float:
    """ABC index of ``assemble(config)`` without building the tree."""
    d = config.root_degree
    if config.n == 2:
        return 0.0
    return math.fsum(c * (edge_weight(d, kd.degree) + kd.internal) for kd, c in config.branches)


def recognize(t: Tree) -> FamilyConfig | None:
    """Inverse of ``assemble`` up to isomorphism, or None when ``t`` is not a family tree."""
    if t.n < 3:
        return None
    r = root_by_max_degree(t)
    cfg = _recognize_at(r)
    if cfg is not None:
        return cfg
    # the family root need not have maximum degree (e.g. a single C-branch)
    tried = {r.root}
    candidates = list(t.adj[r.root])
    if t.n <= 2000:
        candidates += range(t.n)
    for v in candidates:
        if v in tried:
            continue
        tried.add(v)
        cfg = _recognize_at(root_at(t, v))
        if cfg is not None:
            return cfg
    return None


def _recognize_at(r: RootedTree) -> FamilyConfig | None:
    codes = r.codes()
    table = _b_codes()
    out: dict[BranchKind, int] = {}
    for v in r.children[r.root]:
        kd = table.get(codes[v])
        if kd is None:
            kd = _recognize_c(r, v, codes, table)
            if kd is None:
                return None
        out[kd] = out.get(kd, 0) + 1
    return FamilyConfig(tuple(out.items()))


@lru_cache(maxsize=1)
def _b_codes() -> dict[bytes, BranchKind]:
    kinds = [B1Minus(), B3StarStar()] + [B(k) for k in range(1, 6)] + [BStar(2), BStar(3)]
    return {_attached_code(kd): kd for kd in kinds}


def _recognize_c(r: RootedTree, v: int, codes, table) -> BranchKind | None:
    b3 = 0
    extras: dict[BranchKind, int] = {}
    b3kind = BranchKind("B", k=3)
    for w in r.children[v]:
        kd = table.get(codes[w])
        if kd is None or kd.kind == "B1-" or kd == BranchKind("B", k=1):
            return None
        if kd == b3kind:
            b3 += 1
        else:
            extras[kd] = extras.get(kd, 0) + 1
    if b3 + sum(extras.values()) == 0:
        return None
    return BranchKind("C", b3=b3, extras=tuple(extras.items()))


def family_abc_numeric(config: FamilyConfig) -> float:
    """Vectorised ``abc_index(assemble(config))`` for large trees."""
    t = assemble(config)
    return abc_from_degrees(t.degrees, np.asarray(t.edges, dtype=np.int64))


# JSON ----------------------------------------------------------------------

def _kind_to_json(kd: BranchKind) -> dict:
    if kd.kind == "B1-":
        return {"kind": "B1-"}
    if kd.kind in ("B", "B*"):
        return {"kind": kd.kind, "k": kd.k}
    if kd.kind == "B3**":
        return {"kind": "B3**"}
    return {
        "kind": "C",
        "b3": kd.b3,
        "extras": [dict(_kind_to_json(sub), count=c) for sub, c in kd.extras],
    }


def _kind_from_json(obj: dict) -> BranchKind:
    kind = obj.get("kind")
    if kind in ("B1-", "B1Minus"):
        return B1Minus()
    if kind == "B":
        return BranchKind("B", k=int(obj["k"]))
    if kind in ("B*", "BStar"):
        return BranchKind("B*", k=int(obj["k"]))
    if kind in ("B3**", "B3StarStar"):
        return B3StarStar()
    if kind == "C":
        ex = [(_kind_from_json(e), int(e.get("count", 1))) for e in obj.get("extras", [])]
        return BranchKind("C", b3=int(obj.get("b3", 0)), extras=tuple(ex))
    raise ValueError(f"unknown branch kind {kind!r}")


def config_to_json(config: FamilyConfig) -> dict:
    return {"branches": [dict(_kind_to_json(kd), count=c) for kd, c in config.branches]}


def config_from_json(obj: dict) -> FamilyConfig:
    items = [(_kind_from_json(b), int(b.get("count", 1))) for b in obj["branches"]]
    if not items:
        raise ValueError("empty configuration")
    return FamilyConfig(tuple(items))
