"""Trees, the ABC edge weight and the recursive ordering of rooted trees.

A tree on ``n`` vertices is stored as an edge list over ids ``0..n-1``.
Rooted trees carry parent and ordered child arrays.  The ordering of rooted
trees compares root child counts first and then the descending-sorted child
subtrees lexicographically.  ``canonical_code`` encodes exactly this order as
bytes: the preorder list of child counts, children visited in descending
order, each count written as a big-endian 32-bit integer.  The encoding is
prefix-free, so plain byte comparison agrees with the tree order.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Tree",
    "RootedTree",
    "DegreeSequence",
    "InvalidTreeError",
    "edge_weight",
    "abc_index",
    "abc_from_degrees",
    "degree_sequence",
    "root_at",
    "root_by_max_degree",
    "subtree_codes",
    "canonical_code",
    "free_code",
    "compare_subtrees",
    "path_tree",
    "star_tree",
]


class InvalidTreeError(ValueError):
    """Raised when an edge list does not describe a tree."""


def edge_weight(x: int, y: int) -> float:
    """f(x, y) = sqrt((x + y - 2) / (x y)) for vertex degrees x, y >= 1."""
    if x <= 0 or y <= 0:
        raise ValueError(f"degrees must be positive, got ({x}, {y})")
    return math.sqrt((x + y - 2) / (x * y))


class Tree:
    """Undirected labelled tree on vertices ``0..n-1``."""

    __slots__ = ("n", "edges", "_adj", "_deg")

    def __init__(self, n: int, edges: Iterable[Sequence[int]], validate: bool = True):
        self.n = int(n)
        self.edges = tuple((int(u), int(v)) for u, v in edges)
        self._adj = None
        self._deg = None
        if validate:
            self._validate()

    def _validate(self) -> None:
        n = self.n
        if n < 1:
            raise InvalidTreeError("a tree needs at least one vertex")
        if len(self.edges) != n - 1:
            raise InvalidTreeError(f"expected {n - 1} edges, got {len(self.edges)}")
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidTreeError(f"edge ({u}, {v}) has an id outside 0..{n - 1}")
            if u == v:
                raise InvalidTreeError(f"self-loop at {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise InvalidTreeError(f"repeated edge {key}")
            seen.add(key)
        # n-1 distinct edges plus connectivity implies a tree
        adj = self.adj
        mark = bytearray(n)
        mark[0] = 1
        stack = [0]
        count = 1
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not mark[w]:
                    mark[w] = 1
                    count += 1
                    stack.append(w)
        if count != n:
            raise InvalidTreeError("edge list is not connected")

    @property
    def adj(self) -> list[list[int]]:
        if self._adj is None:
            adj: list[list[int]] = [[] for _ in range(self.n)]
            for u, v in self.edges:
                adj[u].append(v)
                adj[v].append(u)
            self._adj = adj
        return self._adj

    @property
    def degrees(self) -> np.ndarray:
        if self._deg is None:
            deg = np.zeros(self.n, dtype=np.int64)
            if self.edges:
                e = np.asarray(self.edges, dtype=np.int64)
                np.add.at(deg, e[:, 0], 1)
                np.add.at(deg, e[:, 1], 1)
            self._deg = deg
        return self._deg

    @classmethod
    def from_parents(cls, parents: Sequence[int], validate: bool = True) -> "Tree":
        """Build from a parent array; the root has parent -1."""
        edges = [(p, v) for v, p in enumerate(parents) if p >= 0]
        return cls(len(parents), edges, validate=validate)

    def relabel(self, perm: Sequence[int]) -> "Tree":
        """Return the tree with vertex v renamed to perm[v]."""
        return Tree(self.n, [(perm[u], perm[v]) for u, v in self.edges])

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        norm = lambda es: sorted((min(e), max(e)) for e in es)
        return self.n == other.n and norm(self.edges) == norm(other.edges)

    def __hash__(self) -> int:
        return hash((self.n, tuple(sorted((min(e), max(e)) for e in self.edges))))

    def __repr__(self) -> str:
        return f"Tree(n={self.n}, edges={list(self.edges)!r})"


def path_tree(n: int) -> Tree:
    return Tree(n, [(i, i + 1) for i in range(n - 1)])


def star_tree(n: int) -> Tree:
    """Star K_{1,n-1} centred at vertex 0."""
    return Tree(n, [(0, i) for i in range(1, n)])


def abc_from_degrees(deg: np.ndarray, edges: np.ndarray) -> float:
    """Vectorised ABC sum for an (m, 2) edge array and a degree vector."""
    if len(edges) == 0:
        return 0.0
    x = deg[edges[:, 0]].astype(np.float64)
    y = deg[edges[:, 1]].astype(np.float64)
    return float(np.sum(np.sqrt((x + y - 2.0) / (x * y))))


def abc_index(t: Tree) -> float:
    """Sum of f(d_u, d_v) over the edges of ``t``."""
    if t.n <= 2:
        return 0.0
    deg = t.degrees
    return math.fsum(edge_weight(int(deg[u]), int(deg[v])) for u, v in t.edges)


@dataclass(frozen=True)
class DegreeSequence:
    """Non-increasing degree list of a tree."""

    degrees: tuple[int, ...]

    def __post_init__(self):
        d = tuple(int(x) for x in self.degrees)
        object.__setattr__(self, "degrees", d)
        if len(d) < 2:
            raise ValueError("a degree sequence needs at least two entries")
        if any(x < 1 for x in d):
            raise ValueError("degrees must be >= 1")
        if any(d[i] < d[i + 1] for i in range(len(d) - 1)):
            raise ValueError("degrees must be non-increasing")
        if sum(d) != 2 * (len(d) - 1):
            raise ValueError(f"degree sum {sum(d)} != 2(n-1) = {2 * (len(d) - 1)}")

    @classmethod
    def of(cls, degrees: Iterable[int]) -> "DegreeSequence":
        return cls(tuple(sorted((int(x) for x in degrees), reverse=True)))

    @property
    def n(self) -> int:
        return len(self.degrees)

    def __iter__(self):
        return iter(self.degrees)

    def __len__(self):
        return len(self.degrees)


def degree_sequence(t: Tree) -> DegreeSequence:
    if t.n < 2:
        raise ValueError("degree sequences need n >= 2")
    return DegreeSequence.of(t.degrees.tolist())


@dataclass
class RootedTree:
    """A tree with a distinguished root, parent array and ordered child lists."""

    tree: Tree
    root: int
    parent: list[int]
    children: list[list[int]]
    _codes: list[bytes] | None = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.tree.n

    def order(self) -> list[int]:
        """Vertices in breadth-first order from the root."""
        out = [self.root]
        i = 0
        while i < len(out):
            out.extend(self.children[out[i]])
            i += 1
        return out

    def heights(self) -> list[int]:
        h = [0] * self.n
        for v in self.order():
            for c in self.children[v]:
                h[c] = h[v] + 1
        return h

    def codes(self) -> list[bytes]:
        """Canonical code of every rooted subtree T_v (cached)."""
        if self._codes is None:
            self._codes = subtree_codes(self.children, self.order())
        return self._codes

    def subtree_vertices(self, v: int) -> list[int]:
        out = [v]
        i = 0
        while i < len(out):
            out.extend(self.children[out[i]])
            i += 1
        return out

    def sorted_children(self) -> "RootedTree":
        """Same rooted tree with every child list sorted descending by code."""
        codes = self.codes()
        ch = [_stable_desc(c, codes) for c in self.children]
        return RootedTree(self.tree, self.root, list(self.parent), ch, codes)

    def is_ancestor(self, a: int, b: int) -> bool:
        """True when a is b or an ancestor of b."""
        while b != -1:
            if b == a:
                return True
            b = self.parent[b]
        return False


def _stable_desc(vs: Sequence[int], codes: list[bytes]) -> list[int]:
    # descending code; equal codes keep ascending ids (sort is stable)
    return sorted(sorted(vs), key=codes.__getitem__, reverse=True)


_PACK = struct.Struct(">I").pack


def subtree_codes(children: Sequence[Sequence[int]], bfs_order: Sequence[int]) -> list[bytes]:
    """Codes of all rooted subtrees, computed bottom-up without recursion."""
    codes: list[bytes] = [b""] * len(children)
    for v in reversed(bfs_order):
        ch = children[v]
        if ch:
            parts = sorted((codes[c] for c in ch), reverse=True)
            codes[v] = _PACK(len(ch)) + b"".join(parts)
        else:
            codes[v] = _PACK(0)
    return codes


def root_at(t: Tree, root: int, sort_children: bool = True) -> RootedTree:
    """Root ``t`` at ``root``; child lists sorted descending by code by default."""
    n = t.n
    adj = t.adj
    parent = [-1] * n
    children: list[list[int]] = [[] for _ in range(n)]
    order = [root]
    seen = bytearray(n)
    seen[root] = 1
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for w in adj[u]:
            if not seen[w]:
                seen[w] = 1
                parent[w] = u
                children[u].append(w)
                order.append(w)
    codes = subtree_codes(children, order)
    if sort_children:
        children = [_stable_desc(c, codes) for c in children]
    return RootedTree(t, root, parent, children, codes)


def canonical_code(r: RootedTree) -> bytes:
    """Isomorphism key of a rooted tree, ordered consistently with compare_subtrees."""
    return r.codes()[r.root]


def compare_subtrees(a: RootedTree, b: RootedTree) -> int:
    """Return 1 if a is larger than b in the tree order, -1 if smaller, 0 if isomorphic."""
    ca, cb = canonical_code(a), canonical_code(b)
    return (ca > cb) - (ca < cb)


def root_by_max_degree(t: Tree) -> RootedTree:
    """Root at a maximum-degree vertex, preferring the larger rooted code, then the smaller id."""
    if t.n == 1:
        return root_at(t, 0)
    deg = t.degrees
    dmax = int(deg.max())
    best = None
    best_code = None
    for v in np.flatnonzero(deg == dmax).tolist():
        r = root_at(t, v)
        c = canonical_code(r)
        if best is None or c > best_code:
            best, best_code = r, c
    return best


def free_code(t: Tree) -> bytes:
    """Isomorphism key of a free tree: the largest rooted code over the centre(s)."""
    n = t.n
    if n <= 2:
        return canonical_code(root_at(t, 0))
    deg = t.degrees.copy()
    leaves = [v for v in range(n) if deg[v] == 1]
    remaining = n
    adj = t.adj
    while remaining > 2:
        remaining -= len(leaves)
        nxt = []
        for v in leaves:
            deg[v] = 0
            for w in adj[v]:
                if deg[w] > 0:
                    deg[w] -= 1
                    if deg[w] == 1:
                        nxt.append(w)
        leaves = nxt
    return max(canonical_code(root_at(t, c)) for c in leaves)
