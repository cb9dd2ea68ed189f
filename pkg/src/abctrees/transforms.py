"""Subtree exchanges, similarity exchanges and a local search over improvement moves.

Every move is an edge edit: remove some edges, add others, keep the vertex
set.  ABC changes are computed locally from the edges around the touched
vertices, so one candidate costs O(degree).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .branches import C, _attached_code, build_branch
from .graph import RootedTree, Tree, abc_index, edge_weight, root_at, root_by_max_degree

__all__ = [
    "MOVE_KINDS",
    "Move",
    "exchange",
    "exchange_delta",
    "legal_similarity",
    "improving_move",
    "apply_move",
    "local_search",
    "extremal_canonicalize",
    "p1_violations",
]

MOVE_KINDS = ("subtree_exchange", "b_rebalance", "c_split", "compactify_365", "b1_merge",
              "contract_to_leafpath")
STRICT = 1e-12


@dataclass(frozen=True)
class Move:
    kind: str
    params: dict = field(default_factory=dict)
    remove: tuple = ()
    add: tuple = ()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params,
                "remove": [list(e) for e in self.remove], "add": [list(e) for e in self.add]}


# exchange -------------------------------------------------------------------

def _check_pair(t: RootedTree, v: int, v2: int) -> tuple[int, int]:
    for x in (v, v2):
        if not 0 <= x < t.n:
            raise ValueError(f"vertex {x} out of range")
        if x == t.root:
            raise ValueError("the root cannot be exchanged")
    if t.is_ancestor(v, v2) or t.is_ancestor(v2, v):
        raise ValueError(f"{v} and {v2} are in ancestor relation")
    return t.parent[v], t.parent[v2]


def exchange(t: RootedTree, v: int, v2: int) -> RootedTree:
    """T(v, v2): hang T_v under the father of v2 and T_v2 under the father of v."""
    u, u2 = _check_pair(t, v, v2)
    drop = {(u, v), (v, u), (u2, v2), (v2, u2)}
    edges = [e for e in t.tree.edges if e not in drop] + [(u, v2), (u2, v)]
    return root_at(Tree(t.n, edges, validate=False), t.root)


def exchange_delta(t: RootedTree, v: int, v2: int) -> float:
    """ABC(T(v, v2)) - ABC(T); degrees do not change, so only two edges do."""
    u, u2 = _check_pair(t, v, v2)
    d = t.tree.degrees
    du, du2, dv, dv2 = (int(d[x]) for x in (u, u2, v, v2))
    return (edge_weight(du, dv2) + edge_weight(du2, dv)
            - edge_weight(du, dv) - edge_weight(du2, dv2))


def legal_similarity(t: RootedTree, v: int, v2: int) -> bool:
    """True when the fathers or the exchanged roots have equal degrees."""
    u, u2 = _check_pair(t, v, v2)
    d = t.tree.degrees
    return bool(d[u] == d[u2] or d[v] == d[v2])


# local ABC changes ------------------------------------------------------------

def _key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _edit_delta(adj, deg, remove, add) -> float:
    rem = {_key(*e) for e in remove}
    new = {_key(*e) for e in add}
    touched = {x for e in rem | new for x in e}
    old_edges = {_key(a, w) for a in touched for w in adj[a]}
    nd = {a: deg[a] for a in touched}
    for a, b in rem:
        nd[a] -= 1
        nd[b] -= 1
    for a, b in new:
        nd[a] += 1
        nd[b] += 1
    before = sum(edge_weight(deg[a], deg[b]) for a, b in old_edges)
    after = sum(edge_weight(nd.get(a, deg[a]), nd.get(b, deg[b])) for a, b in (old_edges - rem) | new)
    return after - before


def _apply_edit(adj, deg, remove, add) -> None:
    for a, b in remove:
        adj[a].discard(b)
        adj[b].discard(a)
        deg[a] -= 1
        deg[b] -= 1
    for a, b in add:
        adj[a].add(b)
        adj[b].add(a)
        deg[a] += 1
        deg[b] += 1


def _tree(adj) -> Tree:
    return Tree(len(adj), [(a, b) for a in range(len(adj)) for b in adj[a] if a < b], validate=False)


# move generators ----------------------------------------------------------------

def _b_arms(r: RootedTree, deg, v: int):
    """Degree-2 children of v carrying one leaf, when every child of v is such an arm."""
    ch = r.children[v]
    if not ch:
        return None
    for c in ch:
        if deg[c] != 2 or len(r.children[c]) != 1 or deg[r.children[c][0]] != 1:
            return None
    return ch


def _exchanges(r: RootedTree, deg, order):
    tin, tout = _euler(r)
    for i, v in enumerate(order):
        if v == r.root:
            continue
        u = r.parent[v]
        for v2 in order[i + 1:]:
            u2 = r.parent[v2]
            if v2 == r.root or u2 == u:
                continue
            if tin[v] <= tin[v2] < tout[v] or tin[v2] <= tin[v] < tout[v2]:
                continue
            if (deg[u] - deg[u2]) * (deg[v] - deg[v2]) >= 0:
                continue
            yield Move("subtree_exchange", {"v": v, "v2": v2}, ((u, v), (u2, v2)), ((u, v2), (u2, v)))


def _euler(r: RootedTree):
    tin = [0] * r.n
    tout = [0] * r.n
    clock = 0
    stack = [(r.root, 0)]
    while stack:
        v, state = stack.pop()
        if state == 0:
            tin[v] = clock
            clock += 1
            stack.append((v, 1))
            for c in reversed(r.children[v]):
                stack.append((c, 0))
        else:
            tout[v] = clock
    return tin, tout


def _rebalances(r: RootedTree, deg, order):
    for p in order:
        arms = {x: _b_arms(r, deg, x) for x in r.children[p]}
        bs = [x for x in r.children[p] if arms[x]]
        for x in bs:
            for y in bs:
                if len(arms[x]) >= len(arms[y]) + 2:
                    c = arms[x][-1]
                    yield Move("b_rebalance", {"from": x, "to": y, "arm": c}, ((x, c),), ((y, c),))


def _b1_merges(r: RootedTree, deg, order):
    for p in order:
        kids = r.children[p]
        b1 = [c for c in kids if deg[c] == 2 and len(r.children[c]) == 1 and deg[r.children[c][0]] == 1]
        bk = [x for x in kids if _b_arms(r, deg, x)]
        for c in b1:
            for y in bk:
                if y != c:
                    yield Move("b1_merge", {"arm": c, "to": y}, ((p, c),), ((y, c),))


def _is_b3(r: RootedTree, deg, v: int) -> bool:
    arms = _b_arms(r, deg, v)
    return arms is not None and len(arms) == 3


def _c_splits(r: RootedTree, deg, order):
    """Split a C_k (k >= 7): one B3 root becomes a new C root, its arms turn three B3 into B4."""
    for w in order:
        if w == r.root:
            continue
        ch = r.children[w]
        if len(ch) < 7 or not all(_is_b3(r, deg, x) for x in ch):
            continue
        p = r.parent[w]
        b, b1, b2, b3 = ch[-1], ch[0], ch[1], ch[2]
        arms = r.children[b]
        rem = [(b, a) for a in arms] + [(w, b)]
        add = [(x, a) for x, a in zip((b1, b2, b3), arms)] + [(p, b)]
        movers = ch[: (len(ch) - 1) // 2]
        rem += [(w, x) for x in movers]
        add += [(b, x) for x in movers]
        yield Move("c_split", {"c_root": w, "k": len(ch)}, tuple(rem), tuple(add))


def _compactify(r: RootedTree):
    """365 copies of C_k (53 <= k <= 142) at the root -> 7k+1 copies of C_52."""
    codes = r.codes()
    groups: dict[bytes, list[int]] = {}
    for c in r.children[r.root]:
        groups.setdefault(codes[c], []).append(c)
    for k in range(53, 143):
        vs = groups.get(_attached_code(C(k)))
        if vs and len(vs) >= 365:
            yield Move("compactify_365", {"k": k, "roots": vs[:365]})


def _leaf_moves(r: RootedTree, deg, order):
    for l in order:
        if deg[l] != 1 or l == r.root:
            continue
        u = r.parent[l]
        for v in order:
            if v != u and v != l:
                yield Move("contract_to_leafpath", {"leaf": l, "to": v}, ((u, l),), ((v, l),))


def _rebuild_compactify(t: Tree, r: RootedTree, move: Move) -> Tree:
    drop = set()
    for v in move.params["roots"]:
        drop.update(r.subtree_vertices(v))
    keep = [v for v in range(t.n) if v not in drop]
    idx = {v: i for i, v in enumerate(keep)}
    edges = [(idx[a], idx[b]) for a, b in t.edges if a in idx and b in idx]
    root = idx[r.root]
    tmpl = build_branch(C(52)).tree.edges
    off = len(keep)
    for _ in range(7 * move.params["k"] + 1):
        edges.append((root, off))
        edges.extend((a + off, b + off) for a, b in tmpl)
        off += 365
    return Tree(off, edges, validate=False)


def improving_move(t: Tree):
    """First strictly improving move in the fixed scan order, with its ABC change."""
    r = root_by_max_degree(t)
    deg = [int(x) for x in t.degrees]
    adj = [set(a) for a in t.adj]
    order = r.order()
    for gen in (_exchanges(r, deg, order), _rebalances(r, deg, order), _c_splits(r, deg, order),
                _b1_merges(r, deg, order), _leaf_moves(r, deg, order)):
        for mv in gen:
            d = _edit_delta(adj, deg, mv.remove, mv.add)
            if d < -STRICT:
                return mv, d
    for mv in _compactify(r):
        new = _rebuild_compactify(t, r, mv)
        d = abc_index(new) - abc_index(t)
        if d < -STRICT:
            return mv, d
    return None


def apply_move(t: Tree, move: Move) -> Tree:
    if move.kind == "compactify_365":
        return _rebuild_compactify(t, root_by_max_degree(t), move)
    adj = [set(a) for a in t.adj]
    deg = [int(x) for x in t.degrees]
    _apply_edit(adj, deg, move.remove, move.add)
    out = _tree(adj)
    out._validate()
    return out


def local_search(t: Tree, budget: int = 1000, trace: list | None = None) -> Tree:
    """Greedy first-improvement descent; stops at a local minimum or after ``budget`` moves."""
    if t.n < 3:
        raise ValueError("local search needs n >= 3")
    cur = t
    val = abc_index(cur)
    for step in range(int(budget)):
        found = improving_move(cur)
        if found is None:
            break
        mv, _ = found
        nxt = apply_move(cur, mv)
        new_val = abc_index(nxt)
        if not new_val < val - STRICT:
            break
        cur, val = nxt, new_val
        if trace is not None:
            trace.append({"step": step, "kind": mv.kind, "params": mv.params, "abc": val})
    return cur


# canonical representative ------------------------------------------------------------

def p1_violations(r: RootedTree) -> list[tuple[int, int]]:
    """Pairs (u, v) with h(u) < h(v), v outside T_u unless u is the root, but T_u smaller than T_v."""
    h = r.heights()
    codes = r.codes()
    tin, tout = _euler(r)
    out = []
    for u in range(r.n):
        for v in range(r.n):
            if h[u] < h[v] and codes[u] < codes[v]:
                if u != r.root and tin[u] <= tin[v] < tout[u]:
                    continue
                out.append((u, v))
    return out


def extremal_canonicalize(t: Tree) -> RootedTree:
    """Similarity exchanges that lift larger subtrees closer to the root, then sorting.

    ABC is unchanged.  The loop stops when no legal similarity exchange moves
    a larger subtree to a smaller height, or after n^2 rounds.
    """
    cur = t
    for _ in range(t.n * t.n):
        r = root_by_max_degree(cur)
        h = r.heights()
        codes = r.codes()
        tin, tout = _euler(r)
        hit = None
        for u, v in p1_violations(r):
            if u == r.root or v == r.root:
                continue
            if tin[u] <= tin[v] < tout[u] or tin[v] <= tin[u] < tout[v]:
                continue
            if legal_similarity(r, u, v) and h[u] < h[v] and codes[u] < codes[v]:
                hit = (u, v)
                break
        if hit is None:
            return r
        cur = exchange(r, *hit).tree
    return root_by_max_degree(cur)
