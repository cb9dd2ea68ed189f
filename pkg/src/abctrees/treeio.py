"""Tree and config files: text edge lists, JSON and DOT."""
from __future__ import annotations

import json
from pathlib import Path

from .branches import assemble, config_from_json
from .graph import InvalidTreeError, Tree

__all__ = ["BadFileError", "parse_tree", "read_tree", "tree_to_text", "tree_to_json", "tree_to_dot"]


class BadFileError(ValueError):
    """A tree or config file is missing or malformed."""


def _from_text(text: str) -> Tree:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise BadFileError("empty tree file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n":
        raise BadFileError("first line must be 'n <N>'")
    try:
        n = int(head[1])
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise BadFileError(f"bad edge line {ln!r}")
            edges.append((int(parts[0]), int(parts[1])))
    except ValueError as e:
        raise BadFileError(str(e)) from None
    return Tree(n, edges)


def _from_json(obj) -> Tree:
    if not isinstance(obj, dict):
        raise BadFileError("JSON tree must be an object")
    if "branches" in obj:
        return assemble(config_from_json(obj))
    if "n" not in obj or "edges" not in obj:
        raise BadFileError("JSON tree needs 'n' and 'edges'")
    return Tree(int(obj["n"]), [tuple(e) for e in obj["edges"]])


def parse_tree(text: str) -> Tree:
    """Parse the text edge-list format, a JSON tree or a JSON family config."""
    try:
        s = text.lstrip()
        if s.startswith("{"):
            try:
                obj = json.loads(s)
            except json.JSONDecodeError as e:
                raise BadFileError(f"invalid JSON: {e}") from None
            return _from_json(obj)
        return _from_text(text)
    except (InvalidTreeError, KeyError, TypeError) as e:
        raise BadFileError(str(e)) from None
    except ValueError as e:
        if isinstance(e, BadFileError):
            raise
        raise BadFileError(str(e)) from None


def read_tree(path) -> Tree:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise BadFileError(f"cannot read {path}: {e.strerror}") from None
    return parse_tree(text)


def tree_to_text(t: Tree) -> str:
    return "".join([f"n {t.n}\n"] + [f"{u} {v}\n" for u, v in t.edges])


def tree_to_json(t: Tree) -> dict:
    return {"n": t.n, "edges": [list(e) for e in t.edges]}


def tree_to_dot(t: Tree) -> str:
    deg = t.degrees
    out = ["graph T {"]
    out += [f'  {v} [label="{v}:{int(deg[v])}"];' for v in range(t.n)]
    out += [f"  {u} -- {v};" for u, v in t.edges]
    out.append("}")
    return "\n".join(out) + "\n"
