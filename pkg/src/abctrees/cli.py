"""Command-line interface: ``abc <verb> ...``.

Exit codes: 0 success, 2 usage error or unknown verb, 3 bad input file,
4 capacity exceeded, 5 verification counterexample.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys

import numpy as np

EXIT_USAGE = 2
EXIT_BAD_FILE = 3
EXIT_CAPACITY = 4
EXIT_COUNTEREXAMPLE = 5


class _Usage(Exception):
    pass


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return _Float(x)
    if isinstance(x, dict):
        return {str(k): _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


class _Float(float):
    def __repr__(self):
        return format(float(self), ".17g")


def _iterencode(o):
    if isinstance(o, dict):
        yield "{"
        for i, (k, v) in enumerate(o.items()):
            if i:
                yield ", "
            yield json.dumps(str(k)) + ": "
            yield from _iterencode(v)
        yield "}"
    elif isinstance(o, list):
        yield "["
        for i, v in enumerate(o):
            if i:
                yield ", "
            yield from _iterencode(v)
        yield "]"
    elif isinstance(o, _Float):
        yield repr(o)
    else:
        yield json.dumps(o)


def dumps(obj) -> str:
    """JSON with every float printed to 17 significant digits."""
    return "".join(_iterencode(_num(obj)))


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _table(header, rows, fmt: str) -> str:
    if fmt == "json":
        return dumps([dict(zip(header, r)) for r in rows]) + "\n"
    if fmt == "text":
        return "".join(" ".join(_fmt(x) for x in r) + "\n" for r in [header] + list(rows))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _text(obj, indent: str = "") -> str:
    out = []
    for k, v in obj.items():
        if isinstance(v, dict):
            out.append(f"{indent}{k}:")
            out.append(_text(v, indent + "  "))
        else:
            out.append(f"{indent}{k}: {_fmt(v) if not isinstance(v, list) else dumps(v)}")
    return "\n".join(out)


def _emit(obj, fmt: str) -> str:
    if fmt == "text" and isinstance(obj, dict):
        return _text(obj) + "\n"
    return dumps(obj) + "\n"


# verbs ------------------------------------------------------------------------

def _tree_arg(path):
    from .treeio import read_tree

    return read_tree(path)


def cmd_index(a):
    from .graph import abc_index

    t = _tree_arg(a.file)
    return _emit({"n": t.n, "abc": abc_index(t)}, a.format), 0


def cmd_brute(a):
    from .enumeration import brute_force_min
    from .treeio import tree_to_json

    res = brute_force_min(a.n, cap=a.cap, workers=a.threads)
    obj = {"n": res.n, "best_value": res.best_value,
           "witnesses": [tree_to_json(t) for t in res.witnesses],
           "examined": res.stats["examined"]}
    return _emit(obj, a.format), 0


def cmd_greedy(a):
    from .graph import DegreeSequence, abc_index, degree_sequence
    from .search import greedy_tree
    from .treeio import tree_to_json

    if a.file:
        seq = degree_sequence(_tree_arg(a.file))
    elif a.degrees:
        try:
            seq = DegreeSequence.of(a.degrees)
        except ValueError as e:
            raise _Usage(str(e)) from None
    else:
        raise _Usage("give a degree sequence or --file")
    r = greedy_tree(seq)
    obj = {"n": r.n, "abc": abc_index(r.tree), "degrees": list(seq.degrees)}
    obj.update(tree_to_json(r.tree))
    return _emit(obj, a.format), 0


def cmd_family(a):
    from .branches import assemble, config_to_json
    from .search import family_search
    from .treeio import tree_to_json

    res = family_search(a.n, constraints=not a.unconstrained, workers=a.threads)
    obj = {"n": res.n, "best_value": res.best_value, "r": res.r, "s": res.s,
           "config": config_to_json(res.best_config), "describe": res.best_config.describe(),
           "ties": [config_to_json(c) for c in res.ties]}
    if a.emit_tree:
        with open(a.emit_tree, "w") as fh:
            fh.write(dumps(tree_to_json(assemble(res.best_config))) + "\n")
    return _emit(obj, a.format), 0


def cmd_gamma(a):
    from .search import gamma_bounds

    if a.n_from > a.n_to:
        raise _Usage("from must not exceed to")
    rows = []
    for n in range(a.n_from, a.n_to + 1, a.step):
        g = gamma_bounds(n)
        rows.append((n, g.lower, g.upper, g.c0))
    return _table(("n", "lower", "upper", "c0"), rows, a.format or "csv"), 0


def cmd_scan(a):
    from .search import family_search, gamma_bounds

    if a.n_from > a.n_to:
        raise _Usage("from must not exceed to")
    rows = []
    for n in range(a.n_from, a.n_to + 1, a.step):
        res = family_search(n, workers=a.threads)
        g = gamma_bounds(n)
        rows.append((n, res.r, res.s, res.best_value, g.lower, g.upper))
    return _table(("n", "r", "s", "best_value", "lower", "upper"), rows, a.format or "csv"), 0


def cmd_local_search(a):
    from .graph import abc_index
    from .transforms import local_search
    from .treeio import tree_to_json

    t = _tree_arg(a.file)
    trace = []
    out = local_search(t, budget=a.budget, trace=trace)
    if a.trace:
        with open(a.trace, "w") as fh:
            for rec in trace:
                fh.write(dumps(rec) + "\n")
    obj = {"n": out.n, "abc_before": abc_index(t), "abc": abc_index(out), "moves": len(trace)}
    obj.update(tree_to_json(out))
    return _emit(obj, a.format), 0


def _param(s: str):
    name, sep, rng = s.partition("=")
    lo, dots, hi = rng.partition("..")
    if not sep or not name:
        raise _Usage(f"bad --param {s!r}; expected name=a..b")
    try:
        lo_i = int(lo)
        hi_i = int(hi) if dots else lo_i
    except ValueError:
        raise _Usage(f"bad --param {s!r}; expected integers") from None
    return name, lo_i, hi_i


def cmd_verify(a):
    from .lemmas import REGISTRY, SweepSpec, UnknownLemmaError, sweep

    if a.list:
        rows = [{"id": k, "title": d.title, "origin": d.origin, "aux": d.aux,
                 "params": [p.name for p in d.params]} for k, d in REGISTRY.items()]
        return _emit(rows, "json"), 0
    if not a.lemma_id:
        raise _Usage("verify needs a lemma id or --list")
    ranges = tuple(_param(p) for p in a.param or ())
    try:
        rep = sweep(SweepSpec(a.lemma_id, ranges, a.full), workers=a.threads)
    except UnknownLemmaError:
        raise _Usage(f"unknown lemma id {a.lemma_id!r}; see 'abc verify --list'") from None
    code = EXIT_COUNTEREXAMPLE if rep.status == "counterexample" else 0
    if rep.status == "inconclusive":
        code = 1
    return _emit(rep.to_dict(), a.format), code


def cmd_compare(a):
    from .graph import abc_index, compare_subtrees, free_code, root_by_max_degree

    t1, t2 = _tree_arg(a.file1), _tree_arg(a.file2)
    c = compare_subtrees(root_by_max_degree(t1), root_by_max_degree(t2))
    obj = {"abc1": abc_index(t1), "abc2": abc_index(t2), "order": c,
           "isomorphic": free_code(t1) == free_code(t2)}
    return _emit(obj, a.format), 0


def cmd_export(a):
    from .treeio import tree_to_dot, tree_to_json, tree_to_text

    t = _tree_arg(a.file)
    if a.dot:
        return tree_to_dot(t), 0
    if a.format == "text":
        return tree_to_text(t), 0
    return dumps(tree_to_json(t)) + "\n", 0


# parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)
    common.add_argument("--threads", type=int, default=None, help="worker processes (default ABC_THREADS or 1)")
    common.add_argument("--out", default=None, help="write output to this path")
    common.add_argument("--seed", type=int, default=None)

    p = argparse.ArgumentParser(prog="abc", description="ABC index of trees")
    sub = p.add_subparsers(dest="verb", required=True, metavar="verb")

    s = sub.add_parser("index", parents=[common], help="ABC index of a tree file")
    s.add_argument("file")
    s.set_defaults(func=cmd_index)

    s = sub.add_parser("brute", parents=[common], help="exhaustive minimum over all trees of order n")
    s.add_argument("n", type=int)
    s.add_argument("--cap", type=int, default=22)
    s.set_defaults(func=cmd_brute)

    s = sub.add_parser("greedy", parents=[common], help="greedy tree of a degree sequence")
    s.add_argument("degrees", nargs="*", type=int)
    s.add_argument("--file", default=None, help="use the degree sequence of this tree")
    s.set_defaults(func=cmd_greedy)

    s = sub.add_parser("family", parents=[common], help="structured family search for order n")
    s.add_argument("n", type=int)
    s.add_argument("--unconstrained", action="store_true")
    s.add_argument("--emit-tree", default=None)
    s.set_defaults(func=cmd_family)

    s = sub.add_parser("gamma", parents=[common], help="bounds on the minimum ABC index")
    s.add_argument("n_from", type=int)
    s.add_argument("n_to", type=int)
    s.add_argument("--step", type=int, default=1)
    s.set_defaults(func=cmd_gamma)

    s = sub.add_parser("scan", parents=[common], help="family search over a range of n")
    s.add_argument("n_from", type=int)
    s.add_argument("n_to", type=int)
    s.add_argument("--step", type=int, default=1)
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("local-search", parents=[common], help="descent over the improvement moves")
    s.add_argument("file")
    s.add_argument("--budget", type=int, default=1000)
    s.add_argument("--trace", default=None)
    s.set_defaults(func=cmd_local_search)

    s = sub.add_parser("verify", parents=[common], help="sweep a registered inequality")
    s.add_argument("lemma_id", nargs="?")
    s.add_argument("--param", action="append", help="name=a..b")
    s.add_argument("--full", action="store_true")
    s.add_argument("--list", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("compare", parents=[common], help="order two trees")
    s.add_argument("file1")
    s.add_argument("file2")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("export", parents=[common], help="convert a tree file")
    s.add_argument("file")
    s.add_argument("--dot", action="store_true")
    s.set_defaults(func=cmd_export)
    return p


def run(argv=None) -> int:
    from .enumeration import CapacityError
    from .lemmas import CapExceededError
    from .treeio import BadFileError

    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if a.seed is not None:
        random.seed(a.seed)
        np.random.seed(a.seed)
    if a.threads is not None:
        if a.threads < 1:
            print("abc: --threads must be >= 1", file=sys.stderr)
            return EXIT_USAGE
        os.environ["ABC_THREADS"] = str(a.threads)
    if a.format is None and a.verb not in ("gamma", "scan"):
        a.format = "json"
    try:
        text, code = a.func(a)
    except BadFileError as e:
        print(f"abc: bad file: {e}", file=sys.stderr)
        return EXIT_BAD_FILE
    except (CapacityError, CapExceededError) as e:
        print(f"abc: capacity exceeded: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except (_Usage, ValueError) as e:
        print(f"abc: {e}", file=sys.stderr)
        return EXIT_USAGE
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
