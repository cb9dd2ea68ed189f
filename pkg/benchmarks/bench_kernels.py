"""Compiled versus pure-Python kernels on the three hot paths.

    python benchmarks/bench_kernels.py [--repeat 3] [--brute-n 18] [--quick]

Each workload is run with both backends; results are compared before timings
are reported.
"""
import argparse
import json
import statistics
import time

from abctrees._backend import compiled_kernels
from abctrees.enumeration import brute_force_min
from abctrees.graph import free_code
from abctrees.lemmas import SweepSpec, sweep
from abctrees.search import family_search


def timed(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def workloads(args):
    n = args.brute_n or (16 if args.quick else 18)
    yield ("brute_force_min", f"n={n}",
           lambda b: brute_force_min(n, backend=b),
           lambda r: (round(r.best_value, 12), [free_code(t) for t in r.witnesses]))
    du_hi = 600 if args.quick else 3000
    spec = SweepSpec("7k8", (("k", 1, 51), ("du", 8, du_hi)))
    yield ("sweep", f"7k8 k<=51 du<={du_hi}",
           lambda b: sweep(spec, workers=1, backend=b),
           lambda r: (r.status, r.evaluations, round(r.min_value, 12), r.argmin))
    orders = [312, 939] if args.quick else [312, 939, 5000]
    yield ("family_search", f"n in {orders}",
           lambda b: [family_search(m, backend=b) for m in orders],
           lambda rs: [(round(r.best_value, 9), r.r, r.s) for r in rs])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--brute-n", type=int, default=None, help="default 18, or 16 with --quick")
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    ap.add_argument("--json", default=None, help="also write results to this file")
    args = ap.parse_args(argv)

    if compiled_kernels() is None:
        raise SystemExit("compiled kernels are not built; nothing to compare")

    rows = []
    print(f"{'kernel':<16} {'workload':<28} {'compiled s':>11} {'python s':>10} {'speedup':>8}")
    for name, label, run, key in workloads(args):
        tc, rc = timed(lambda: run("compiled"), args.repeat)
        tp, rp = timed(lambda: run("python"), max(1, args.repeat // 2))
        if key(rc) != key(rp):
            raise SystemExit(f"{name}: backends disagree: {key(rc)!r} vs {key(rp)!r}")
        rows.append({"kernel": name, "workload": label, "compiled": tc, "python": tp, "speedup": tp / tc})
        print(f"{name:<16} {label:<28} {tc:>11.4f} {tp:>10.4f} {tp / tc:>7.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
