"""Compiled kernels against their plain-Python versions.

Two measurements:

* per-kernel: each family's prefix kernel on the same ragged batch, called
  compiled and through ``py_func`` (the source numba compiles);
* end to end: one ``find-basis`` run in a subprocess with and without
  MATROID_DISABLE_NUMBA=1.

    python3 benchmarks/bench_kernels.py [--rows 64] [--n 2048] [--json out.json]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from parmatroid import kernels as K
from parmatroid._jit import NUMBA_ENABLED
from parmatroid.instances import generate
from parmatroid.ragged import Ragged


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def kernel_cases(n):
    part = generate(f"gen:partition:n={n}")
    graph = generate(f"gen:graphic:n={n}")
    lin = generate(f"gen:linear:n={min(n, 512)}")
    return [
        ("partition", part.n, K.part_prefix, lambda rg: (rg.flat, rg.offs, part.block, part.cap, len(part.cap))),
        ("graphic", graph.n, K.gr_prefix, lambda rg: (rg.flat, rg.offs, graph.eu, graph.ev, graph.nv)),
        ("linear", lin.n, K.lin_prefix, lambda rg: (rg.flat, rg.offs, lin.cols, lin.p)),
    ]


def bench_kernels(rows, n, repeat):
    rng = np.random.default_rng(0)
    out = []
    for name, size, fn, args in kernel_cases(n):
        rg = Ragged.from_matrix(np.stack([rng.permutation(size) for _ in range(rows)]))
        a = args(rg)
        fast = np.asarray(fn(*a))
        slow = np.asarray(fn.py_func(*a))
        assert (fast == slow).all(), name
        out.append({"kernel": f"{name}_prefix", "elements": size, "rows": rows,
                    "compiled_s": best_of(lambda: fn(*a), repeat),
                    "python_s": best_of(lambda: fn.py_func(*a), max(1, repeat // 3))})
    return out


def bench_end_to_end(spec, algo):
    out = []
    for disabled in ("0", "1"):
        env = dict(os.environ, MATROID_DISABLE_NUMBA=disabled)
        cmd = [sys.executable, "-m", "parmatroid.cli", "find-basis", "--matroid", spec, "--algo", algo]
        t = time.perf_counter()
        res = subprocess.run(cmd, env=env, check=True, capture_output=True, text=True)
        out.append({"numba": disabled == "0", "spec": spec, "algo": algo,
                    "wall_s": time.perf_counter() - t, "rank": json.loads(res.stdout)["rank"]})
    assert out[0]["rank"] == out[1]["rank"]
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=64)
    ap.add_argument("--n", type=int, default=2048)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--spec", default="gen:graphic:n=1024")
    ap.add_argument("--algo", default="main37")
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    if not NUMBA_ENABLED:
        print("numba disabled in this process; compiled and python columns coincide")
    kern = bench_kernels(args.rows, args.n, args.repeat)
    print(f"{'kernel':<18}{'elems':>7}{'rows':>6}{'numba s':>12}{'python s':>12}{'speedup':>10}")
    for r in kern:
        print(f"{r['kernel']:<18}{r['elements']:>7}{r['rows']:>6}{r['compiled_s']:>12.5f}"
              f"{r['python_s']:>12.5f}{r['python_s'] / r['compiled_s']:>10.1f}")
    e2e = bench_end_to_end(args.spec, args.algo)
    for r in e2e:
        print(f"end-to-end {r['algo']} on {r['spec']} numba={r['numba']}: {r['wall_s']:.2f} s (rank {r['rank']})")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"kernels": kern, "end_to_end": e2e}, fh, indent=2)


if __name__ == "__main__":
    main()
