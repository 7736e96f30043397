#!/usr/bin/env python3
"""Time the numba kernels against the numpy fallback on the same inputs.

    python3 benchmarks/bench_kernels.py --rows 5000 --features 18 --repeat 3

Prints one line per kernel and writes JSON with --json. Both paths must
return identical arrays; the script exits non-zero if they do not.
"""
import argparse
import json
import sys
import time

import numpy as np

from binreg import kernels
from binreg._jit import HAVE_NUMBA


def _time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def run(rows, features, depth, repeat, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((rows, features))
    y = X @ rng.standard_normal(features) + np.sin(3 * X[:, 0]) + 0.1 * rng.standard_normal(rows)
    Z = (X - X.mean(0)) / X.std(0)
    yc = y - y.mean()
    g, h = -y, np.ones(rows)

    cases = {
        "grow_tree": lambda nb: kernels.grow_tree(X, g, h, max_depth=depth, min_samples_leaf=5,
                                                  use_numba=nb),
        "lasso_cd": lambda nb: kernels.lasso_cd(Z, yc, 0.01, tol=1e-10, use_numba=nb),
    }
    tree = kernels.grow_tree(X, g, h, max_depth=depth, min_samples_leaf=5, use_numba=False)
    f, thr, left, right, value = tree[:5]
    cases["predict_tree"] = lambda nb: kernels.predict_tree(f, thr, left, right, value, X,
                                                            use_numba=nb)

    results = []
    for name, fn in cases.items():
        fn(True)  # compile outside the timed region
        t_nb, out_nb = _time(lambda: fn(True), repeat)
        t_np, out_np = _time(lambda: fn(False), repeat)
        results.append({"kernel": name, "numba_s": t_nb, "numpy_s": t_np,
                        "speedup": t_np / t_nb if t_nb > 0 else None,
                        "identical": _same(out_nb, out_np)})
    return results


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--rows", type=int, default=5000)
    p.add_argument("--features", type=int, default=18)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", help="write results here")
    args = p.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not importable; nothing to compare", file=sys.stderr)
        return 1
    res = run(args.rows, args.features, args.depth, args.repeat, args.seed)
    for r in res:
        print(f"{r['kernel']:<14} numba {r['numba_s']:.4f}s  numpy {r['numpy_s']:.4f}s  "
              f"x{r['speedup']:.1f}  identical={r['identical']}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"args": vars(args), "results": res}, fh, indent=2)
    return 0 if all(r["identical"] for r in res) else 1


if __name__ == "__main__":
    sys.exit(main())
