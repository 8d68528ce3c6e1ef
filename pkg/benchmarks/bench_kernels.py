"""Time the compiled split kernel against the pure-Python fallback.

Run:  python3 benchmarks/bench_kernels.py [--rows 20000] [--features 16]

Both backends are called on identical inputs; besides timing, the script
asserts their answers match bit for bit, which is the property the rest of
the package relies on.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mbtilab._kernels import split_py

try:
    from mbtilab._kernels import _split as compiled
except ImportError:
    compiled = None


def make_case(n: int, f: int, seed: int):
    rng = np.random.default_rng(seed)
    cols = np.ascontiguousarray(rng.normal(size=(f, n)))
    # duplicate some values so tie handling is exercised
    cols[:, : n // 4] = np.round(cols[:, : n // 4], 1)
    y = (rng.random(n) < 0.4).astype(np.float64)
    w = rng.random(n) + 0.5
    return cols, w * y, w


def bench(fn, cols, wy, w, repeats: int) -> tuple[float, tuple]:
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(cols, wy, w, 1)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_forest(n: int, m: int, trees: int, seed: int) -> None:
    """End-to-end forest fit with each backend, checked for equality."""
    from mbtilab import _kernels
    from mbtilab.learn.forest import fit_random_forest
    from mbtilab.learn.serialize import model_dumps

    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, m))
    y = (X[:, 0] + 0.5 * X[:, 1] + rng.normal(size=n) > 0).astype(np.int64)

    dumps = {}
    for backend in ("python", "compiled"):
        fn = split_py.best_split if backend == "python" else compiled.best_split
        _kernels.best_split = fn  # forest reads the kernel through this module
        t0 = time.perf_counter()
        model = fit_random_forest(X, y, n_trees=trees, seed=seed)
        dt = time.perf_counter() - t0
        dumps[backend] = model_dumps(model)
        print(f"{backend:<8} fit_random_forest({n}x{m}, {trees} trees): {dt:6.2f} s")
    assert dumps["python"] == dumps["compiled"], "backends disagree"
    print("serialized forests are byte-identical")


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--rows", type=int, default=20000)
    parser.add_argument("--features", type=int, default=16)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trees", type=int, default=100)
    args = parser.parse_args()

    cols, wy, w = make_case(args.rows, args.features, args.seed)
    t_py, out_py = bench(split_py.best_split, cols, wy, w, args.repeats)
    print(f"python   best_split: {t_py * 1e3:8.2f} ms  -> {out_py}")

    if compiled is None:
        print("compiled backend not built (pip install -e . builds it)")
        return 0

    t_c, out_c = bench(compiled.best_split, cols, wy, w, args.repeats)
    print(f"compiled best_split: {t_c * 1e3:8.2f} ms  -> {out_c}")

    assert out_py[0] == out_c[0]
    assert repr(out_py[1]) == repr(out_c[1]), (out_py, out_c)
    assert repr(out_py[2]) == repr(out_c[2]), (out_py, out_c)
    print(f"bit-identical results; speedup x{t_py / t_c:.1f}")

    bench_forest(2000, 20, args.trees, args.seed)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
