"""Compare the compiled and pure-Python special-function kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 20000]

Each row times one call pattern under both backends and reports the best of
``--repeat`` runs plus the speedup.
"""
import argparse
import timeit

import numpy as np

from asymorder import specfun
from asymorder.dist import builtin
from asymorder.distort import apply, make_order_stat, make_record
from asymorder.order import partial_distances, violation_set


def cases(size):
    rng = np.random.default_rng(0)
    u = rng.random(size)
    x = rng.uniform(0, 40, size)
    small = u[: max(1, size // 20)]
    base_x, base_y = builtin("normal", 0, 1), builtin("normal", 0.3, 1.4)
    dx, dy = apply(base_x, make_order_stat(30.5, 60)), apply(base_y, make_order_stat(30.5, 60))
    rec = make_record(40, 2)
    return [
        ("reg_inc_beta array", lambda: specfun.reg_inc_beta(u, 3.7, 12.2)),
        ("reg_inc_beta scalar loop", lambda: [specfun.reg_inc_beta(v, 3.7, 12.2) for v in small]),
        ("reg_inc_gamma_lower array", lambda: specfun.reg_inc_gamma_lower(17.5, x)),
        ("reg_inc_beta_inv array", lambda: specfun.reg_inc_beta_inv(small, 3.7, 12.2)),
        ("reg_inc_gamma_lower_inv array", lambda: specfun.reg_inc_gamma_lower_inv(17.5, small)),
        ("record eval", lambda: rec.eval(u)),
        ("distorted violation set", lambda: violation_set(dx, dy)),
        ("distorted partial distances", lambda: partial_distances(dx, dy)),
    ]


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=20000)
    args = ap.parse_args(argv)

    backends = ["python"]
    if specfun.compiled_available():
        backends.insert(0, "cython")
    else:
        print("compiled kernels not built; timing the Python backend only")
    before = specfun.BACKEND
    rows = []
    try:
        for name, fn in cases(args.size):
            times = {}
            for b in backends:
                specfun.use_backend(b)
                fn()  # warm up caches and lazy imports
                times[b] = best(fn, args.repeat)
            rows.append((name, times))
    finally:
        specfun.use_backend(before)

    header = f"{'case':32s}" + "".join(f"{b:>12s}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for name, times in rows:
        line = f"{name:32s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
        if len(backends) == 2:
            line += f"{times['python'] / times['cython']:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
