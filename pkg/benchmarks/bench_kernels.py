"""Compare the compiled kernels with the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sizes 500,2000,4000]

Prints the best-of-N wall time per kernel and backend, the speedup, and
whether both backends returned identical results.
"""
import argparse
import timeit

import numpy as np

from rmstmatch._kernels import _numpy

try:
    from rmstmatch._kernels import _core
except ImportError:
    _core = None


def match_inputs(n_treated, rng):
    n_control = 3 * n_treated
    t = np.sort(rng.normal(0.3, 1.0, n_treated))
    c = np.sort(rng.normal(-0.3, 1.0, n_control))
    return t, c


def risk_inputs(n, rng):
    time = np.sort(np.round(rng.exponential(50.0, n), 1))
    event = (rng.random(n) < 0.6).astype(float)
    return time, event, np.ones(n)


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def same(a, b):
    return all(np.array_equal(np.asarray(x), np.asarray(y)) for x, y in zip(a, b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", default="500,2000,4000", help="treated counts for matching")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(20240101)
    if _core is None:
        print("compiled extension not built; only the NumPy fallback is timed")

    print(f"{'kernel':<16}{'size':>8}{'numpy s':>12}{'cython s':>12}{'speedup':>10}  identical")
    for n in (int(s) for s in args.sizes.split(",")):
        t, c = match_inputs(n, rng)
        cases = [("monotone_match", f"{n}x{3 * n}", "monotone_match", (t, c))]
        time, event, w = risk_inputs(10 * n, rng)
        cases.append(("risk_table", str(10 * n), "risk_table", (time, event, w)))
        for label, size, name, inputs in cases:
            py = best(lambda: getattr(_numpy, name)(*inputs), args.repeat)
            if _core is None:
                print(f"{label:<16}{size:>8}{py:>12.4f}{'-':>12}{'-':>10}  -")
                continue
            cy = best(lambda: getattr(_core, name)(*inputs), args.repeat)
            ok = same(getattr(_numpy, name)(*inputs), getattr(_core, name)(*inputs))
            print(f"{label:<16}{size:>8}{py:>12.4f}{cy:>12.4f}{py / cy:>10.1f}  {ok}")


if __name__ == "__main__":
    main()
