"""Compiled kernels vs the numpy fallback.

    python3 benchmarks/bench_kernels.py [--cycles N] [--repeat R]

Prints one line per kernel with the best-of-R wall time of each backend and
the speed-up. Without the compiled extension only the fallback is timed.
"""

import argparse
import timeit

import numpy as np

from tpaw import _backend

CASES = {
    "cycle_batch": lambda k, n: k.cycle_batch(0.2, 0.2, 0.5, True, 0.5, 1.0, 1 / 600, 600.0, 7, 0, n),
    "weight_u": lambda k, n: [k.weight_u(x, 0.8, 1e-11, 1e-13) for x in np.geomspace(1e-3, 1e3, 50)],
    "e1": lambda k, n: [k.e1(x) for x in np.geomspace(1e-8, 700, 2000)],
}


def bench(name, kernels, n, repeat):
    fn = CASES[name]
    return min(timeit.repeat(lambda: fn(kernels, n), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cycles", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = {"python": _backend.python}
    if _backend.compiled is not None:
        backends["compiled"] = _backend.compiled
    print(f"{'kernel':<12} " + " ".join(f"{b:>12}" for b in backends) + "   speed-up")
    for name in CASES:
        times = {b: bench(name, k, args.cycles, args.repeat) for b, k in backends.items()}
        ratio = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{name:<12} " + " ".join(f"{t:>11.4f}s" for t in times.values()) + f"   {ratio:8.1f}x")


if __name__ == "__main__":
    main()
