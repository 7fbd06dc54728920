"""Compare the numba and numpy kernel backends on orbit counting.

    python3 benchmarks/bench_backends.py --pattern C5 --sizes 10000,20000,40000

Both backends run on the same seeded graphs; counts are checked to agree.
"""

import argparse
import statistics
import time

import numpy as np

from orbithom import kernels
from orbithom.engine import orbit_homs
from orbithom.graph import random_degenerate_graph
from orbithom.pattern import named_pattern


def timed(h, g, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        table = orbit_homs(h, g)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pattern", default="C5", help="named pattern, e.g. C5, P6, diamond")
    ap.add_argument("--sizes", default="10000,20000,40000")
    ap.add_argument("--kappa", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    h = named_pattern(args.pattern)
    backends = kernels.available_backends()
    for be in backends:
        with kernels.use_backend(be):
            orbit_homs(h, random_degenerate_graph(64, args.kappa, args.seed))  # compile / warm up
    print(f"pattern={args.pattern} kappa={args.kappa} seed={args.seed} repeats={args.repeats}")
    print(f"{'n':>8} {'m':>8} " + " ".join(f"{be + ' s':>10}" for be in backends) + "  speedup")
    for n in (int(x) for x in args.sizes.split(",")):
        g = random_degenerate_graph(n, args.kappa, args.seed)
        secs = {}
        tables = {}
        for be in backends:
            with kernels.use_backend(be):
                secs[be], tables[be] = timed(h, g, args.repeats)
        if len(backends) > 1:
            assert np.array_equal(tables["numba"].counts, tables["numpy"].counts), "backends disagree"
        speed = f"{secs['numpy'] / secs['numba']:.2f}x" if "numba" in secs else "-"
        print(f"{n:>8} {g.m:>8} " + " ".join(f"{secs[be]:>10.3f}" for be in backends) + f"  {speed:>7}")


if __name__ == "__main__":
    main()
