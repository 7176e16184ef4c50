"""Compare the numba and pure-numpy kernels on the two hot paths.

    python benchmarks/bench_kernels.py [--runs 1000] [--frames 43200] [--points 2000]

The numba timings exclude JIT compilation (one warm-up call first).
"""

import argparse
import time

import numpy as np

from goiot import _kernels


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=1000)
    ap.add_argument("--frames", type=int, default=43200)
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if not _kernels.NUMBA_AVAILABLE:
        print("numba is not installed; only the numpy backend can run")
    backends = ["numpy"] + (["numba"] if _kernels.NUMBA_AVAILABLE else [])

    seeds = [_kernels.derive_seed(1, i) for i in range(args.runs)]
    sim_args = (seeds, args.frames, 0.1, 0.996, 0.0105, 0.99, 0.003, True, True)
    pts = np.random.default_rng(0).random((args.points, 3))

    results = {}
    for b in backends:
        _kernels.simulate_counts(seeds[:2], 100, *sim_args[2:], backend=b)
        _kernels.pareto_mask(pts[:10], backend=b)
        t_sim, counts = _best_of(lambda: _kernels.simulate_counts(*sim_args, backend=b), args.repeat)
        t_par, mask = _best_of(lambda: _kernels.pareto_mask(pts, backend=b), args.repeat)
        results[b] = (t_sim, t_par, counts, mask)
        print(f"{b:6s} simulate_counts {args.runs}x{args.frames}: {t_sim:8.3f} s   "
              f"pareto_mask {args.points}x3: {t_par:8.4f} s")

    if len(results) == 2:
        same = (np.array_equal(results["numpy"][2], results["numba"][2])
                and np.array_equal(results["numpy"][3], results["numba"][3]))
        print(f"speed-up simulate {results['numpy'][0] / results['numba'][0]:.1f}x, "
              f"pareto {results['numpy'][1] / results['numba'][1]:.1f}x; identical outputs: {same}")


if __name__ == "__main__":
    main()
