"""Compare the compiled and pure-Python sweep kernels.

Both backends consume identical pre-drawn randoms and must produce
bit-identical trajectories; this script checks that and reports the speedup
on lattices sized like the shipped scenarios.

    python benchmarks/bench_kernels.py [--sweeps N]
"""
import argparse
import time

import numpy as np

from mirrorlat import kernels
from mirrorlat.gauge import TAU
from mirrorlat.lattice import build_geometry


def bench(name, initial, fixed_args, sweeps):
    backends = kernels.available_backends()
    if "cython" not in backends:
        print(f"{name:<14} compiled extension not built; skipping comparison")
        return
    results = {}
    for label in ("python", "cython"):
        fn = getattr(backends[label], name)
        state = initial.copy()
        fn(state, *fixed_args)              # warm up
        state = initial.copy()
        t0 = time.perf_counter()
        for _ in range(sweeps):
            fn(state, *fixed_args)
        results[label] = time.perf_counter() - t0
        results[f"{label}_state"] = state
    identical = np.array_equal(results["python_state"], results["cython_state"])
    speedup = results["python"] / results["cython"]
    print(f"{name:<14} python {1e3 * results['python'] / sweeps:8.3f} ms/sweep   "
          f"cython {1e3 * results['cython'] / sweeps:8.3f} ms/sweep   "
          f"speedup {speedup:6.1f}x   trajectories {'identical' if identical else 'DIFFER'}")
    if not identical:
        raise SystemExit(f"{name}: backend trajectories differ")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sweeps", type=int, default=50)
    args = parser.parse_args()

    print(f"selected backend: {kernels.BACKEND}")
    rng = np.random.default_rng(0)

    g4 = build_geometry([4, 8, 4, 4], "periodic", 1, 0)
    bench("u1_sweep",
          rng.uniform(0, TAU, g4.n_links),
          (g4.staple_links, g4.staple_signs, g4.staple_offsets, 1.0,
           rng.uniform(-0.5, 0.5, g4.n_links), rng.random(g4.n_links)),
          args.sweeps)

    bench("zn_sweep",
          rng.integers(0, 4, g4.n_links),
          (4, g4.staple_links, g4.staple_signs, g4.staple_offsets, 0.5,
           np.cos(TAU * np.arange(4) / 4), rng.integers(0, 4, g4.n_links),
           rng.random(g4.n_links)),
          args.sweeps)

    gs = build_geometry([8, 8, 8], "periodic", 1, 0)
    bench("scalar_sweep",
          rng.normal(0, 1, gs.n_sites),
          (gs.nbr_sites, gs.nbr_offsets, 0.5, 0.1,
           rng.normal(0, 0.7, gs.n_sites), rng.random(gs.n_sites)),
          args.sweeps)


if __name__ == "__main__":
    main()
