"""Compare the compiled kernels with the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from marginlab import kernels
from marginlab.boost import BoostConfig
from marginlab.core import HypothesisSet
from marginlab.harddist import sample_sparse_labeling
from marginlab.hypo import make_spec, sample_hypothesis_set


def cases():
    gen = np.random.default_rng(0)
    u, n = 2000, 20_000
    H = HypothesisSet.from_batches([gen.integers(0, 2, size=(n, u)) * 2 - 1])
    pts = np.sort(gen.choice(u, size=1000, replace=False))
    packed_t = H.restricted_transposed(pts)
    y = gen.choice(np.array([-1, 1], dtype=np.int8), size=pts.size)
    w = gen.random(pts.size)
    w /= w.sum()

    spec = make_spec(500, 20, 0.02, 0.1, 400.0)
    cfg = BoostConfig.for_spec(spec)
    Hs = sample_hypothesis_set(spec, 1, 0)
    ell = sample_sparse_labeling(500, 20, np.random.default_rng(1))
    bounds = np.asarray(Hs.batch_bounds, dtype=np.int64)

    return {
        f"correlations ({n} rows x {pts.size} points)": lambda m: m.correlations(packed_t, w),
        f"adaboost (50 rounds, {n} rows)": lambda m: m.adaboost(packed_t, y, 50, 1e-10),
        f"margin_boost (k={cfg.rounds}, |H|={Hs.size})":
            lambda m: m.margin_boost(Hs.packed, bounds, ell.values, cfg.step_alpha, cfg.gamma, None),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    compiled = kernels.compiled_backend()
    if compiled is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':<48} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for name, fn in cases().items():
        py = min(timeit.repeat(lambda: fn(kernels.python_backend), number=1, repeat=args.repeat))
        if compiled is None:
            print(f"{name:<48} {py * 1e3:>10.1f}")
            continue
        cy = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat))
        print(f"{name:<48} {py * 1e3:>10.1f} {cy * 1e3:>10.1f} {py / cy:>7.1f}x")


if __name__ == "__main__":
    main()
