"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot kernels (subtree square profile, chi^M depth integrals)
and one full stopping-time run per backend.  Run:

    python3 benchmarks/bench_kernels.py [--depth 10] [--repeat 20]
"""

import argparse
import time

import numpy as np

from sparsedom import kernels
from sparsedom.generate import generate_multiplier, generate_signal
from sparsedom.stopping import dominate_avg, dominate_square


def timeit(fn, repeat):
    fn()  # warmup / JIT
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def bench_kernels(J, repeat):
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(1 << J) ** 2
    absf = np.abs(rng.standard_normal(1 << J))
    rows = []

    def profile_all(impl):
        def run():
            for d in range(J):
                impl(vals, J, d, 0)
        return run

    def chi_all(impl):
        def run():
            for d in range(J + 1):
                impl(absf, J, d, 8)
        return run

    pairs = [("subtree_profile", profile_all, kernels._subtree_profile_np,
              getattr(kernels, "_subtree_profile_nb", None)),
             ("chi_sums_depth", chi_all, kernels._chi_sums_depth_np,
              getattr(kernels, "_chi_sums_depth_nb", None))]
    for name, wrap, np_impl, nb_impl in pairs:
        t_np = timeit(wrap(np_impl), repeat)
        t_nb = timeit(wrap(nb_impl), repeat) if nb_impl is not None else float("nan")
        rows.append((name, t_np, t_nb))
    return rows


def bench_stopping(J, repeat):
    f = generate_signal("gaussian_noise", J, seed=1)
    g = generate_signal("gaussian_noise", J, seed=2)
    T = generate_multiplier(J, seed=3, n_intervals=96)
    rows = []
    for name, fn in (("dominate_avg", lambda: dominate_avg(T, f, g)),
                     ("dominate_square", lambda: dominate_square(T, f, g))):
        rows.append((name, timeit(fn, max(repeat // 4, 1))))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--depth", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    print(f"active backend: {kernels.BACKEND}   (J={args.depth})")
    print(f"{'kernel':<18}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, t_np, t_nb in bench_kernels(args.depth, args.repeat):
        speed = t_np / t_nb if t_nb == t_nb and t_nb > 0 else float("nan")
        print(f"{name:<18}{t_np * 1e3:>10.2f}ms{t_nb * 1e3:>10.2f}ms{speed:>9.1f}x")
    print()
    print(f"stopping times with the active backend ({kernels.BACKEND}):")
    for name, t in bench_stopping(args.depth, args.repeat):
        print(f"{name:<18}{t * 1e3:>10.2f}ms")
    print("rerun with SPARSEDOM_BACKEND=numpy to time the fallback end to end")


if __name__ == "__main__":
    main()
