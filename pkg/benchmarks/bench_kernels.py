"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best of ``--repeat`` runs after one warm-up call (the
warm-up absorbs numba compilation). Outputs of the two paths are compared
before timing, so a row only appears if both agree exactly.
"""
import argparse
import time

import numpy as np

from learnsep import kernels
from learnsep.numtheory import DiscreteLogSolver, generate_dlp_instance, generate_semiprime


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(rng):
    small_pm, small_a = generate_dlp_instance(20, 1)
    sp = generate_semiprime(40, 2)
    big = generate_semiprime(60, 3)
    xs20 = rng.integers(1, small_pm.p, size=200_000, dtype=np.int64)
    solver = DiscreteLogSolver(small_pm.p, small_a)
    big_pm, big_a = generate_dlp_instance(32, 4)
    big_solver = DiscreteLogSolver(big_pm.p, big_a)
    xs32 = rng.integers(1, big_pm.p, size=200, dtype=np.int64)
    ys40 = rng.integers(1, sp.N, size=100_000, dtype=np.int64)
    ys60 = rng.integers(1, big.N, size=20_000, dtype=np.int64)
    d40 = pow(3, -1, sp.phi)

    def bsgs(s, xs):
        return lambda impl: impl.bsgs(xs, s.giant, s.p, s.baby_values, s.baby_exps, s.step, s.max_giant)

    return [
        ("powmod 200k, 20-bit modulus", lambda impl: impl.powmod(small_a, xs20, small_pm.p)),
        ("powmod 100k, 40-bit modulus, 40-bit exps", lambda impl: impl.powmod(ys40, np.int64(d40), sp.N)),
        ("powmod 20k, 60-bit modulus, cube", lambda impl: impl.powmod(ys60, np.int64(3), big.N)),
        ("bsgs 200k logs, p~2^20", bsgs(solver, xs20)),
        ("bsgs 200 logs, p~2^32", bsgs(big_solver, xs32)),
        ("baby table 2^22 powers, p~2^32", lambda impl: impl.powers(big_a, 1 << 22, big_pm.p)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.NUMBA is None:
        print("numba is not installed; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'case':<44}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for label, run in cases(rng):
        ref, fast = run(kernels.NUMPY), run(kernels.NUMBA)
        if not np.array_equal(ref, fast):
            raise SystemExit(f"{label}: numba and numpy disagree")
        t_np = best_of(lambda: run(kernels.NUMPY), args.repeat)
        t_nb = best_of(lambda: run(kernels.NUMBA), args.repeat)
        print(f"{label:<44}{t_np:>10.4f}{t_nb:>10.4f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
