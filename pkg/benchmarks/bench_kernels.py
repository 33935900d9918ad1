"""Numba versus numpy timings for the three hot kernels.

    python benchmarks/bench_kernels.py [--n 3] [--order 8] [--repeat 20]

Both backends are called directly, so one run covers both regardless of
FFG_DISABLE_NUMBA.  The first numba call (compilation or cache load) is
excluded from the timings.
"""

import argparse
import time

import numpy as np

from ffg import kernels
from ffg.basis import get_basis


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--order", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    basis = get_basis(args.n, args.order)
    rng = np.random.default_rng(args.seed)
    a = rng.standard_normal(basis.size) + 1j * rng.standard_normal(basis.size)
    b = rng.standard_normal(basis.size) + 1j * rng.standard_normal(basis.size)
    comps = rng.standard_normal((args.n, basis.size)).astype(np.complex128)
    comps[:, 0] = 0

    cases = {
        "truncated_mul": (
            lambda: kernels.mul_nb(a, b, basis),
            lambda: kernels.mul_np(a, b, basis),
        ),
        "monomial_powers": (
            lambda: kernels.powers_nb(comps, basis, basis),
            lambda: kernels.powers_np(comps, basis, basis),
        ),
        "derivation": (
            lambda: kernels.derivation_nb(comps, basis),
            lambda: kernels.derivation_np(comps, basis),
        ),
    }

    print(f"n={args.n} order={args.order} basis={basis.size} pairs={basis.pair_k.size}")
    print(f"{'kernel':<18}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for name, (fast, slow) in cases.items():
        diff = float(np.abs(fast() - slow()).max())
        t_nb = best_of(fast, args.repeat)
        t_np = best_of(slow, args.repeat)
        print(f"{name:<18}{t_nb * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_nb:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
