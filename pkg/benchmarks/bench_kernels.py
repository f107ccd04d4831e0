"""Compare the numba kernels with their pure-numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]

Reports the best wall time per kernel for each backend, then an end-to-end
``simulate`` + plug-in estimate run under each backend (the fallback is
selected in a child process through ``EXTDEP_DISABLE_NUMBA=1``).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from extdep import _kernels

END_TO_END = """
import time
from extdep import BACKEND, Partition, estimate_epsilon_np, make_min_product_mixture, simulate
m = make_min_product_mixture(0.3, 0.3, 0.6, (1.0, 2.0, 0.5, 1.5), 4)
simulate(m, 1000, seed=0)  # warm-up / jit
t0 = time.perf_counter()
x = simulate(m, {n}, seed=1).values
t1 = time.perf_counter()
estimate_epsilon_np(x, Partition.parse("1,2|3,4", 4), [1.0, 2.0])
t2 = time.perf_counter()
print(BACKEND, t1 - t0, t2 - t1)
"""


def kernel_inputs(n, rng):
    u = rng.uniform(0, np.pi, n)
    e = rng.standard_exponential(n)
    e2 = rng.standard_exponential((n, 4))
    s = _kernels.NUMPY_IMPL["positive_stable"](0.4, u, e)
    uu = rng.uniform(size=(n, 6))
    block_of = np.array([0, 0, 1, 2, 1, 2], dtype=np.int64)
    bm = _kernels.NUMPY_IMPL["block_maxima"](uu, block_of, 3)
    lam = np.array([0.5, 1.0, 2.0])
    return {
        "positive_stable": (0.4, u, e),
        "logistic_frechet": (s, e2, 0.4),
        "block_maxima": (uu, block_of, 3),
        "max_power": (bm, lam),
        "min_pair_tail": (bm, 0, 2),
    }


def best(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    inputs = kernel_inputs(args.n, np.random.default_rng(0))
    print(f"kernels, n={args.n}, best of {args.repeat}")
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, a in inputs.items():
        _kernels.NUMBA_IMPL[name](*a)  # compile outside the timing
        t_np = best(_kernels.NUMPY_IMPL[name], a, args.repeat)
        t_nb = best(_kernels.NUMBA_IMPL[name], a, args.repeat)
        print(f"{name:<18}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.2f}")

    print(f"\nend to end (d=4 min-product mixture), n={args.n}")
    print(f"{'backend':<10}{'simulate [s]':>14}{'estimate [s]':>14}")
    for flag in ("0", "1"):
        env = dict(os.environ, EXTDEP_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END.format(n=args.n)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"{out[0]:<10}{float(out[1]):>14.3f}{float(out[2]):>14.3f}")


if __name__ == "__main__":
    main()
