"""Wall-clock comparison of the numba and numpy RK4 drivers.

    python3 benchmarks/bench_backends.py [--steps 2000] [--repeat 3]

Prints one line per ensemble size with the best time of each backend and
the max state difference between them after the run.
"""
import argparse
import time

import numpy as np

from lhsac import core
from lhsac._kernels import numba_impl, numpy_impl
from lhsac.core import CouplingLaw as Law
from lhsac.dynamics import Variant, kernel_args


def setup(n, d, seed=0):
    rng = np.random.default_rng(seed)
    e = core.sample_initial(core.InitRecipe(n, d, spread=0.5, kappa_range=(0.5, 1.5),
                                            lambda_rule="range", lambda_range=(-0.5, 0.5)), seed)
    p = core.ModelParams(core.random_skew_hermitian(d + 1, rng), 0.5, 0.7, 1.0, 0.8,
                         Law.HEBBIAN, Law.ANTI_HEBBIAN)
    return e, kernel_args(Variant.FULL, p)


def best_of(impl, steps, e, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = impl.advance(steps, 1e-3, e.states, e.kappa, e.lam, *args, True)
        best = min(best, time.perf_counter() - t0)
    return best, out[0]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--dim", type=int, default=2)
    a = ap.parse_args()
    if numba_impl is None:
        raise SystemExit("numba is not installed")

    # warm-up compiles (or loads the cache)
    e, args = setup(3, a.dim)
    numba_impl.advance(1, 1e-3, e.states, e.kappa, e.lam, *args, True)

    print(f"{'N':>4} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8} {'max|dZ|':>10}")
    for n in (5, 16, 64):
        e, args = setup(n, a.dim)
        t_np, z_np = best_of(numpy_impl, a.steps, e, args, a.repeat)
        t_nb, z_nb = best_of(numba_impl, a.steps, e, args, a.repeat)
        diff = float(np.max(np.abs(z_np - z_nb)))
        print(f"{n:>4} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>8.1f} {diff:>10.1e}")


if __name__ == "__main__":
    main()
