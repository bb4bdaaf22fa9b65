"""Compare the numba kernels with their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is run once on both paths to warm up compilation, then timed;
the table reports the best wall time per path and the largest difference
between the two results.
"""

import argparse
import time

import numpy as np

from qmarkov import _kernels
from qmarkov.channel import random_channel
from qmarkov.classify import pure_state_grid
from qmarkov.corpus import aklt_tuple
from qmarkov.invariant import invariant_states


def cases():
    ch = random_channel(4, 3, seed=0)
    rho = invariant_states(ch).canonical.rho
    x = np.arange(16, dtype=complex).reshape(4, 4)
    grid = pure_state_grid(4)
    aklt = aklt_tuple()
    yield "apply_kraus n=4 d=3", lambda nb: _kernels.apply_kraus(ch.kraus, x, use_numba=nb)
    yield "word_products d=3 m=6", lambda nb: _kernels.word_products(aklt.kraus, 6, use_numba=nb)
    yield "trace_norm_series h=400", lambda nb: _kernels.trace_norm_series(
        ch.predual_superop, grid, rho, 400, use_numba=nb)
    yield "two_point_series h=200", lambda nb: _kernels.two_point_series(ch.superop, rho, 200, use_numba=nb)


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy path is available")
    print(f"{'kernel':28s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, run in cases():
        t_np, r_np = best_time(lambda: run(False), args.repeat)
        if _kernels.HAVE_NUMBA:
            run(True)
            t_nb, r_nb = best_time(lambda: run(True), args.repeat)
            diff = float(np.abs(np.asarray(r_np) - np.asarray(r_nb)).max())
            print(f"{name:28s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.1f} {diff:10.2e}")
        else:
            print(f"{name:28s} {1e3 * t_np:11.3f} {'-':>11s} {'-':>8s} {'-':>10s}")


if __name__ == "__main__":
    main()
