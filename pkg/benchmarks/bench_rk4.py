"""Time the numba and numpy RK4 kernels on the same workload.

    python benchmarks/bench_rk4.py [--nk 256] [--steps 4096] [--repeat 5]

Both kernels integrate psi'' = (V - k^2) psi across a square well of depth
20 for ``nk`` wavenumbers and report the best wall time of ``repeat`` runs
plus the largest relative difference between the two results.
"""
import argparse
import time

import numpy as np

from lineinv import _kernels
from lineinv.potentials import SquareWell


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nk", type=int, default=256)
    ap.add_argument("--steps", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    mesh = SquareWell(20.0).mesh(1.0 / args.steps)
    k = np.linspace(0.1, 20.0, args.nk).astype(complex)
    e = np.exp(1j * k * mesh.b)
    work = (*mesh.leftward(), k * k, e, 1j * k * e)

    if not _kernels.HAVE_NUMBA:
        print("numba not importable; only the numpy kernel is available")
    _kernels.rk4_profile_numba(*work)  # compile outside the timing
    t_nb, (p_nb, _) = best_of(lambda: _kernels.rk4_profile_numba(*work), args.repeat)
    t_np, (p_np, _) = best_of(lambda: _kernels.rk4_profile_numpy(*work), args.repeat)
    diff = float(np.max(np.abs(p_nb - p_np) / np.maximum(np.abs(p_np), 1e-300)))

    print(f"workload: {args.nk} wavenumbers x {mesh.x.size - 1} steps")
    print(f"numba  {t_nb * 1e3:10.2f} ms")
    print(f"numpy  {t_np * 1e3:10.2f} ms")
    print(f"speedup {t_np / t_nb:8.1f}x   max rel diff {diff:.1e}")


if __name__ == "__main__":
    main()
