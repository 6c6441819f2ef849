"""Compare the numba and pure-numpy backends of the two hot kernels.

    python benchmarks/bench_kernels.py [--repeat 3]

Kernels: collision transfer amplitudes (one incident energy on the default
32 x 64 direction grid) and the order-6 coefficient sweep of the oracle on
the default 12 x 2 x 3 mode grid. JIT compilation is excluded by a warm-up
call. Both backends must agree to 1e-12 relative.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from wavecascade import _kernels
from wavecascade.collision import CollisionGeometry, CollisionKernel, TargetManifold
from wavecascade.ionization import EnergyGrid
from wavecascade.oracle import cascade_system, propagate


def _best(fn, repeat: int) -> tuple[float, object]:
    out = fn()
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_transfer(repeat: int):
    grid = EnergyGrid(np.array([15.70, 15.755]))

    def run():
        return CollisionKernel(grid, TargetManifold(), CollisionGeometry(), brute=True).transfer

    return _best(run, repeat)


def bench_oracle(repeat: int):
    rho = np.zeros((5, 5), dtype=complex)
    rho[2, 2] = 1.0
    system = cascade_system(rho)

    def run():
        return propagate(system, 6, 2.0).final[0][1]

    return _best(run, repeat)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    print(f"{'kernel':<12}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'max rel diff':>15}")
    prev = _kernels.backend()
    try:
        for name, bench in (("transfer", bench_transfer), ("dyson", bench_oracle)):
            _kernels.set_backend("numba")
            t_nb, out_nb = bench(args.repeat)
            _kernels.set_backend("numpy")
            t_np, out_np = bench(args.repeat)
            diff = float(np.abs(out_nb - out_np).max() / np.abs(out_np).max())
            print(f"{name:<12}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}{diff:>15.2e}")
            if diff > 1e-12:
                print(f"  backends disagree on {name}")
                return 1
    finally:
        _kernels.set_backend(prev)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
