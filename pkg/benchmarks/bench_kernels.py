"""Compare the compiled and pure-numpy kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat N]

Times the RK4 reference integrator (1 s of Earth-gradient evolution at
h = 1e-4 s) and the 512 x 512 phase-space quadrature, checks that both
backends agree, and prints a small table.
"""
import argparse
import time

import numpy as np

from lpai import kernels
from lpai.symplectic import J


def _rk4_case(h=1e-4, span=1.0, gamma=1.54e-6, m=1.443e-25):
    n = int(round(span / h))
    H = np.zeros((6, 6))
    H[:3, :3] = m * np.diag([gamma, gamma, -2 * gamma])
    H[3:, 3:] = np.eye(3) / m
    M = np.broadcast_to(J @ H, (2 * n + 1, 6, 6)).copy()
    return (M, np.eye(6), h)


def _grid_case(n=512):
    xs = np.linspace(-8e-4, 8e-4, n)
    ps = np.linspace(-4e-28, 4e-28, n)
    W = np.exp(-0.5 * (xs[:, None] / 1e-4) ** 2 - 0.5 * (ps[None, :] / 5e-29) ** 2)
    # fringe frequencies well resolved by the grid (no cancellation to ~0)
    return (W, xs, ps, 0.3, 1.0e3, 1.0e28)


def _best(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    cases = {"rk4_linear": _rk4_case(), "trapz2_cos": _grid_case()}
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'kernel':<12} {'backend':<8} {'best [ms]':>10} {'speed-up':>9} {'max rel diff':>13}")
    for name, case in cases.items():
        ref_time = ref_out = None
        for b in ["python"] + [x for x in backends if x != "python"]:
            kernels.use_backend(b)
            dt, out = _best(getattr(kernels, name), case, args.repeat)
            out = np.asarray(out, dtype=float)
            if ref_out is None:
                ref_time, ref_out = dt, out
                diff = 0.0
            else:
                diff = float(np.max(np.abs(out - ref_out)) / np.max(np.abs(ref_out)))
            print(f"{name:<12} {b:<8} {1e3 * dt:10.2f} {ref_time / dt:9.1f} {diff:13.2e}")
    kernels.use_backend(backends[0] if "cython" not in backends else "cython")


if __name__ == "__main__":
    main()
