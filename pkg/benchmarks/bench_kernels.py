"""Timing comparison of the compiled kernels against the pure-Python
fallback on the two hot paths: tridiagonal bisection eigenvalues of the
cosh-well discretization, and the fixed-step RK4 geodesic loop.

Run as a script:  python3 benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from solspec._kernels import fallback

try:
    from solspec._kernels import _native as native
except ImportError:
    native = None


def _best_of(fn, repeats=3):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def _cosh_well(nu_abs, mu, Z, N):
    z = np.linspace(-Z, Z, N)
    h = z[1] - z[0]
    diag = 2.0 / (h * h) + nu_abs * np.cosh(2.0 * mu * z)
    off = np.full(N - 1, -1.0 / (h * h))
    return diag, off


def bench_tridiag(N=8000, kmax=25):
    nu, mu = 35.0, math.log((3.0 + math.sqrt(5.0)) / 2.0)
    diag, off = _cosh_well(nu, mu, 6.0, N)
    lo = float(diag.min()) - 1.0
    hi = float(nu * math.cosh(2.0 * mu * 6.0))
    args = (kmax, lo, hi, 1e-10)
    rows = []
    py = _best_of(lambda: fallback.tridiag_eigenvalues(diag, off, *args))
    rows.append(("python", py, None))
    if native is not None:
        nat = _best_of(lambda: native.tridiag_eigenvalues(diag, off, *args))
        rows.append(("native", nat, py / nat))
        a = np.asarray(fallback.tridiag_eigenvalues(diag, off, *args))
        b = np.asarray(native.tridiag_eigenvalues(diag, off, *args))
        assert np.max(np.abs(a - b)) < 1e-6 * max(1.0, np.max(np.abs(a)))
    return f"tridiag bisection (N={N}, kmax={kmax})", rows


def bench_rk4(nsteps=200_000):
    mu = math.log((3.0 + math.sqrt(5.0)) / 2.0)
    y0 = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
    args = (1.0, 0.0, 1.0, mu, 1e-3, nsteps, nsteps)
    rows = []
    py = _best_of(lambda: fallback.rk4_geodesic(y0, *args))
    rows.append(("python", py, None))
    if native is not None:
        nat = _best_of(lambda: native.rk4_geodesic(y0, *args))
        rows.append(("native", nat, py / nat))
        a = np.asarray(fallback.rk4_geodesic(y0, *args)[0])
        b = np.asarray(native.rk4_geodesic(y0, *args)[0])
        assert np.max(np.abs(a - b)) < 1e-9
    return f"rk4 geodesic ({nsteps} steps)", rows


def main():
    if native is None:
        print("compiled extension not importable; timing the fallback only")
    for title, rows in (bench_tridiag(), bench_rk4()):
        print(title)
        for name, secs, speedup in rows:
            extra = f"   {speedup:6.1f}x" if speedup is not None else ""
            print(f"  {name:7s} {secs * 1e3:9.1f} ms{extra}")
        print()


if __name__ == "__main__":
    main()
