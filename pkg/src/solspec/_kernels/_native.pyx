# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops.

Two kernels dominate the package runtime: Sturm-count bisection for the
lowest eigenvalues of a symmetric tridiagonal matrix (the discretized
oscillator solves) and the fixed-step RK4 geodesic integrator.  The
pure-Python module `fallback` implements the same contract.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs

BACKEND_NAME = "native"


cdef int _count_below(const double* d, const double* e2, Py_ssize_t n,
                      double x, double pivmin) noexcept nogil:
    # Sturm sequence: number of eigenvalues strictly below x
    cdef double q = d[0] - x
    cdef int cnt = 0
    cdef Py_ssize_t i
    if q < 0.0:
        cnt = 1
    for i in range(1, n):
        if fabs(q) < pivmin:
            q = -pivmin
        q = d[i] - x - e2[i - 1] / q
        if q < 0.0:
            cnt += 1
    return cnt


def tridiag_eigenvalues(double[::1] diag, double[::1] offdiag, int kmax,
                        double lo, double hi, double reltol):
    """First kmax eigenvalues (ascending) of the symmetric tridiagonal
    matrix with the given diagonal and off-diagonal, by bisection on the
    Sturm count.  [lo, hi] must bracket all kmax of them."""
    cdef Py_ssize_t n = diag.shape[0]
    if offdiag.shape[0] != n - 1:
        raise ValueError("offdiag must have length n-1")
    if kmax < 1 or kmax > n:
        raise ValueError("kmax out of range")
    out = np.empty(kmax, dtype=np.float64)
    cdef double[::1] lam = out
    cdef double[::1] e2v = np.ascontiguousarray(np.asarray(offdiag) ** 2)
    cdef double pivmin = 1e-300
    cdef Py_ssize_t i
    for i in range(n - 1):
        if e2v[i] * 2.23e-308 > pivmin:
            pivmin = e2v[i] * 2.23e-308
    cdef double a, b, mid, tol
    cdef int k, cnt, it
    cdef const double* dp = &diag[0]
    cdef const double* ep = &e2v[0] if n > 1 else NULL
    with nogil:
        for k in range(kmax):
            a = lo
            b = hi
            for it in range(220):
                mid = 0.5 * (a + b)
                tol = reltol * (fabs(mid) if fabs(mid) > 1.0 else 1.0)
                if b - a <= tol or mid == a or mid == b:
                    break
                cnt = _count_below(dp, ep, n, mid, pivmin)
                if cnt <= k:
                    a = mid
                else:
                    b = mid
            lam[k] = 0.5 * (a + b)
            lo = lam[k]  # eigenvalues ascend; reuse as lower bound
    return out


def sturm_count(double[::1] diag, double[::1] offdiag, double x):
    """Number of eigenvalues strictly below x (exposed for tests)."""
    cdef double[::1] e2v = np.ascontiguousarray(np.asarray(offdiag) ** 2)
    cdef Py_ssize_t n = diag.shape[0]
    cdef const double* ep = &e2v[0] if n > 1 else NULL
    return _count_below(&diag[0], ep, n, x, 1e-300)


def rk4_geodesic(double[::1] y0, double E, double F, double G, double mu,
                 double h, long nsteps, long stride):
    """Integrate the geodesic equations from y0 = (u, v, z, p_u, p_v, p_z).

    p_u and p_v are exact constants of the motion; the remaining system is
    (u, v, z, p_z).  Returns (samples, max_H_drift) where samples has one
    row (t, u, v, z, p_z) per recorded step including step 0, and the
    drift is max |H - H0| over every step taken.
    """
    if h <= 0.0 or nsteps < 1 or stride < 1:
        raise ValueError("need h > 0, nsteps >= 1, stride >= 1")
    cdef double u = y0[0], v = y0[1], z = y0[2]
    cdef double pu = y0[3], pv = y0[4], pz = y0[5]
    cdef Py_ssize_t nsamp = nsteps // stride + 1 + (1 if nsteps % stride else 0)
    out = np.empty((nsamp, 5), dtype=np.float64)
    cdef double[:, ::1] s = out
    cdef double eu0 = exp(2.0 * mu * z), gv0 = exp(-2.0 * mu * z)
    cdef double H0 = 0.5 * (E * eu0 * pu * pu + 2.0 * F * pu * pv
                            + G * gv0 * pv * pv) + 0.5 * pz * pz
    cdef double drift = 0.0, H
    cdef double eu, gv
    cdef double ku1, kv1, kz1, kp1
    cdef double ku2, kv2, kz2, kp2
    cdef double ku3, kv3, kz3, kp3
    cdef double ku4, kv4, kz4, kp4
    cdef double z2, pz2, z3, pz3, z4, pz4
    cdef long step
    cdef Py_ssize_t row = 0
    s[0, 0] = 0.0
    s[0, 1] = u
    s[0, 2] = v
    s[0, 3] = z
    s[0, 4] = pz
    row = 1
    with nogil:
        for step in range(1, nsteps + 1):
            eu = exp(2.0 * mu * z)
            gv = exp(-2.0 * mu * z)
            ku1 = E * eu * pu + F * pv
            kv1 = F * pu + G * gv * pv
            kz1 = pz
            kp1 = -mu * (E * eu * pu * pu - G * gv * pv * pv)

            z2 = z + 0.5 * h * kz1
            pz2 = pz + 0.5 * h * kp1
            eu = exp(2.0 * mu * z2)
            gv = exp(-2.0 * mu * z2)
            ku2 = E * eu * pu + F * pv
            kv2 = F * pu + G * gv * pv
            kz2 = pz2
            kp2 = -mu * (E * eu * pu * pu - G * gv * pv * pv)

            z3 = z + 0.5 * h * kz2
            pz3 = pz + 0.5 * h * kp2
            eu = exp(2.0 * mu * z3)
            gv = exp(-2.0 * mu * z3)
            ku3 = E * eu * pu + F * pv
            kv3 = F * pu + G * gv * pv
            kz3 = pz3
            kp3 = -mu * (E * eu * pu * pu - G * gv * pv * pv)

            z4 = z + h * kz3
            pz4 = pz + h * kp3
            eu = exp(2.0 * mu * z4)
            gv = exp(-2.0 * mu * z4)
            ku4 = E * eu * pu + F * pv
            kv4 = F * pu + G * gv * pv
            kz4 = pz4
            kp4 = -mu * (E * eu * pu * pu - G * gv * pv * pv)

            u += h * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4) / 6.0
            v += h * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4) / 6.0
            z += h * (kz1 + 2.0 * kz2 + 2.0 * kz3 + kz4) / 6.0
            pz += h * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4) / 6.0

            eu = exp(2.0 * mu * z)
            gv = exp(-2.0 * mu * z)
            H = 0.5 * (E * eu * pu * pu + 2.0 * F * pu * pv
                       + G * gv * pv * pv) + 0.5 * pz * pz
            if fabs(H - H0) > drift:
                drift = fabs(H - H0)
            if step % stride == 0 or step == nsteps:
                s[row, 0] = step * h
                s[row, 1] = u
                s[row, 2] = v
                s[row, 3] = z
                s[row, 4] = pz
                row += 1
    return out[:row], drift
