"""Pure-Python kernels mirroring the compiled extension.

Same contract as `_native`: Sturm-count bisection for tridiagonal
eigenvalues and a fixed-step RK4 geodesic integrator.  The bisections for
all kmax levels run in lockstep as numpy vector operations so the O(n)
Sturm sweep is shared; the integrator is a plain float loop.
"""

import math

import numpy as np

BACKEND_NAME = "python"


def _counts(diag, e2, xs, pivmin):
    # Sturm counts below each shift in xs, one vectorized sweep
    q = diag[0] - xs
    cnt = (q < 0.0).astype(np.int64)
    for i in range(1, diag.shape[0]):
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        q = diag[i] - xs - e2[i - 1] / q
        cnt += q < 0.0
    return cnt


def sturm_count(diag, offdiag, x):
    """Number of eigenvalues strictly below x (exposed for tests)."""
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    e2 = np.ascontiguousarray(offdiag, dtype=np.float64) ** 2
    pivmin = max(1e-300, float(e2.max(initial=0.0)) * 2.23e-308)
    return int(_counts(diag, e2, np.array([float(x)]), pivmin)[0])


def tridiag_eigenvalues(diag, offdiag, kmax, lo, hi, reltol):
    """First kmax eigenvalues (ascending) of the symmetric tridiagonal
    matrix with the given diagonal and off-diagonal, by bisection on the
    Sturm count.  [lo, hi] must bracket all kmax of them."""
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    e2 = np.ascontiguousarray(offdiag, dtype=np.float64) ** 2
    n = diag.shape[0]
    if e2.shape[0] != n - 1:
        raise ValueError("offdiag must have length n-1")
    if kmax < 1 or kmax > n:
        raise ValueError("kmax out of range")
    pivmin = max(1e-300, float(e2.max(initial=0.0)) * 2.23e-308)
    ks = np.arange(kmax)
    a = np.full(kmax, float(lo))
    b = np.full(kmax, float(hi))
    for _ in range(220):
        mid = 0.5 * (a + b)
        tol = reltol * np.maximum(np.abs(mid), 1.0)
        open_ = (b - a > tol) & (mid > a) & (mid < b)
        if not open_.any():
            break
        cnt = _counts(diag, e2, mid, pivmin)
        below = open_ & (cnt <= ks)
        above = open_ & (cnt > ks)
        a[below] = mid[below]
        b[above] = mid[above]
    return 0.5 * (a + b)


def rk4_geodesic(y0, E, F, G, mu, h, nsteps, stride):
    """Integrate the geodesic equations from y0 = (u, v, z, p_u, p_v, p_z).

    p_u and p_v are exact constants of the motion; the remaining system is
    (u, v, z, p_z).  Returns (samples, max_H_drift) where samples has one
    row (t, u, v, z, p_z) per recorded step including step 0, and the
    drift is max |H - H0| over every step taken.
    """
    if h <= 0.0 or nsteps < 1 or stride < 1:
        raise ValueError("need h > 0, nsteps >= 1, stride >= 1")
    u, v, z, pu, pv, pz = (float(c) for c in y0)
    exp = math.exp

    def energy(zz, pzz):
        return 0.5 * (E * exp(2.0 * mu * zz) * pu * pu + 2.0 * F * pu * pv
                      + G * exp(-2.0 * mu * zz) * pv * pv) + 0.5 * pzz * pzz

    H0 = energy(z, pz)
    drift = 0.0
    nsamp = nsteps // stride + 1 + (1 if nsteps % stride else 0)
    out = np.empty((nsamp, 5), dtype=np.float64)
    out[0] = (0.0, u, v, z, pz)
    row = 1
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

        d = abs(energy(z, pz) - H0)
        if d > drift:
            drift = d
        if step % stride == 0 or step == nsteps:
            out[row] = (step * h, u, v, z, pz)
            row += 1
    return out[:row], drift
