"""Geometry of a torus bundle with hyperbolic gluing.

A gluing matrix A (integer, det 1, trace > 2) and a flat fibre metric
(alpha, beta, gamma) determine everything downstream: the expansion rate
lam and mu = ln lam, the eigenbasis and its dual, the dual-metric
coefficients E, F, G, the angle theta between the dual directions, the
fibre area, and the coupling constant c.  Dual-lattice points gamma are
classified by the transpose action; `orbit_enumerate` returns one
representative per orbit up to a bound on |Q(gamma)|.
"""

import math
from dataclasses import dataclass

from .errors import ResourceError, ValidationError
from .qforms import (
    QuadraticForm,
    as_int_matrix,
    form_from_matrix,
    mat_pow,
    mat_transpose,
    mat_vec,
)


@dataclass(frozen=True)
class GluingMap:
    """Integer 2x2 matrix, determinant 1, trace > 2."""

    a11: int
    a12: int
    a21: int
    a22: int

    def __post_init__(self):
        t = self.a11 + self.a22
        det = self.a11 * self.a22 - self.a12 * self.a21
        if det != 1:
            raise ValidationError(f"gluing map must have determinant 1, got {det}")
        if t <= 2:
            raise ValidationError(
                f"gluing map must be hyperbolic with positive eigenvalues "
                f"(trace > 2), got trace {t}")

    @classmethod
    def from_matrix(cls, m):
        (a, b), (c, d) = as_int_matrix(m)
        return cls(a, b, c, d)

    def matrix(self):
        return ((self.a11, self.a12), (self.a21, self.a22))

    @property
    def trace(self):
        return self.a11 + self.a22

    @property
    def discriminant(self):
        return self.trace * self.trace - 4


@dataclass(frozen=True)
class FibreMetric:
    """Flat metric on the fibre at height zero: alpha dx^2 + 2 beta dxdy + gamma dy^2."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        a, b, g = float(self.alpha), float(self.beta), float(self.gamma)
        if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(g)):
            raise ValidationError("fibre metric entries must be finite")
        if a <= 0 or g <= 0 or a * g - b * b <= 0:
            raise ValidationError(
                f"fibre metric must be positive definite, got ({a}, {b}, {g})")

    def gram(self):
        return ((float(self.alpha), float(self.beta)),
                (float(self.beta), float(self.gamma)))


@dataclass(frozen=True)
class Geometry:
    lam: float
    mu: float
    D: int
    trace: int
    e_u: tuple
    e_v: tuple
    e_u_star: tuple
    e_v_star: tuple
    E: float
    F: float
    G: float
    cos_theta: float
    sin_theta: float
    area: float
    c: float
    qform: QuadraticForm       # the transpose-side form evaluated on dual points
    a_star: tuple              # transpose of the gluing matrix

    def to_dict(self):
        return {
            "lambda": self.lam, "mu": self.mu, "D": self.D, "trace": self.trace,
            "e_u": list(self.e_u), "e_v": list(self.e_v),
            "e_u_star": list(self.e_u_star), "e_v_star": list(self.e_v_star),
            "E": self.E, "F": self.F, "G": self.G,
            "cos_theta": self.cos_theta, "sin_theta": self.sin_theta,
            "area": self.area, "c": self.c,
            "qform": list(self.qform.coeffs()),
        }


@dataclass(frozen=True)
class OrbitRep:
    gamma: tuple
    qvalue: int
    alpha: float
    nu: float
    p: float
    q: float


def _as_gluing(A):
    if isinstance(A, GluingMap):
        return A
    return GluingMap.from_matrix(A)


def _as_metric(m):
    if isinstance(m, FibreMetric):
        return m
    a, b, g = m
    return FibreMetric(float(a), float(b), float(g))


def q_dual(A):
    """Quadratic form attached to the transpose matrix; this is the form
    whose values on integer points drive the spectrum."""
    A = _as_gluing(A)
    return form_from_matrix(mat_transpose(A.matrix()))


def geometry(A, m):
    """Build the full geometric data from a gluing map and fibre metric.

    The eigenbasis is normalized so e_u is the unit expanding eigenvector
    (sign fixed by a positive first nonzero component) and e_v spans the
    contracting direction with det[e_u e_v] = 1.  That unimodular choice
    makes p*q*sqrt(D) = Q(gamma) exact and the dual parallelogram area the
    inverse of the fibre area.
    """
    A = _as_gluing(A)
    m = _as_metric(m)
    a, b = A.a11, A.a12
    t = A.trace
    D = A.discriminant
    sqD = math.sqrt(D)
    lam = (t + sqD) / 2.0
    mu = math.log(lam)

    # b != 0 whenever det = 1 and trace > 2, so (b, lam - a) always works
    ru = (float(b), lam - a)
    nu_ = math.hypot(*ru)
    e_u = (ru[0] / nu_, ru[1] / nu_)
    if e_u[0] < 0 or (e_u[0] == 0 and e_u[1] < 0):
        e_u = (-e_u[0], -e_u[1])
    rv = (float(b), 1.0 / lam - a)
    det_uv = e_u[0] * rv[1] - e_u[1] * rv[0]
    e_v = (rv[0] / det_uv, rv[1] / det_uv)

    e_u_star = (e_v[1], -e_v[0])
    e_v_star = (-e_u[1], e_u[0])

    (ga, gb), (_, gg) = m.gram()
    det_g = ga * gg - gb * gb
    # inverse Gram, contracted with the dual pair
    i11, i12, i22 = gg / det_g, -gb / det_g, ga / det_g

    def pair(x, y):
        return (i11 * x[0] * y[0] + i12 * (x[0] * y[1] + x[1] * y[0])
                + i22 * x[1] * y[1])

    E = pair(e_u_star, e_u_star)
    F = pair(e_u_star, e_v_star)
    G = pair(e_v_star, e_v_star)
    cos_t = F / math.sqrt(E * G)
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    area = math.sqrt(det_g)
    c = 1.0 / (sqD * area * sin_t)

    Q = q_dual(A)
    # sanity: unimodular normalization forces Q(gamma) = sqrt(D) * p * q
    ptest = e_u[0] * 1.0
    qtest = e_v[0] * 1.0
    kappa = Q(1, 0) / (ptest * qtest)
    if abs(kappa - sqD) > 1e-9 * sqD:
        raise AssertionError("eigenbasis normalization lost the form identity")

    return Geometry(lam=lam, mu=mu, D=D, trace=t, e_u=e_u, e_v=e_v,
                    e_u_star=e_u_star, e_v_star=e_v_star, E=E, F=F, G=G,
                    cos_theta=cos_t, sin_theta=sin_t, area=area, c=c,
                    qform=Q, a_star=mat_transpose(A.matrix()))


def curvature(geom):
    """Scalar curvature of the bundle metric; always negative."""
    s = geom.sin_theta * geom.mu
    return -2.0 * s * s


def eigencoords(geom, gamma):
    """(p, q) = pairings of the dual-lattice point with e_u and e_v."""
    g0, g1 = float(gamma[0]), float(gamma[1])
    p = g0 * geom.e_u[0] + g1 * geom.e_u[1]
    q = g0 * geom.e_v[0] + g1 * geom.e_v[1]
    return p, q


def nu_alpha(geom, gamma):
    """Spectral parameters of a dual-lattice point: the oscillator strength
    nu = 8 pi^2 c Q(gamma) and the well-centre offset alpha."""
    g0, g1 = int(gamma[0]), int(gamma[1])
    if g0 == 0 and g1 == 0:
        raise ValidationError("nu/alpha undefined at the zero lattice point")
    nu = 8.0 * math.pi ** 2 * geom.c * geom.qform(g0, g1)
    p, q = eigencoords(geom, gamma)
    alpha = math.log(math.sqrt(geom.E / geom.G) * abs(p / q)) / (2.0 * geom.mu)
    return nu, alpha


def strip_reduce(geom, gamma):
    """Canonical orbit representative with 1 <= |p| < lam.

    Returns (gamma_reduced, k) where gamma = (A*)^k gamma_reduced; the
    matrix powers act exactly on integers, only the window test is float.
    """
    g0, g1 = int(gamma[0]), int(gamma[1])
    if g0 == 0 and g1 == 0:
        raise ValidationError("cannot reduce the zero lattice point")
    p, _ = eigencoords(geom, (g0, g1))
    k = math.floor(math.log(abs(p)) / geom.mu)
    red = mat_vec(mat_pow(geom.a_star, -k), (g0, g1))
    pr, _ = eigencoords(geom, red)
    for _ in range(3):
        if abs(pr) < 1.0:
            k -= 1
        elif abs(pr) >= geom.lam:
            k += 1
        else:
            return (red[0], red[1]), k
        red = mat_vec(mat_pow(geom.a_star, -k), (g0, g1))
        pr, _ = eigencoords(geom, red)
    raise AssertionError("strip reduction failed to settle")


def orbit_enumerate(geom, A, qmax):
    """One representative per transpose-orbit of nonzero dual-lattice points
    with |Q(gamma)| <= qmax, strip-reduced and sorted by (|Q|, gamma).

    The count grows like (4 mu / sqrt(D)) * qmax.
    """
    A = _as_gluing(A)
    qmax = int(qmax)
    if qmax < 1:
        raise ValidationError("qmax must be a positive integer")
    sqD = math.sqrt(geom.D)
    qbound = qmax / sqD
    # gamma = p*h_u + q*h_v with (h_u, h_v) the dot-product dual of (e_u, e_v)
    h_u = (geom.e_v[1], -geom.e_v[0])
    h_v = (-geom.e_u[1], geom.e_u[0])
    pad = 1e-9
    m_span = (geom.lam + pad) * abs(h_u[0]) + (qbound + pad) * abs(h_v[0])
    m_lo, m_hi = -math.ceil(m_span), math.ceil(m_span)
    if (m_hi - m_lo) > 5e7:
        raise ResourceError(
            f"qmax={qmax} needs a candidate range of {m_hi - m_lo} columns; "
            "refusing (cap 5e7)")

    eu0, eu1 = geom.e_u
    lam = geom.lam
    Q = geom.qform
    seen = set()
    reps = []
    for m in range(m_lo, m_hi + 1):
        # strip window 1 <= |p| <= lam gives two n-intervals at fixed m
        base = m * eu0
        for lo, hi in ((1.0 - pad, lam + pad), (-lam - pad, -1.0 + pad)):
            if eu1 > 0:
                n_lo = (lo - base) / eu1
                n_hi = (hi - base) / eu1
            else:
                n_lo = (hi - base) / eu1
                n_hi = (lo - base) / eu1
            for n in range(math.ceil(n_lo), math.floor(n_hi) + 1):
                if m == 0 and n == 0:
                    continue
                qv = Q(m, n)
                if abs(qv) > qmax:
                    continue
                red, _ = strip_reduce(geom, (m, n))
                if red in seen:
                    continue
                seen.add(red)
                nu, alpha = nu_alpha(geom, red)
                p, q = eigencoords(geom, red)
                reps.append(OrbitRep(gamma=red, qvalue=qv, alpha=alpha,
                                     nu=nu, p=p, q=q))
    reps.sort(key=lambda r: (abs(r.qvalue), r.gamma))
    return reps
