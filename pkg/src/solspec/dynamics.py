"""Geodesic flow: Hamiltonian integration, conserved quantities, the
bifurcation circles, caustic heights, the petal map of the dual lattice,
and monodromy extraction by parallel transport around its singular point.

The fibre momenta p_u, p_v (components along the stretching and shrinking
eigendirections) are exact constants of the motion, so the flow reduces to
a one-degree-of-freedom well in (z, p_z) with effective potential
sqrt(EG) |Q| cosh(2 mu (z + alpha)) + F Q, Q = p_u p_v.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import rk4_geodesic
from .errors import ConvergenceError, ResourceError, ValidationError
from .manifold import eigencoords
from .qforms import mat_pow, mat_vec
from .util import csv_text, write_csv

TRAJECTORY_HEADER = ("t", "u", "v", "z", "p_u", "p_v", "p_z", "H", "Q")
FLOWER_HEADER = ("gamma_x", "gamma_y", "F1", "F2", "Q")


@dataclass(frozen=True)
class PhasePoint:
    u: float
    v: float
    z: float
    p_u: float
    p_v: float
    p_z: float

    def __post_init__(self):
        for name in ("u", "v", "z", "p_u", "p_v", "p_z"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")


def hamiltonian(pt, geom):
    """Kinetic energy of the geodesic flow at a phase point."""
    eu = math.exp(2.0 * geom.mu * pt.z)
    return 0.5 * (geom.E * eu * pt.p_u ** 2 + 2.0 * geom.F * pt.p_u * pt.p_v
                  + geom.G / eu * pt.p_v ** 2) + 0.5 * pt.p_z ** 2


def deck_transform(pt, geom, k=1):
    """The gluing symmetry on phase space: z shifts by k while the fibre
    eigencomponents rescale by lambda^k, leaving the Hamiltonian invariant.
    The well offset alpha of the momenta drops by k."""
    k = int(k)
    s = geom.lam ** k
    return PhasePoint(u=pt.u * s, v=pt.v / s, z=pt.z + k,
                      p_u=pt.p_u / s, p_v=pt.p_v * s, p_z=pt.p_z)


def momentum_alpha(p_u, p_v, geom):
    """Well-centre offset of a momentum pair; needs p_u p_v != 0."""
    if p_u == 0.0 or p_v == 0.0:
        raise ValidationError("alpha undefined when p_u p_v = 0")
    return math.log(math.sqrt(geom.E / geom.G) * abs(p_u / p_v)) / (2.0 * geom.mu)


def radius_R(Q):
    """Smooth radial profile sqrt|Q| exp(-1/Q^2); flat to all orders at 0."""
    q = abs(float(Q))
    if q == 0.0:
        return 0.0
    a = 1.0 / (q * q)
    if a > 745.0:
        return 0.0
    return math.sqrt(q) * math.exp(-a)


def invariants(pt, geom):
    """(Q, alpha, f1, f2): the conserved product, the well offset, and the
    smooth single-valued pair f = R(Q) (cos 2 pi alpha, sin 2 pi alpha).

    On Q = 0 the smooth extension (f1, f2) = (0, 0) is returned and alpha
    is NaN (undefined).
    """
    Q = pt.p_u * pt.p_v
    if Q == 0.0:
        return 0.0, math.nan, 0.0, 0.0
    alpha = momentum_alpha(pt.p_u, pt.p_v, geom)
    R = radius_R(Q)
    return Q, alpha, R * math.cos(2.0 * math.pi * alpha), \
        R * math.sin(2.0 * math.pi * alpha)


def bifurcation_radii(geom):
    """(R_plus, R_minus, Q_plus, Q_minus): critical values of Q where the
    reduced well degenerates, Q = 1/(F +- sqrt(EG)), and the radii of the
    two circles they trace in the (f1, f2) plane."""
    root = math.sqrt(geom.E * geom.G)
    qp = 1.0 / (geom.F + root)
    qm = 1.0 / (geom.F - root)
    return radius_R(qp), radius_R(qm), qp, qm


_FAMILY_SIGNS = {"L1": ("plus", 1), "L2": ("plus", -1),
                 "L3": ("minus", 1), "L4": ("minus", -1)}


def critical_family_points(geom, family, count=8):
    """Sample points of one of the four critical one-parameter families:
    momenta on the hyperbola p_u p_v = Q*, z at the well bottom, p_z = 0.
    Each point has H = 1 and its invariants sit on the matching circle.

    Families L1/L2 use the positive critical Q with p_u > 0 / p_u < 0,
    L3/L4 the negative one.
    """
    if family not in _FAMILY_SIGNS:
        raise ValidationError(f"family must be one of {sorted(_FAMILY_SIGNS)}")
    if count < 1:
        raise ValidationError("count must be positive")
    which, sgn = _FAMILY_SIGNS[family]
    _, _, qp, qm = bifurcation_radii(geom)
    qstar = qp if which == "plus" else qm
    pts = []
    for i in range(count):
        # one fundamental period of the hyperbola parameter
        s = sgn * geom.lam ** (i / count)
        p_u = s
        p_v = qstar / s
        z = -momentum_alpha(p_u, p_v, geom)
        pts.append(PhasePoint(u=0.0, v=0.0, z=z, p_u=p_u, p_v=p_v, p_z=0.0))
    return pts


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    z: np.ndarray
    p_z: np.ndarray
    H: np.ndarray
    p_u: float
    p_v: float
    h: float
    energy0: float
    h_drift: float
    q_drift: float
    status: str

    def __len__(self):
        return len(self.t)

    def rows(self):
        Q = self.p_u * self.p_v
        for i in range(len(self.t)):
            yield (self.t[i], self.u[i], self.v[i], self.z[i], self.p_u,
                   self.p_v, self.p_z[i], self.H[i], Q)

    def csv_text(self):
        return csv_text(TRAJECTORY_HEADER, self.rows())

    def write_csv(self, path):
        write_csv(path, TRAJECTORY_HEADER, self.rows())


DRIFT_WARN = 1e-6


def integrate(pt0, geom, T, h, stride=None):
    """Fixed-step RK4 over duration T.  p_u and p_v are carried as exact
    constants; the record stores the sampled states, the recomputed energy
    per sample, and the worst energy drift over every step taken.  A drift
    beyond 1e-6 marks the record with a step-too-large status instead of
    raising."""
    if not (h > 0 and math.isfinite(h)):
        raise ValidationError("step must be positive")
    if not T > 0:
        raise ValidationError("duration must be positive")
    nsteps = max(1, round(T / h))
    if stride is None:
        stride = max(1, nsteps // 2000)
    y0 = np.array([pt0.u, pt0.v, pt0.z, pt0.p_u, pt0.p_v, pt0.p_z],
                  dtype=np.float64)
    samples, drift = rk4_geodesic(y0, geom.E, geom.F, geom.G, geom.mu, h,
                                  nsteps, int(stride))
    samples = np.asarray(samples)
    t, u, v, z, pz = samples.T
    # runaway steps can underflow exp(2 mu z) to 0; keep the honest inf
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        eu = np.exp(2.0 * geom.mu * z)
        H = 0.5 * (geom.E * eu * pt0.p_u ** 2
                   + 2.0 * geom.F * pt0.p_u * pt0.p_v
                   + geom.G / eu * pt0.p_v ** 2) + 0.5 * pz ** 2
    return Trajectory(t=t, u=u, v=v, z=z, p_z=pz, H=H,
                      p_u=pt0.p_u, p_v=pt0.p_v, h=h, energy0=float(H[0]),
                      h_drift=float(drift), q_drift=0.0,
                      status="step-too-large" if drift > DRIFT_WARN else "ok")


def turning_points(p_u, p_v, h, geom):
    """Caustic heights (z_minus, z_plus) of the reduced well at energy h."""
    Q = p_u * p_v
    if Q == 0.0:
        raise ValidationError("turning points need p_u p_v != 0")
    root = math.sqrt(geom.E * geom.G)
    arg = (h - geom.F * Q) / (root * abs(Q))
    if arg < 1.0:
        raise ValidationError(
            f"no oscillation: energy {h} is below the well minimum "
            f"{root * abs(Q) + geom.F * Q} of these momenta")
    a = math.acosh(arg) / (2.0 * geom.mu)
    alpha = momentum_alpha(p_u, p_v, geom)
    return (-a - alpha, a - alpha)


@dataclass(frozen=True)
class FlowerPoint:
    F1: float
    F2: float
    gamma: tuple


def flower_map(p_u, p_v, mu):
    """Petal coordinates sqrt|Q| (cos 2 pi beta, sin 2 pi beta) with
    beta = ln|p_u| / mu; the p_u = 0 axis collapses to the origin."""
    if p_u == 0.0:
        return (0.0, 0.0)
    Q = p_u * p_v
    r = math.sqrt(abs(Q))
    beta = math.log(abs(p_u)) / mu
    return (r * math.cos(2.0 * math.pi * beta),
            r * math.sin(2.0 * math.pi * beta))


def flower_points(geom, box, qmax=None):
    """Petal images of every nonzero dual-lattice point in the coordinate
    box max(|x|, |y|) <= box, optionally filtered to |Q(gamma)| <= qmax."""
    box = int(box)
    if box < 1:
        raise ValidationError("box must be a positive integer")
    if (2 * box + 1) ** 2 > 4_000_000:
        raise ResourceError(f"box {box} enumerates too many lattice points")
    out = []
    for gx in range(-box, box + 1):
        for gy in range(-box, box + 1):
            if gx == 0 and gy == 0:
                continue
            if qmax is not None and abs(geom.qform(gx, gy)) > qmax:
                continue
            p, q = eigencoords(geom, (gx, gy))
            F1, F2 = flower_map(p, q, geom.mu)
            out.append(FlowerPoint(F1=F1, F2=F2, gamma=(gx, gy)))
    return out


def flower_csv_text(points, geom):
    rows = [(fp.gamma[0], fp.gamma[1], fp.F1, fp.F2,
             geom.qform(*fp.gamma)) for fp in points]
    return csv_text(FLOWER_HEADER, rows)


def write_flower_csv(points, geom, path):
    rows = [(fp.gamma[0], fp.gamma[1], fp.F1, fp.F2,
             geom.qform(*fp.gamma)) for fp in points]
    write_csv(path, FLOWER_HEADER, rows)


@dataclass(frozen=True)
class LoopSpec:
    """Circular transport loop.  turns > 0 winds against the petal angle
    (the direction in which the tracked label climbs one deck sheet per
    revolution); the convention is fixed so that a positive loop around
    the origin recovers the transpose gluing matrix for the standard test
    case rather than its inverse."""
    radius: float
    center: tuple = (0.0, 0.0)
    steps: int = 2000
    turns: int = 1

    def __post_init__(self):
        if not self.radius > 0:
            raise ValidationError("loop radius must be positive")
        if self.steps < 16:
            raise ValidationError("need at least 16 steps per loop")
        if self.turns == 0:
            raise ValidationError("turns must be a nonzero integer")


def monodromy_transport(flower, loop, geom):
    """Transport a lattice frame of the petal image around the loop and
    return the integer matrix taking the initial frame to the transported
    one.

    The base point hops along the loop from image point to image point
    while its integer label is tracked exactly: each hop is resolved by
    rounding in the local frame and confirmed against the recomputed petal
    position, so a wrong hop cannot pass silently.  Every label over a
    given petal position differs by a power of the transpose gluing map,
    and the label the walk comes home with determines that power, hence
    the transported frame.  Loops that do not enclose the origin return
    the identity.
    """
    if not flower:
        raise ValidationError("flower point set is empty")
    astar = geom.a_star
    mu = geom.mu

    cx, cy = loop.center
    # positive turns wind clockwise in (F1, F2), descending the deck sheet
    sense = -1.0 if loop.turns > 0 else 1.0
    nsteps = loop.steps * abs(loop.turns)
    dphi = sense * 2.0 * math.pi / loop.steps

    def target(k):
        ph = dphi * k
        return np.array([cx + loop.radius * math.cos(ph),
                         cy + loop.radius * math.sin(ph)])

    def fpos(g):
        return np.array(flower_map(*eigencoords(geom, g), mu))

    # anchor on the image point nearest the loop start; any deck label of
    # that position gives the same answer
    start = target(0)
    best = min(flower,
               key=lambda fp: (fp.F1 - start[0]) ** 2
               + (fp.F2 - start[1]) ** 2)
    g0 = (int(best.gamma[0]), int(best.gamma[1]))
    # renormalize to the smallest deck label: far sheets see the unit cell
    # through a hyperbolic shear too strong for the frame to resolve
    g0 = min((mat_vec(mat_pow(astar, n), g0) for n in range(-32, 33)),
             key=lambda v: abs(v[0]) + abs(v[1]))
    base0 = fpos(g0)
    if float(np.linalg.norm(base0 - start)) > 0.5 * float(np.hypot(*start)):
        raise ConvergenceError("no flower point near the loop start")

    def local_frame(g, C):
        b = fpos(g)
        return np.column_stack(
            [fpos((g[0] + int(C[0, j]), g[1] + int(C[1, j]))) - b
             for j in range(2)])

    def reduce_at(g, C, D):
        # shorten the working cell; candidates are recomputed from the map
        # since linear combinations of curved displacements are fictitious
        for _ in range(32):
            if D[:, 1] @ D[:, 1] < D[:, 0] @ D[:, 0]:
                D = D[:, ::-1].copy()
                C = C[:, ::-1].copy()
            den = float(D[:, 0] @ D[:, 0])
            if den == 0.0:
                raise ConvergenceError("degenerate frame on the loop")
            t = round(float(D[:, 0] @ D[:, 1]) / den)
            if t == 0:
                return C, D
            cnew = C[:, 1] - t * C[:, 0]
            cand = fpos((g[0] + int(cnew[0]), g[1] + int(cnew[1]))) - fpos(g)
            if cand @ cand >= D[:, 1] @ D[:, 1]:
                return C, D
            C = C.copy()
            D = D.copy()
            C[:, 1] = cnew
            D[:, 1] = cand
        return C, D

    g = g0
    pos = base0
    C = np.eye(2, dtype=np.int64)
    C, D = reduce_at(g, C, local_frame(g, C))
    for k in range(1, nsteps + 1):
        tk = target(k)
        for _ in range(3):
            s = np.rint(np.linalg.solve(D, tk - pos)).astype(np.int64)
            if not s.any():
                break
            hop = C @ s
            g = (g[0] + int(hop[0]), g[1] + int(hop[1]))
            pos = fpos(g)
            D = local_frame(g, C)
        # the straight segment from the ideal loop point to the walked
        # position must stay clear of the origin or the winding is wrong
        if float(np.linalg.norm(pos - tk)) > 0.5 * float(np.hypot(*tk)):
            raise ConvergenceError(
                f"lost the loop near angle {dphi * k:.3f}; the loop runs "
                "too close to the origin for this image density")
        C, D = reduce_at(g, C, D)

    # come home onto the starting position exactly
    for _ in range(4):
        if float(np.linalg.norm(pos - base0)) < 1e-9:
            break
        s = np.rint(np.linalg.solve(D, base0 - pos)).astype(np.int64)
        if not s.any():
            break
        hop = C @ s
        g = (g[0] + int(hop[0]), g[1] + int(hop[1]))
        pos = fpos(g)
        D = local_frame(g, C)
    if float(np.linalg.norm(pos - base0)) > 1e-9 * max(
            1.0, float(np.linalg.norm(base0))):
        raise ConvergenceError("transport failed to close the loop")

    # the returned label is a deck image of the start label; the frame a
    # loop of n sheets brings back is the -n-th power of the gluing action
    bound = 2 * abs(loop.turns) + 2
    for n in range(-bound, bound + 1):
        if mat_vec(mat_pow(astar, n), g0) == g:
            M = mat_pow(astar, -n)
            return ((int(M[0][0]), int(M[0][1])),
                    (int(M[1][0]), int(M[1][1])))
    raise ConvergenceError(
        "transported label is not a deck image of the start label")
