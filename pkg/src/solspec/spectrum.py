"""Full eigenvalue tables: trivial tower plus one well ladder per lattice
orbit, with multiplicity prediction, degeneracy grouping, and averaged
eigenfunction evaluation.

Every nonzero dual-lattice orbit [gamma] contributes the ladder
energy = Lambda_l(|nu|) + nu cos(theta), nu = 8 pi^2 c Q(gamma), on top of
the flat tower 4 pi^2 k^2.  Orbits sharing |Q(gamma)| share one Mathieu
solve, so exact degeneracies come out bitwise equal and the degeneracy
count of a group can be compared against the arithmetic prediction
2 r N(n).
"""

import hashlib
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, ValidationError
from .manifold import GluingMap, OrbitRep, nu_alpha, orbit_enumerate, q_dual
from .mathieu import MathieuProblem, eigenfunction, solve
from .qforms import (SolverInconsistency, automorph_generator, class_number,
                     mat_pow, mat_transpose, mat_vec, primitive_part,
                     primitivity_index, rep_count_bruteforce,
                     rep_count_formula)
from .semiclassics import ActionQuery, action
from .util import csv_text, write_csv

FOURPI2 = 4.0 * math.pi ** 2

CSV_HEADER = ("energy", "multiplicity", "source_kind", "k_or_l",
              "gamma_x", "gamma_y", "qvalue")

# grouped lines whose members only differ by the sign of Q merge because
# the shift term nu*cos(theta) vanishes; below this the metric counts as
# orthogonally aligned rather than generic
COS_THETA_GENERIC = 1e-12


@dataclass(frozen=True)
class SpectralLine:
    energy: float
    multiplicity: int
    source_kind: str           # "trivial" or "orbit"
    k_or_l: int
    orbit: OrbitRep = None
    members: tuple = ()        # constituent lines after grouping
    status: str = ""           # "", "predicted", "predicted-nongeneric-pm", "accidental"

    def __post_init__(self):
        if self.source_kind not in ("trivial", "orbit"):
            raise ValidationError(f"unknown source kind {self.source_kind!r}")
        if self.multiplicity < 1:
            raise ValidationError("multiplicity must be a positive integer")
        if (self.orbit is None) != (self.source_kind == "trivial"):
            raise ValidationError("orbit data must accompany exactly the orbit lines")


def _line_key(line):
    rank = 0 if line.source_kind == "trivial" else 1
    gam = line.orbit.gamma if line.orbit is not None else ()
    return (line.energy, rank, line.k_or_l, gam)


@dataclass(frozen=True)
class SpectrumTable:
    lines: tuple
    meta: dict

    def __post_init__(self):
        es = [ln.energy for ln in self.lines]
        if any(a > b for a, b in zip(es, es[1:])):
            raise ValidationError("table lines must be sorted by energy")

    def __len__(self):
        return len(self.lines)


def _geom_hash(geom):
    cells = (geom.trace, *geom.a_star[0], *geom.a_star[1], geom.E, geom.F,
             geom.G, geom.mu, geom.area, geom.c)
    blob = ",".join("%.17g" % float(v) for v in cells)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _kmax_estimate(nu_abs, mu, top):
    """Levels expected below top, padded; semiclassical count as the guess."""
    if top <= nu_abs:
        return 1
    est = action(ActionQuery(energy=top, nu=nu_abs, mu=mu))
    return int(est * 1.3) + 8


def _ladder_solution(nu_abs, mu, top, tol):
    """Cached solve guaranteed to bracket every level up to top."""
    km = _kmax_estimate(nu_abs, mu, top)
    for _ in range(6):
        sol = solve(MathieuProblem(nu_abs=nu_abs, mu=mu), kmax=km, tol=tol)
        if sol.levels[-1] > top:
            return sol
        km = int(km * 1.6) + 5
    raise ConvergenceError(
        f"ladder for nu={nu_abs} did not pass {top} at kmax={km}")


def assemble(geom, A, energy_cut, tol=1e-8, _qmax=None):
    """Every eigenvalue line with energy <= energy_cut, sorted ascending.

    The orbit scan radius comes from Lambda_0(|nu|) > |nu| and the
    monotonicity of Lambda_0 in |nu|: any orbit with
    |nu| (1 - |cos theta|) > energy_cut lies entirely above the cutoff.
    The private knobs widen the scan to let tests confirm completeness.
    """
    energy_cut = float(energy_cut)
    if not energy_cut > 0:
        raise ValidationError("energy cutoff must be positive")
    lines = []
    k = 0
    while FOURPI2 * k * k <= energy_cut:
        lines.append(SpectralLine(energy=FOURPI2 * k * k,
                                  multiplicity=1 if k == 0 else 2,
                                  source_kind="trivial", k_or_l=k))
        k += 1

    scale = 8.0 * math.pi ** 2 * geom.c
    denom = 1.0 - abs(geom.cos_theta)
    qmax = max(1, math.ceil(energy_cut / (scale * denom)))
    if _qmax is not None:
        qmax = _qmax
    ct = geom.cos_theta
    lmax = -1
    reps = orbit_enumerate(geom, A, qmax)
    # one ladder per distinct |Q|, sized for the deeper of the two sign
    # shifts, so exact degeneracies across orbits come out bitwise equal
    ladders = {}
    for rep in reps:
        key = abs(rep.qvalue)
        if key in ladders:
            continue
        nu_abs = abs(rep.nu)
        top_max = energy_cut + nu_abs * abs(ct)
        ladders[key] = (None if top_max <= nu_abs else
                        _ladder_solution(nu_abs, geom.mu, top_max, tol))
    for rep in reps:
        sol = ladders[abs(rep.qvalue)]
        if sol is None:
            continue
        top = energy_cut - rep.nu * ct
        for l, lam in enumerate(sol.levels):
            if lam > top:
                break
            lines.append(SpectralLine(energy=lam + rep.nu * ct,
                                      multiplicity=1, source_kind="orbit",
                                      k_or_l=l, orbit=rep))
            lmax = max(lmax, l)
    lines.sort(key=_line_key)
    meta = {"geometry": _geom_hash(geom), "energy_cut": energy_cut,
            "tol": tol, "qmax": qmax, "lmax": lmax,
            "cos_theta": geom.cos_theta, "count": len(lines)}
    return SpectrumTable(tuple(lines), meta)


@lru_cache(maxsize=64)
def _orbit_arithmetic(matrix):
    A = GluingMap.from_matrix(matrix)
    Qhat, ldiv = primitive_part(q_dual(A))
    r, _ = primitivity_index(matrix)
    A0 = automorph_generator(Qhat)
    return r, Qhat, ldiv, A0


def predicted_multiplicity(A, gamma):
    """Arithmetic degeneracy 2 r N(n) of the orbit of gamma.

    n is the primitive-form value Q(gamma)/l; the representation count N
    is taken modulo the automorph group by direct search, and cross-checked
    against the divisor sum whenever that formula applies (one-class
    discriminant, n coprime to it).
    """
    if not isinstance(A, GluingMap):
        A = GluingMap.from_matrix(A)
    g = (int(gamma[0]), int(gamma[1]))
    if g == (0, 0):
        raise ValidationError("gamma must be nonzero")
    r, Qhat, ldiv, A0 = _orbit_arithmetic(A.matrix())
    n = Qhat.value(*g)
    count = rep_count_bruteforce(Qhat, n, A0)
    d = Qhat.discriminant
    if class_number(d) == 1 and math.gcd(abs(n), d) == 1:
        formula = rep_count_formula(d, abs(n))
        if formula != count:
            raise SolverInconsistency(
                f"divisor sum gives {formula} but orbit search found {count} "
                f"for n={n}, d={d}")
    return 2 * r * count


def _merge_status(members, cos_theta):
    kinds = {m.source_kind for m in members}
    if kinds != {"orbit"}:
        return "accidental"
    levels = {m.k_or_l for m in members}
    qvals = {m.orbit.qvalue for m in members}
    if len(levels) == 1 and len(qvals) == 1:
        return "predicted"
    if (len(levels) == 1 and len({abs(q) for q in qvals}) == 1
            and abs(cos_theta) < COS_THETA_GENERIC):
        return "predicted-nongeneric-pm"
    return "accidental"


def group_degenerate(t, grouping_tol=None):
    """Merge lines closer than the tolerance into single lines with summed
    multiplicity.

    With grouping_tol=None the threshold is 1e-7 * max(1, energy), matched
    to the 1e-8 relative convergence of the ladder solves.  Each merged
    line records its members and whether the merge is the arithmetic
    degeneracy (equal level and equal Q), its sign-pair variant when
    cos(theta) = 0, or accidental.
    """
    if grouping_tol is not None and not grouping_tol > 0:
        raise ValidationError("grouping tolerance must be positive")

    def tol_at(e):
        if grouping_tol is not None:
            return grouping_tol
        return 1e-7 * max(1.0, abs(e))

    merged = []
    cursor = []
    for line in t.lines:
        if cursor and line.energy - cursor[-1].energy <= tol_at(line.energy):
            cursor.append(line)
            continue
        if cursor:
            merged.append(cursor)
        cursor = [line]
    if cursor:
        merged.append(cursor)

    out = []
    for grp in merged:
        if len(grp) == 1:
            out.append(grp[0])
            continue
        head = grp[0]
        out.append(SpectralLine(
            energy=head.energy,
            multiplicity=sum(m.multiplicity for m in grp),
            source_kind=head.source_kind, k_or_l=head.k_or_l,
            orbit=head.orbit, members=tuple(grp),
            status=_merge_status(grp, t.meta.get("cos_theta", 1.0))))
    meta = dict(t.meta)
    meta["grouping_tol"] = "adaptive-1e-7" if grouping_tol is None else grouping_tol
    meta["count"] = len(out)
    return SpectrumTable(tuple(out), meta)


def table_rows(t):
    rows = []
    for line in t.lines:
        if line.source_kind == "trivial":
            rows.append((line.energy, line.multiplicity, "trivial",
                         line.k_or_l, "", "", ""))
        else:
            gx, gy = line.orbit.gamma
            rows.append((line.energy, line.multiplicity, "orbit",
                         line.k_or_l, gx, gy, line.orbit.qvalue))
    return rows


def to_csv_text(t):
    return csv_text(CSV_HEADER, table_rows(t))


def write_table_csv(t, path):
    write_csv(path, CSV_HEADER, table_rows(t))


def to_json_text(t):
    def encode(line):
        obj = {"energy": line.energy, "multiplicity": line.multiplicity,
               "source_kind": line.source_kind, "k_or_l": line.k_or_l}
        if line.orbit is not None:
            obj["gamma"] = list(line.orbit.gamma)
            obj["qvalue"] = line.orbit.qvalue
        if line.status:
            obj["status"] = line.status
            obj["members"] = len(line.members)
        return obj

    payload = {"meta": t.meta, "lines": [encode(ln) for ln in t.lines]}
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def eigenfunction_field(geom, A, gamma, level, points, trunc_tol=1e-8):
    """Orbit-averaged eigenfunction sum(n) exp(2 pi i <gamma_n, w>) f(z + alpha_n)
    sampled at rows (x, y, z) of points.

    gamma_n runs over the transpose-orbit of gamma; alpha_n = alpha + n, so
    consecutive terms are unit translates in z and the sum obeys the gluing
    identity Phi(A w, z + 1) = Phi(w, z) up to the truncation error.  Terms
    stop once the z-window sup of the well factor drops below trunc_tol.
    """
    if not isinstance(A, GluingMap):
        A = GluingMap.from_matrix(A)
    if not trunc_tol > 0:
        raise ValidationError("truncation tolerance must be positive")
    g = (int(gamma[0]), int(gamma[1]))
    if g == (0, 0):
        raise ValidationError("use the closed trivial family for gamma = 0")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValidationError("points must be an (M, 3) array of (x, y, z)")
    nu, alpha0 = nu_alpha(geom, g)
    sol = solve(MathieuProblem(nu_abs=abs(nu), mu=geom.mu),
                kmax=max(1, int(level)), tol=1e-8)
    astar = mat_transpose(A.matrix())
    xy = pts[:, :2]
    z = pts[:, 2]
    out = np.zeros(len(pts), dtype=complex)

    # the well factor of term n is centred at z = -(alpha0 + n) and is
    # below trunc_tol once the whole window lies beyond the solve domain
    zmin, zmax = float(np.min(z)), float(np.max(z))
    width = sol.Z + 2.0
    n_lo = math.ceil(-alpha0 - zmax - width)
    n_hi = math.floor(-alpha0 - zmin + width)
    if n_hi - n_lo > 1000:
        raise ConvergenceError(
            f"orbit sum needs {n_hi - n_lo} terms; z-window too wide")
    for n in range(n_lo, n_hi + 1):
        fv = eigenfunction(sol, int(level), z + (alpha0 + n))
        if float(np.max(np.abs(fv))) < trunc_tol:
            continue
        gn = mat_vec(mat_pow(astar, n), g)
        phase = np.exp(2j * math.pi * (xy[:, 0] * gn[0] + xy[:, 1] * gn[1]))
        np.add(out, phase * fv, out=out)
    return out


def trivial_eigenfunction(k, z, kind="cos"):
    """Closed-form z-only eigenfunctions of the flat tower, energy 4 pi^2 k^2."""
    k = int(k)
    if k < 0:
        raise ValidationError("k must be non-negative")
    z = np.asarray(z, dtype=float)
    if kind == "cos":
        return np.cos(2.0 * math.pi * k * z)
    if kind == "sin":
        if k == 0:
            raise ValidationError("k = 0 has only the constant branch")
        return np.sin(2.0 * math.pi * k * z)
    raise ValidationError(f"kind must be 'cos' or 'sin', got {kind!r}")
