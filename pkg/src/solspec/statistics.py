"""Statistics of the form-value sequence: integer level spacings with and
without degeneracies, growth of the set of represented integers, and the
degeneracy evidence that separates these spectra from Poisson behaviour.

Values are collected per lattice orbit, so every arithmetic repetition of
an integer shows up as a zero spacing.  The extra-involution mode reduces
to a fundamental region for the full symmetry group of the value map
(orbit action, sign flip of the lattice point, and a supplied involution
factorization of the gluing matrix), which is what makes the remaining
degeneracies informative rather than bookkeeping artifacts.
"""

import bisect
import math
from collections import Counter
from dataclasses import dataclass

from .errors import ValidationError
from .manifold import orbit_enumerate, strip_reduce
from .qforms import mat_mul, mat_transpose, mat_vec
from .util import csv_text, write_csv

SPACING_HEADER = ("spacing", "count", "fraction")
GROWTH_HEADER = ("K", "count", "normalized")

_IDENT = ((1, 0), (0, 1))
_MODES = ("orbit-only", "extra-involution")


@dataclass(frozen=True)
class ValueSequence:
    """Sorted positive form values gathered below qmax, with repetitions."""
    values: tuple
    qmax: int
    symmetry_mode: str

    def __post_init__(self):
        if self.symmetry_mode not in _MODES:
            raise ValidationError(f"symmetry_mode must be one of {_MODES}")
        prev = 0
        for v in self.values:
            if not isinstance(v, int) or v < 1 or v > self.qmax:
                raise ValidationError(
                    "values must be positive integers bounded by qmax")
            if v < prev:
                raise ValidationError("values must be sorted")
            prev = v

    def __len__(self):
        return len(self.values)


def _as_matrix(A):
    if hasattr(A, "matrix"):
        A = A.matrix()
    return ((int(A[0][0]), int(A[0][1])), (int(A[1][0]), int(A[1][1])))


def _check_involution(R, A, name):
    R = ((int(R[0][0]), int(R[0][1])), (int(R[1][0]), int(R[1][1])))
    if mat_mul(R, R) != _IDENT:
        raise ValidationError(f"{name} is not an involution ({name}^2 != I)")
    return R


def find_involution(A):
    """Search for a factorization A = R2 R1 into integer involutions, with
    entries bounded by the largest entry of A.  Returns the first pair in
    lexicographic order; raises when none exists in that range."""
    A = _as_matrix(A)
    m = max(abs(x) for row in A for x in row)
    span = range(-m, m + 1)
    for a in span:
        for b in span:
            for c in span:
                for d in span:
                    R1 = ((a, b), (c, d))
                    if mat_mul(R1, R1) != _IDENT:
                        continue
                    R2 = mat_mul(A, R1)    # R1 is its own inverse
                    if mat_mul(R2, R2) == _IDENT:
                        return R1, R2
    raise ValidationError(
        "no involution factorization with entries bounded by those of the "
        "gluing matrix")


def value_sequence(A, geom, qmax, symmetry_mode="orbit-only",
                   involution=None):
    """Sorted |Q| values, one per orbit representative.

    orbit-only keeps every orbit of the nonzero dual lattice.  The
    extra-involution mode keeps one representative per class of the group
    generated by the sign flip and the transposed involution R1 of a
    factorization A = R2 R1 (supplied as the pair (R1, R2), or searched
    for when omitted), restricted to positive form values; class members
    share their value, so every surviving repetition is arithmetic.
    Boundary classes fixed by part of the group are kept once.
    """
    if symmetry_mode not in _MODES:
        raise ValidationError(f"symmetry_mode must be one of {_MODES}")
    reps = orbit_enumerate(geom, A, qmax)
    if symmetry_mode == "orbit-only":
        vals = sorted(abs(r.qvalue) for r in reps if r.qvalue != 0)
        return ValueSequence(values=tuple(vals), qmax=int(qmax),
                             symmetry_mode=symmetry_mode)

    if involution is None:
        R1, R2 = find_involution(A)
    else:
        R1, R2 = involution
    A_t = _as_matrix(A)
    R1 = _check_involution(R1, A_t, "R1")
    R2 = _check_involution(R2, A_t, "R2")
    if mat_mul(R2, R1) != A_t:
        raise ValidationError("involution product R2 R1 must equal the "
                              "gluing matrix")
    rt = mat_transpose(R1)

    vals = []
    for r in reps:
        if r.qvalue <= 0:
            continue
        g = r.gamma
        rg = mat_vec(rt, g)
        family = (g, (-g[0], -g[1]), rg, (-rg[0], -rg[1]))
        canon = min(strip_reduce(geom, v)[0] for v in family)
        if canon == g:
            vals.append(r.qvalue)
    vals.sort()
    return ValueSequence(values=tuple(vals), qmax=int(qmax),
                         symmetry_mode=symmetry_mode)


def spacing_histogram(vs, drop_degenerate=False):
    """Histogram of consecutive gaps, spacing -> count.

    drop_degenerate collapses repeated values first, so the zero bin is
    empty and the histogram shows the spacing law of distinct levels.
    """
    vals = vs.values
    if drop_degenerate:
        vals = tuple(sorted(set(vals)))
    if len(vals) < 2:
        raise ValidationError("need at least two values for spacings")
    return dict(Counter(b - a for a, b in zip(vals, vals[1:])))


def zero_spacing_fraction(vs):
    """Fraction of consecutive gaps that vanish; a sequence without
    repetitions gives 0, a Poisson sequence almost surely does too."""
    hist = spacing_histogram(vs)
    total = sum(hist.values())
    return hist.get(0, 0) / total


def represented_growth(vs, checkpoints):
    """(K, count, count sqrt(ln K) / K) per checkpoint, where count is the
    number of distinct represented integers up to K.  The normalized
    column stays bounded while count/K decays."""
    distinct = sorted(set(vs.values))
    out = []
    for K in checkpoints:
        K = int(K)
        if K < 1 or K > vs.qmax:
            raise ValidationError(
                f"checkpoint {K} outside the collected range 1..{vs.qmax}")
        count = bisect.bisect_right(distinct, K)
        norm = count * math.sqrt(math.log(K)) / K if K > 1 else 0.0
        out.append((K, count, norm))
    return out


def spacing_csv_text(hist):
    total = sum(hist.values())
    rows = [(s, c, c / total) for s, c in sorted(hist.items())]
    return csv_text(SPACING_HEADER, rows)


def write_spacing_csv(hist, path):
    total = sum(hist.values())
    rows = [(s, c, c / total) for s, c in sorted(hist.items())]
    write_csv(path, SPACING_HEADER, rows)


def growth_csv_text(rows):
    return csv_text(GROWTH_HEADER, rows)


def write_growth_csv(rows, path):
    write_csv(path, GROWTH_HEADER, rows)
