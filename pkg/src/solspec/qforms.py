"""Exact integer arithmetic of indefinite binary quadratic forms.

Covers discriminants, Kronecker symbols, fundamental solutions of
X^2 - d*Y^2 = 4, automorphs, class numbers via reduction cycles, and
representation counts modulo the automorph group.  Everything here is
exact: Python integers only, no floats except where a fundamental-strip
cutoff is explicitly irrational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ResourceError, ValidationError

# Solutions of Q(x,y)=n are enumerated only up to this |n|.
REP_COUNT_BOUND = 10**6


# ---------------------------------------------------------------------------
# small exact 2x2 integer matrix helpers

def mat_mul(m, n):
    (a, b), (c, d) = m
    (e, f), (g, h) = n
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def mat_pow(m, k: int):
    if k < 0:
        return mat_pow(mat_inv(m), -k)
    out = ((1, 0), (0, 1))
    base = m
    while k:
        if k & 1:
            out = mat_mul(out, base)
        base = mat_mul(base, base)
        k >>= 1
    return out


def mat_inv(m):
    # determinant must be 1
    (a, b), (c, d) = m
    if a * d - b * c != 1:
        raise ValidationError("matrix inverse requires determinant 1")
    return ((d, -b), (-c, a))


def mat_neg(m):
    (a, b), (c, d) = m
    return ((-a, -b), (-c, -d))


def mat_transpose(m):
    (a, b), (c, d) = m
    return ((a, c), (b, d))


def mat_det(m):
    (a, b), (c, d) = m
    return a * d - b * c


def mat_trace(m):
    return m[0][0] + m[1][1]


def mat_vec(m, v):
    (a, b), (c, d) = m
    x, y = v
    return (a * x + b * y, c * x + d * y)


def _as_exact_int(v):
    iv = int(v)
    if iv != v:
        raise ValidationError(f"entry {v!r} is not an integer")
    return iv


def as_int_matrix(m):
    """Normalize assorted 2x2 inputs (nested sequences, flat length-4,
    numpy arrays) to a tuple-of-tuples of Python ints."""
    try:
        if hasattr(m, "tolist"):
            m = m.tolist()
        seq = list(m)
        if len(seq) == 4 and not hasattr(seq[0], "__len__"):
            rows = ((_as_exact_int(seq[0]), _as_exact_int(seq[1])),
                    (_as_exact_int(seq[2]), _as_exact_int(seq[3])))
        else:
            rows = tuple(tuple(_as_exact_int(v) for v in row) for row in seq)
    except ValidationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"not an integer 2x2 matrix: {m!r}") from exc
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ValidationError(f"not a 2x2 matrix: {m!r}")
    return rows


def _is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def valid_discriminant(d: int) -> bool:
    return d > 0 and d % 4 in (0, 1) and not _is_square(d)


def check_discriminant(d: int) -> int:
    d = int(d)
    if not valid_discriminant(d):
        raise ValidationError(
            f"discriminant must be positive, not a perfect square, and 0 or 1 mod 4; got {d}")
    return d


# ---------------------------------------------------------------------------
# forms

class QuadraticForm:
    """Integer form a*x^2 + b*x*y + c*y^2 with positive non-square
    discriminant b^2 - 4ac."""

    __slots__ = ("a", "b", "c")

    def __init__(self, a: int, b: int, c: int):
        self.a = int(a)
        self.b = int(b)
        self.c = int(c)
        d = self.discriminant
        if d <= 0 or _is_square(d):
            raise ValidationError(
                f"form {(a, b, c)} has discriminant {d}; need positive non-square")

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def value(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def __call__(self, x, y):
        return self.value(x, y)

    def content(self) -> int:
        return math.gcd(math.gcd(abs(self.a), abs(self.b)), abs(self.c))

    def is_primitive(self) -> bool:
        return self.content() == 1

    def transform(self, m) -> "QuadraticForm":
        # the form v -> Q(M v)
        (p, q), (r, s) = as_int_matrix(m)
        a, b, c = self.a, self.b, self.c
        a2 = a * p * p + b * p * r + c * r * r
        b2 = 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s
        c2 = a * q * q + b * q * s + c * s * s
        return QuadraticForm(a2, b2, c2)

    def coeffs(self):
        return (self.a, self.b, self.c)

    def __eq__(self, other):
        if not isinstance(other, QuadraticForm):
            return NotImplemented
        return self.coeffs() == other.coeffs()

    def __hash__(self):
        return hash(self.coeffs())

    def __neg__(self):
        return QuadraticForm(-self.a, -self.b, -self.c)

    def __repr__(self):
        return f"QuadraticForm({self.a}, {self.b}, {self.c})"


@dataclass(frozen=True)
class PellSolution:
    """Fundamental solution of X^2 - d*Y^2 = 4 with X, Y > 0 minimal."""
    X0: int
    Y0: int
    d: int

    def power(self, n: int):
        """(X, Y) with (X + sqrt(d) Y)/2 = ((X0 + sqrt(d) Y0)/2)^n, exact."""
        if n < 0:
            raise ValidationError("power must be non-negative")
        X, Y = 2, 0
        for _ in range(n):
            X, Y = (self.X0 * X + self.d * self.Y0 * Y) // 2, (self.X0 * Y + self.Y0 * X) // 2
        return X, Y


def form_from_matrix(A) -> QuadraticForm:
    """The form (-a21, a11 - a22, a12) preserved by the unimodular
    hyperbolic matrix A."""
    A = as_int_matrix(A)
    if mat_det(A) != 1:
        raise ValidationError(f"matrix {A} must have determinant 1")
    if abs(mat_trace(A)) <= 2:
        raise ValidationError(f"matrix {A} must be hyperbolic (|trace| > 2)")
    (a11, a12), (a21, a22) = A
    return QuadraticForm(-a21, a11 - a22, a12)


# ---------------------------------------------------------------------------
# Kronecker symbol

def _jacobi(n: int, m: int) -> int:
    # Jacobi symbol (n/m) for odd m > 0
    assert m > 0 and m & 1
    n %= m
    acc = 1
    while True:
        if n == 0:
            return acc if m == 1 else 0
        while not n & 1:
            n >>= 1
            if m & 7 in (3, 5):
                acc = -acc
        if n == 1:
            return acc
        if n & 3 == 3 and m & 3 == 3:
            acc = -acc
        n, m = m % n, n


def kronecker(d: int, k: int):
    """Kronecker symbol (d/k) for a form discriminant d and k >= 0.

    Completely multiplicative in k; agrees with the Legendre symbol at
    odd primes not dividing d; at k=2 it is 0 for even d, +1 for
    d = +-1 mod 8, -1 otherwise.
    """
    d, k = int(d), int(k)
    if d % 4 not in (0, 1):
        raise ValidationError(f"discriminant must be 0 or 1 mod 4; got {d}")
    if k < 0:
        raise ValidationError("k must be non-negative")
    if k == 0:
        return 1 if abs(d) == 1 else 0
    acc = 1
    if k % 2 == 0:
        if d % 2 == 0:
            return 0
        two = 1 if d % 8 in (1, 7) else -1
        e = (k & -k).bit_length() - 1
        k >>= e
        if e & 1:
            acc = two
    return acc * _jacobi(d % k, k)


# ---------------------------------------------------------------------------
# reduction cycles, Pell, automorphs

def _is_reduced(a: int, b: int, c: int, d: int) -> bool:
    # 0 < b < sqrt(d) and sqrt(d) - b < 2|a| < sqrt(d) + b, all exact
    if b <= 0 or b * b >= d:
        return False
    ta = 2 * abs(a)
    if (ta + b) * (ta + b) <= d:        # 2|a| + b > sqrt(d) fails
        return False
    if ta > b and (ta - b) * (ta - b) >= d:  # 2|a| - b < sqrt(d) fails
        return False
    return True


def _rho_step(a: int, b: int, c: int, d: int):
    """One reduction step (a,b,c) -> (c, r, (r^2-d)/(4c)); returns the new
    form and the integer s with column matrix [[0,-1],[1,s]]."""
    ca = abs(c)
    step = 2 * ca
    r0 = (-b) % step
    if ca * ca > d:
        r = r0 if r0 <= ca else r0 - step
    else:
        # unique residue with sqrt(d) - 2|c| < r < sqrt(d)
        top = math.isqrt(d)          # d non-square, so top < sqrt(d)
        r = r0 + ((top - r0) // step) * step
    s = (b + r) // (2 * c)
    c_new = (r * r - d) // (4 * c)
    return (c, r, c_new), s


def _principal_form(d: int):
    b0 = math.isqrt(d)
    if (b0 - d) % 2:
        b0 -= 1
    return (1, b0, (b0 * b0 - d) // 4)


def pell_fundamental(d: int) -> PellSolution:
    """Fundamental solution of X^2 - d*Y^2 = 4.

    Walks the reduction cycle of the principal form of discriminant d
    (the continued-fraction expansion in form coordinates), accumulating
    the step matrices; one full cycle is the fundamental automorph, whose
    trace and lower-left entry give (X0, Y0).  Arbitrary-precision ints
    throughout, so there is no overflow to guard.
    """
    d = check_discriminant(d)
    start = _principal_form(d)
    assert _is_reduced(*start, d)
    U = ((1, 0), (0, 1))
    form = start
    # cycle length is O(sqrt(d) log d); the cap only flags internal bugs
    for _ in range(20 * math.isqrt(d) + 64):
        form, s = _rho_step(*form, d)
        U = mat_mul(U, ((0, -1), (1, s)))
        if form == start:
            break
    else:
        raise ResourceError(f"reduction cycle for d={d} did not close")
    if mat_trace(U) < 0:
        U = mat_neg(U)
    X0 = mat_trace(U)
    Y0 = U[1][0]          # principal form has a = 1
    if Y0 < 0:
        X0, Y0 = X0, -Y0  # mirror solution; identity is sign-blind
    assert X0 > 0 and Y0 > 0 and X0 * X0 - d * Y0 * Y0 == 4
    return PellSolution(X0, Y0, d)


def automorph_generator(Q: QuadraticForm):
    """Generator [[(X0-b Y0)/2, -c Y0], [a Y0, (X0+b Y0)/2]] of the proper
    automorphs of a primitive form, from the fundamental Pell solution."""
    if not Q.is_primitive():
        raise ValidationError(f"form {Q.coeffs()} is not primitive")
    d = check_discriminant(Q.discriminant)
    sol = pell_fundamental(d)
    X0, Y0 = sol.X0, sol.Y0
    # X0 == b*Y0 mod 2 because X0^2 - d Y0^2 = 4 and b^2 == d mod 4
    assert (X0 - Q.b * Y0) % 2 == 0, "parity failure in automorph construction"
    A0 = (((X0 - Q.b * Y0) // 2, -Q.c * Y0), (Q.a * Y0, (X0 + Q.b * Y0) // 2))
    assert mat_det(A0) == 1
    for v in ((1, 0), (0, 1), (1, 1)):
        assert Q.value(*mat_vec(A0, v)) == Q.value(*v)
    return A0


def primitive_part(Q: QuadraticForm):
    """(Q_hat, l) with |Q| = l * |Q_hat|, Q_hat primitive and normalized so
    its first nonzero coefficient is positive."""
    l = Q.content()
    a, b, c = Q.a // l, Q.b // l, Q.c // l
    for coeff in (a, b, c):
        if coeff:
            if coeff < 0:
                a, b, c = -a, -b, -c
            break
    return QuadraticForm(a, b, c), l


class SolverInconsistency(RuntimeError):
    """Internal invariant violated; indicates a bug, not bad input."""


def primitivity_index(A):
    """(r, A0) with A = A0^r (or -A0^r), A0 the automorph generator of the
    primitive part of the form of A, up to its direction choice."""
    A = as_int_matrix(A)
    Q_hat, _ = primitive_part(form_from_matrix(A))
    A0 = automorph_generator(Q_hat)
    for gen in (A0, mat_inv(A0)):
        M = ((1, 0), (0, 1))
        for r in range(1, 65):
            M = mat_mul(M, gen)
            if M == A or mat_neg(M) == A:
                return r, gen
    raise SolverInconsistency(
        f"no power of the automorph generator matches {A}; sign-convention bug")


def class_number(d: int) -> int:
    """Number of SL(2,Z) classes of primitive forms of discriminant d,
    counted as reduction cycles of the reduced primitive forms."""
    d = check_discriminant(d)
    root = math.isqrt(d)
    reduced = set()
    for b in range(1 if d % 2 else 2, root + 1, 2):
        num = b * b - d  # negative
        for aa in range(1, (root + b) // 2 + 1):
            if num % (4 * aa):
                continue
            for a in (aa, -aa):
                c = num // (4 * a)
                if not _is_reduced(a, b, c, d):
                    continue
                if math.gcd(math.gcd(abs(a), b), abs(c)) == 1:
                    reduced.add((a, b, c))
    cycles = 0
    seen = set()
    for f in sorted(reduced):
        if f in seen:
            continue
        cycles += 1
        g = f
        while True:
            seen.add(g)
            g, _ = _rho_step(*g, d)
            if g == f:
                break
    return cycles


# ---------------------------------------------------------------------------
# representation counts

def _eigenrows(G):
    """Left eigenrows (wu, wv) of a hyperbolic G with trace > 2 (wu unit
    length, wv unscaled) plus the large eigenvalue lam; wu.G = lam*wu."""
    (a11, a12), (a21, a22) = G
    t = a11 + a22
    disc = t * t - 4
    lam = (t + math.sqrt(disc)) / 2.0
    # left rows: w·G = lam^{+-1} w;  a21 != 0 for integer hyperbolic G
    wu = (float(a21), lam - a11)
    wv = (float(a21), 1.0 / lam - a11)
    nu = math.hypot(*wu)
    wu = (wu[0] / nu, wu[1] / nu)
    return wu, wv, lam


def rep_count_bruteforce(Q: QuadraticForm, n: int, A0) -> int:
    """Number of integer solutions of Q(x,y) = n modulo the group generated
    by the automorph A0 and -I.

    Enumerates the fundamental strip 1 <= |p| < lam0 in eigenrow
    coordinates of A0 (where |q| <= |n|-proportional), then deduplicates
    by exact reduction to a canonical orbit representative, so boundary
    rounding cannot double-count.
    """
    n = int(n)
    if n == 0:
        raise ValidationError("n must be nonzero")
    if abs(n) > REP_COUNT_BOUND:
        raise ResourceError(f"|n| = {abs(n)} exceeds bound {REP_COUNT_BOUND}")
    G = as_int_matrix(A0)
    if mat_det(G) != 1 or abs(mat_trace(G)) <= 2:
        raise ValidationError("automorph must be unimodular hyperbolic")
    if mat_trace(G) < 0:
        G = mat_neg(G)
    for v in ((1, 0), (0, 1), (1, 1)):
        if Q.value(*mat_vec(G, v)) != Q.value(*v):
            raise ValidationError("matrix does not preserve the form")
    d = Q.discriminant
    rootd = math.sqrt(d)
    wu, wv, lam = _eigenrows(G)
    # calibrate: Q(v) = kappa * p(v) * q(v); rescale wv so |kappa| = sqrt(d)
    p0 = wu[0]
    q0 = wv[0]
    kappa = Q.a / (p0 * q0)
    wv = (wv[0] * abs(kappa) / rootd, wv[1] * abs(kappa) / rootd)

    pmax = lam * (1 + 1e-9) + 1e-9
    qmax = abs(n) / rootd * (1 + 1e-9) + 1e-9
    # y-range: invert [[wu],[wv]] (rows) on the box corners
    det = wu[0] * wv[1] - wu[1] * wv[0]
    ybound = int((abs(wv[0]) * pmax + abs(wu[0]) * qmax) / abs(det)) + 2

    log_lam = math.log(lam)
    a, b, c = Q.a, Q.b, Q.c
    found = set()
    for y in range(-ybound, ybound + 1):
        disc = d * y * y + 4 * a * n
        if disc < 0:
            continue
        s = math.isqrt(disc)
        if s * s != disc:
            continue
        for sgn in ((s, -s) if s else (s,)):
            num = -b * y + sgn
            if num % (2 * a):
                continue
            x = num // (2 * a)
            v = (x, y)
            p = wu[0] * x + wu[1] * y
            if p == 0.0:
                continue  # cannot happen for integer v != 0
            # reduce to the strip 1 <= |p| < lam exactly, float log as guide
            k = math.floor(math.log(abs(p)) / log_lam)
            w = mat_vec(mat_pow(G, -k), v)
            pw = abs(wu[0] * w[0] + wu[1] * w[1])
            if pw < 1.0:
                w = mat_vec(G, w)
            elif pw >= lam:
                w = mat_vec(mat_inv(G), w)
            wm = (-w[0], -w[1])
            found.add(max(w, wm))
    return len(found)


def divisors(n: int):
    n = abs(int(n))
    small, big = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i != n // i:
                big.append(n // i)
        i += 1
    return small + big[::-1]


def rep_count_formula(d: int, n: int) -> int:
    """Divisor sum N_d(n) = sum over k|n of kronecker(d, k); valid only
    when gcd(n, d) = 1."""
    d = check_discriminant(d)
    n = int(n)
    if n <= 0:
        raise ValidationError(f"n must be positive; got {n}")
    if math.gcd(n, d) != 1:
        raise ValidationError(
            f"gcd(n, d) = {math.gcd(n, d)} != 1; use rep_count_bruteforce instead")
    return sum(kronecker(d, k) for k in divisors(n))
