"""Semiclassical counting: elliptic integrals, the phase-space action of
the cosh well, Weyl's law, and the positive/negative split of states.

The level count of the well at strength |nu| below energy Lambda is
asymptotically I = sqrt(Lambda) f(g) / (2 pi mu) with g = |nu|/Lambda and
f(g) = 4 sqrt(1+g) (K(k) - E(k)), k^2 = (1-g)/(1+g).  f decreases from a
logarithmic divergence at g = 0 to zero at g = 1, and integrates to
2 pi / 3 over (0, 1], which reproduces Weyl's law when the well lines are
summed over the lattice.
"""

import math
from dataclasses import dataclass

from .errors import ValidationError


def elliptic_ke(k):
    """Complete elliptic integrals (K, E) of modulus k in [0, 1) by the
    arithmetic-geometric mean, relative error below 1e-12."""
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise ValidationError(f"modulus must lie in [0, 1), got {k}")
    a, b = 1.0, math.sqrt(1.0 - k * k)
    c = k
    acc = 0.5 * c * c
    pw = 0.5
    for _ in range(60):
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        pw *= 2.0
        acc += pw * c * c
        if c < 1e-17:
            break
    K = math.pi / (2.0 * a)
    return K, K * (1.0 - acc)


def f_of_g(g):
    """Scaled single-well phase-space area at scaled strength g in (0, 1]."""
    g = float(g)
    if not 0.0 < g <= 1.0:
        raise ValidationError(f"g must lie in (0, 1], got {g}")
    k = math.sqrt((1.0 - g) / (1.0 + g))
    K, E = elliptic_ke(k)
    return 4.0 * math.sqrt(1.0 + g) * (K - E)


def f_integral():
    """Integral of f over (0, 1]; equals 2 pi / 3 analytically.

    The g -> 0 endpoint diverges logarithmically, so integrate in
    s = -ln g where the integrand decays like s e^{-s}.  The tail beyond
    s = 36 is below 1e-13; stopping there also keeps the modulus
    representably under 1.
    """
    from scipy.integrate import quad

    val, _ = quad(lambda s: f_of_g(math.exp(-s)) * math.exp(-s), 0.0,
                  36.0, epsabs=1e-12, epsrel=1e-12, limit=300)
    return val


@dataclass(frozen=True)
class ActionQuery:
    energy: float
    nu: float
    mu: float

    def __post_init__(self):
        if not (self.energy > 0 and math.isfinite(self.energy)):
            raise ValidationError("energy must be positive")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValidationError("mu must be positive")
        if self.nu == 0:
            raise ValidationError("nu must be nonzero (g > 0)")
        if abs(self.nu) > self.energy:
            raise ValidationError(
                f"|nu| = {abs(self.nu)} exceeds energy {self.energy}: no "
                "classically allowed region")

    @property
    def g(self):
        return abs(self.nu) / self.energy


def action(q):
    """Semiclassical number of well levels below q.energy."""
    return math.sqrt(q.energy) * f_of_g(q.g) / (2.0 * math.pi * q.mu)


def weyl_prediction(lam, area):
    """Leading eigenvalue count below lam for fibre area * unit height."""
    if not lam > 0:
        raise ValidationError("energy cutoff must be positive")
    return (4.0 * math.pi / 3.0) * lam ** 1.5 * area / (2.0 * math.pi) ** 3


def x_pm(theta):
    """Relative phase-space shares of the two signs of the conserved
    product; sin(theta) (X+ + X-) = 4 pi / 3 and X+/X- = theta/(pi-theta)."""
    theta = float(theta)
    if not 0.0 < theta < math.pi:
        raise ValidationError(f"theta must lie strictly in (0, pi), got {theta}")
    s = math.sin(theta)
    xp = (4.0 / 3.0) * (math.pi / 2.0 + (theta - math.pi / 2.0)) / s
    xm = (4.0 / 3.0) * (math.pi / 2.0 - (theta - math.pi / 2.0)) / s
    return xp, xm
