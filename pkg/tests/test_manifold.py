import math
import random

import pytest

from solspec.errors import ValidationError
from solspec.manifold import (
    FibreMetric,
    GluingMap,
    curvature,
    eigencoords,
    geometry,
    nu_alpha,
    orbit_enumerate,
    q_dual,
    strip_reduce,
)
from solspec.qforms import mat_pow, mat_vec

CATMAP = ((2, 1), (1, 1))

MAPS = [CATMAP, ((1, 3), (1, 4)), ((2, 3), (1, 2)), ((1, 1), (1, 2)),
        ((3, 5), (1, 2)), ((1, -1), (-1, 2)), ((7, 18), (12, 31))]
METRICS = [(1.0, 0.0, 1.0), (2.0, 1.0, 1.0), (1.0, -0.3, 0.7)]


# ---------------------------------------------------------------------------
# validation

def test_gluing_map_rejects_non_hyperbolic():
    with pytest.raises(ValidationError):
        GluingMap.from_matrix(((1, 1), (0, 1)))  # trace 2
    with pytest.raises(ValidationError):
        GluingMap.from_matrix(((0, -1), (1, 0)))  # trace 0
    with pytest.raises(ValidationError):
        GluingMap.from_matrix(((2, 1), (1, 2)))  # det 3
    with pytest.raises(ValidationError):
        GluingMap.from_matrix(((-2, -1), (-1, -1)))  # trace -3


def test_fibre_metric_rejects_indefinite():
    with pytest.raises(ValidationError):
        FibreMetric(1.0, 2.0, 1.0)
    with pytest.raises(ValidationError):
        FibreMetric(0.0, 0.0, 1.0)
    with pytest.raises(ValidationError):
        FibreMetric(1.0, 0.0, -1.0)
    FibreMetric(2.0, 1.0, 1.0)  # barely positive definite is fine


# ---------------------------------------------------------------------------
# geometry construction

def test_catmap_square_metric_landmarks():
    g = geometry(CATMAP, (1, 0, 1))
    assert g.lam == pytest.approx((3 + math.sqrt(5)) / 2, rel=1e-14)
    assert g.mu == pytest.approx(0.9624236501192069, rel=1e-13)
    assert g.D == 5
    # symmetric map + square torus: orthogonal dual directions
    assert g.cos_theta == pytest.approx(0.0, abs=1e-14)
    assert g.sin_theta == pytest.approx(1.0, rel=1e-14)
    assert g.area == pytest.approx(1.0, rel=1e-14)
    assert g.c == pytest.approx(1 / math.sqrt(5), rel=1e-13)
    assert g.E == pytest.approx(1.0, rel=1e-12)
    assert g.G == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("A", MAPS)
@pytest.mark.parametrize("m", METRICS)
def test_unimodular_frame_and_duality(A, m):
    g = geometry(A, m)
    det = g.e_u[0] * g.e_v[1] - g.e_u[1] * g.e_v[0]
    assert det == pytest.approx(1.0, abs=1e-12)
    for star, vec, want in ((g.e_u_star, g.e_u, 1.0), (g.e_u_star, g.e_v, 0.0),
                            (g.e_v_star, g.e_v, 1.0), (g.e_v_star, g.e_u, 0.0)):
        got = star[0] * vec[0] + star[1] * vec[1]
        assert got == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("A", MAPS)
@pytest.mark.parametrize("m", METRICS)
def test_dual_parallelogram_identity(A, m):
    # area of the dual cell is the inverse fibre area
    g = geometry(A, m)
    assert math.sqrt(g.E * g.G) * g.sin_theta * g.area == pytest.approx(
        1.0, abs=1e-12)
    assert g.E > 0 and g.G > 0 and g.E * g.G - g.F * g.F > 0
    assert g.cos_theta ** 2 + g.sin_theta ** 2 == pytest.approx(1.0, abs=1e-14)
    assert g.c == pytest.approx(
        1.0 / (math.sqrt(g.D) * g.area * g.sin_theta), rel=1e-14)


def test_eigenvector_property():
    for A in MAPS:
        g = geometry(A, (1, 0, 1))
        Au = mat_vec(A, [g.e_u[0], g.e_u[1]])
        Av = mat_vec(A, [g.e_v[0], g.e_v[1]])
        assert Au[0] == pytest.approx(g.lam * g.e_u[0], rel=1e-12, abs=1e-12)
        assert Au[1] == pytest.approx(g.lam * g.e_u[1], rel=1e-12, abs=1e-12)
        assert Av[0] == pytest.approx(g.e_v[0] / g.lam, rel=1e-12, abs=1e-12)
        assert Av[1] == pytest.approx(g.e_v[1] / g.lam, rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------------------
# the transpose-side form

def test_q_dual_examples():
    assert q_dual(CATMAP).coeffs() == (-1, 1, 1)
    assert q_dual(((1, 3), (1, 4))).coeffs() == (-3, -3, 1)


def test_q_dual_discriminant_matches_direct_form():
    from solspec.qforms import form_from_matrix
    for A in MAPS:
        assert q_dual(A).discriminant == form_from_matrix(A).discriminant


# ---------------------------------------------------------------------------
# eigencoordinates and spectral parameters

@pytest.mark.parametrize("A", MAPS)
def test_form_factorizes_through_eigencoords(A):
    g = geometry(A, (1, 0, 1))
    rng = random.Random(7)
    sqD = math.sqrt(g.D)
    for _ in range(1000):
        m = rng.randint(-1000, 1000)
        n = rng.randint(-1000, 1000)
        if (m, n) == (0, 0):
            continue
        p, q = eigencoords(g, (m, n))
        qv = g.qform(m, n)
        assert p * q * sqD == pytest.approx(qv, rel=1e-10, abs=1e-9)


@pytest.mark.parametrize("A", MAPS)
def test_transpose_equivariance_of_eigencoords(A):
    g = geometry(A, (2, 1, 1))
    rng = random.Random(11)
    for _ in range(200):
        gam = (rng.randint(-50, 50), rng.randint(-50, 50))
        if gam == (0, 0):
            continue
        p, q = eigencoords(g, gam)
        ps, qs = eigencoords(g, mat_vec(g.a_star, gam))
        assert ps == pytest.approx(g.lam * p, rel=1e-10, abs=1e-12)
        assert qs == pytest.approx(q / g.lam, rel=1e-10, abs=1e-12)


def test_nu_alpha_catmap_value():
    g = geometry(CATMAP, (1, 0, 1))
    nu, _ = nu_alpha(g, (1, 0))
    assert nu == pytest.approx(8 * math.pi ** 2 * (1 / math.sqrt(5)) * (-1),
                               rel=1e-12)


@pytest.mark.parametrize("A", MAPS)
def test_nu_alpha_orbit_behaviour(A):
    # moving along an orbit keeps nu and steps alpha by exactly one
    g = geometry(A, (1, -0.3, 0.7))
    rng = random.Random(3)
    for _ in range(100):
        gam = (rng.randint(-30, 30), rng.randint(-30, 30))
        if gam == (0, 0):
            continue
        nu, alpha = nu_alpha(g, gam)
        nu2, alpha2 = nu_alpha(g, mat_vec(g.a_star, gam))
        assert nu2 == nu
        assert alpha2 == pytest.approx(alpha + 1.0, abs=1e-10)
        nu3, alpha3 = nu_alpha(g, (-gam[0], -gam[1]))
        assert (nu3, alpha3) == (nu, alpha)


def test_nu_alpha_rejects_zero():
    g = geometry(CATMAP, (1, 0, 1))
    with pytest.raises(ValidationError):
        nu_alpha(g, (0, 0))


# ---------------------------------------------------------------------------
# strip reduction and orbit enumeration

@pytest.mark.parametrize("A", MAPS)
def test_strip_reduce_window_and_consistency(A):
    g = geometry(A, (1, 0, 1))
    rng = random.Random(5)
    for _ in range(300):
        gam = (rng.randint(-10**6, 10**6), rng.randint(-10**6, 10**6))
        if gam == (0, 0):
            continue
        red, k = strip_reduce(g, gam)
        p, _ = eigencoords(g, red)
        assert 1.0 - 1e-9 <= abs(p) < g.lam * (1 + 1e-9)
        back = mat_vec(mat_pow(g.a_star, k), red)
        assert tuple(back) == tuple(gam)


def test_orbit_enumerate_is_partition():
    g = geometry(CATMAP, (1, 0, 1))
    reps = orbit_enumerate(g, CATMAP, 50)
    assert reps, "expected some orbits at qmax=50"
    keys = set()
    for r in reps:
        for k in range(-3, 4):
            shifted = mat_vec(mat_pow(g.a_star, k), r.gamma)
            red, _ = strip_reduce(g, shifted)
            assert red == r.gamma
        assert r.gamma not in keys
        keys.add(r.gamma)
        assert r.qvalue == g.qform(*r.gamma)
        assert 0 < abs(r.qvalue) <= 50


def test_orbit_enumerate_deterministic_order():
    g = geometry(CATMAP, (1, 0, 1))
    a = orbit_enumerate(g, CATMAP, 30)
    b = orbit_enumerate(g, CATMAP, 30)
    assert [r.gamma for r in a] == [r.gamma for r in b]
    qs = [abs(r.qvalue) for r in a]
    assert qs == sorted(qs)


def test_orbit_count_asymptotics_catmap():
    g = geometry(CATMAP, (1, 0, 1))
    qmax = 10**4
    reps = orbit_enumerate(g, CATMAP, qmax)
    expected = 4 * g.mu * qmax / math.sqrt(5)
    assert abs(len(reps) - expected) <= 0.02 * expected


def test_orbit_enumerate_rejects_bad_qmax():
    g = geometry(CATMAP, (1, 0, 1))
    with pytest.raises(ValidationError):
        orbit_enumerate(g, CATMAP, 0)


# ---------------------------------------------------------------------------
# curvature

def test_curvature_values_and_sign():
    g = geometry(CATMAP, (1, 0, 1))
    assert curvature(g) == pytest.approx(-2 * g.mu ** 2, rel=1e-14)
    assert curvature(g) == pytest.approx(-1.8525, abs=2e-4)
    for A in MAPS:
        for m in METRICS:
            assert curvature(geometry(A, m)) < 0
