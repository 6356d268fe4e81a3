"""Spectrum assembly, degeneracy prediction, grouping, field evaluation."""

import math

import numpy as np
import pytest

from solspec.errors import ValidationError
from solspec.manifold import geometry, orbit_enumerate
from solspec.mathieu import MathieuProblem, clear_cache, solve
from solspec.spectrum import (SpectralLine, assemble, eigenfunction_field,
                              group_degenerate, predicted_multiplicity,
                              to_csv_text, to_json_text, trivial_eigenfunction)
from tests.conftest import CATMAP

FOURPI2 = 4 * math.pi ** 2


@pytest.fixture(scope="module")
def flat():
    # orthogonal case: cos(theta) = 0 exactly
    return geometry(CATMAP, (1.0, 0.0, 1.0))


@pytest.fixture(scope="module")
def generic():
    # principal axes of the fibre metric off the gluing eigendirections
    g = geometry(CATMAP, (1.0, 0.5, 1.0))
    assert abs(g.cos_theta) > 1e-3
    return g


class TestAssemble:
    def test_cut_below_first_tower_line(self, flat):
        t = assemble(flat, CATMAP, 30.0)
        assert [ln.energy for ln in t.lines] == [0.0]
        assert t.lines[0].multiplicity == 1

    def test_first_tower_lines(self, flat):
        t = assemble(flat, CATMAP, 40.0)
        assert len(t.lines) == 2
        assert abs(t.lines[1].energy - FOURPI2) < 1e-12
        assert t.lines[1].multiplicity == 2
        assert t.lines[1].source_kind == "trivial"

    def test_orbit_lines_appear(self, flat):
        t = assemble(flat, CATMAP, 120.0)
        orb = [ln for ln in t.lines if ln.source_kind == "orbit"]
        assert orb, "expected well lines below 120"
        # every |Q|=1 ladder shares one solve: ground lines bitwise equal
        ground = [ln.energy for ln in orb if ln.k_or_l == 0
                  and abs(ln.orbit.qvalue) == 1]
        assert len(ground) == 4
        assert len(set(ground)) == 1
        # ladder bottom sits above the well depth 8 pi^2 c
        nu1 = 8 * math.pi ** 2 * flat.c
        assert ground[0] > nu1

    def test_sorted_and_positive(self, flat):
        t = assemble(flat, CATMAP, 250.0)
        es = [ln.energy for ln in t.lines]
        assert es == sorted(es)
        assert es[0] == 0.0
        assert all(e >= 0 for e in es)

    def test_shift_term_moves_lines(self, generic):
        # cos(theta) != 0 splits the +Q/-Q ladders
        t = assemble(generic, CATMAP, 200.0)
        orb = [ln for ln in t.lines if ln.source_kind == "orbit"
               and ln.k_or_l == 0 and abs(ln.orbit.qvalue) == 1]
        plus = {ln.energy for ln in orb if ln.orbit.qvalue == 1}
        minus = {ln.energy for ln in orb if ln.orbit.qvalue == -1}
        assert len(plus) == 1 and len(minus) == 1
        gap = abs(plus.pop() - minus.pop())
        nu1 = 8 * math.pi ** 2 * generic.c
        assert abs(gap - 2 * nu1 * abs(generic.cos_theta)) < 1e-6 * nu1

    def test_completeness_under_wider_scan(self, flat):
        t = assemble(flat, CATMAP, 150.0)
        wide = assemble(flat, CATMAP, 150.0, _qmax=2 * t.meta["qmax"])
        assert to_csv_text(wide) == to_csv_text(t)

    def test_ladder_has_no_hidden_level(self, flat):
        # the per-orbit level cut is exact: next solved level lies above
        reps = orbit_enumerate(flat, CATMAP, 1)
        nu = abs(reps[0].nu)
        t = assemble(flat, CATMAP, 150.0)
        used = max(ln.k_or_l for ln in t.lines
                   if ln.source_kind == "orbit" and abs(ln.orbit.qvalue) == 1)
        sol = solve(MathieuProblem(nu_abs=nu, mu=flat.mu), kmax=used + 3,
                    tol=1e-8)
        assert sol.levels[used + 1] > 150.0

    def test_validation(self, flat):
        with pytest.raises(ValidationError):
            assemble(flat, CATMAP, 0.0)

    def test_deterministic_bytes(self, flat):
        # cold start on both sides: cached ladders solved at a larger kmax
        # agree only to solver tolerance, not bitwise
        clear_cache()
        a = to_csv_text(assemble(flat, CATMAP, 180.0))
        clear_cache()
        b = to_csv_text(assemble(flat, CATMAP, 180.0))
        assert a == b
        ja = to_json_text(assemble(flat, CATMAP, 180.0))
        clear_cache()
        jb = to_json_text(assemble(flat, CATMAP, 180.0))
        assert ja == jb


class TestPredictedMultiplicity:
    def test_single_divisor(self):
        # Q(0,1) = 1: one orbit, doubled by the sign pair
        assert predicted_multiplicity(CATMAP, (0, 1)) == 2

    def test_eleven(self):
        # n = 11: divisors 1 and 11 both split, so N = 2 and m = 4
        assert predicted_multiplicity(CATMAP, (1, 3)) == 4

    def test_square_of_map_doubles(self):
        sq = ((5, 3), (3, 2))
        assert predicted_multiplicity(sq, (0, 1)) == 2 * predicted_multiplicity(
            CATMAP, (0, 1))

    def test_negative_value_side(self):
        # Q(1,0) = -1 for the cat map form
        assert predicted_multiplicity(CATMAP, (1, 0)) == 2

    def test_rejects_zero(self):
        with pytest.raises(ValidationError):
            predicted_multiplicity(CATMAP, (0, 0))

    @pytest.mark.parametrize("gamma", [(0, 1), (1, 3), (2, 1), (1, 4), (3, 1)])
    def test_matches_observed_orbit_count(self, flat, gamma):
        # observed count: orbits of the same form value, doubled by sign
        n = flat.qform(*gamma)
        reps = orbit_enumerate(flat, CATMAP, abs(n))
        observed = sum(1 for r in reps if r.qvalue == n)
        assert observed == predicted_multiplicity(CATMAP, gamma)


class TestGrouping:
    def test_orthogonal_sign_pairs_merge(self, flat):
        t = group_degenerate(assemble(flat, CATMAP, 150.0))
        orb = [ln for ln in t.lines if ln.source_kind == "orbit"
               and abs(ln.orbit.qvalue) == 1 and ln.k_or_l == 0]
        assert len(orb) == 1
        assert orb[0].multiplicity == 4
        assert orb[0].status == "predicted-nongeneric-pm"

    def test_generic_metric_groups_match_prediction(self, generic):
        t = group_degenerate(assemble(generic, CATMAP, 250.0))
        merged = [ln for ln in t.lines if ln.members]
        assert merged, "expected at least one degenerate group"
        for ln in merged:
            assert ln.status == "predicted"
            assert ln.multiplicity == predicted_multiplicity(
                CATMAP, ln.orbit.gamma)

    def test_grouping_tol_validation(self, flat):
        t = assemble(flat, CATMAP, 50.0)
        with pytest.raises(ValidationError):
            group_degenerate(t, grouping_tol=0.0)

    def test_huge_tol_merges_everything(self, flat):
        t = assemble(flat, CATMAP, 120.0)
        g = group_degenerate(t, grouping_tol=1e6)
        assert len(g.lines) == 1
        assert g.lines[0].multiplicity == sum(l.multiplicity for l in t.lines)
        assert g.lines[0].status == "accidental"

    def test_multiplicity_conserved(self, generic):
        t = assemble(generic, CATMAP, 250.0)
        g = group_degenerate(t)
        assert sum(l.multiplicity for l in g.lines) == sum(
            l.multiplicity for l in t.lines)


class TestSerialization:
    def test_csv_shape(self, flat):
        text = to_csv_text(assemble(flat, CATMAP, 60.0))
        lines = text.strip().split("\n")
        assert lines[0] == "energy,multiplicity,source_kind,k_or_l,gamma_x,gamma_y,qvalue"
        first = lines[1].split(",")
        assert first[0] == "0" and first[2] == "trivial"
        assert first[4] == first[5] == first[6] == ""

    def test_orbit_row_has_gamma(self, flat):
        text = to_csv_text(assemble(flat, CATMAP, 120.0))
        rows = [r.split(",") for r in text.strip().split("\n")[1:]]
        orb = [r for r in rows if r[2] == "orbit"]
        assert orb and all(r[4] and r[5] and r[6] for r in orb)

    def test_json_roundtrip_fields(self, flat):
        import json
        obj = json.loads(to_json_text(assemble(flat, CATMAP, 60.0)))
        assert obj["meta"]["count"] == len(obj["lines"])
        assert obj["lines"][0]["energy"] == 0.0


class TestField:
    def test_gluing_identity(self, flat):
        rng = np.random.default_rng(3)
        pts = np.column_stack([rng.uniform(-1, 1, 100),
                               rng.uniform(-1, 1, 100),
                               rng.uniform(-0.5, 1.5, 100)])
        tol = 1e-8
        val = eigenfunction_field(flat, CATMAP, (1, 0), 2, pts, trunc_tol=tol)
        A = np.array(CATMAP, dtype=float)
        moved = pts.copy()
        moved[:, :2] = pts[:, :2] @ A.T
        moved[:, 2] += 1.0
        val2 = eigenfunction_field(flat, CATMAP, (1, 0), 2, moved,
                                   trunc_tol=tol)
        scale = float(np.max(np.abs(val))) or 1.0
        assert float(np.max(np.abs(val2 - val))) < 10 * tol * max(1.0, scale)

    def test_nontrivial_values(self, flat):
        pts = np.array([[0.1, 0.2, 0.4], [0.3, 0.7, 0.6]])
        val = eigenfunction_field(flat, CATMAP, (1, 0), 0, pts)
        assert np.all(np.isfinite(val))
        assert float(np.max(np.abs(val))) > 1e-3

    def test_rejects_zero_gamma(self, flat):
        with pytest.raises(ValidationError):
            eigenfunction_field(flat, CATMAP, (0, 0), 0,
                                np.zeros((1, 3)))

    def test_trivial_forms(self):
        z = np.linspace(0, 1, 7)
        assert np.allclose(trivial_eigenfunction(0, z), 1.0)
        assert np.allclose(trivial_eigenfunction(2, z),
                           np.cos(4 * math.pi * z))
        assert np.allclose(trivial_eigenfunction(1, z, kind="sin"),
                           np.sin(2 * math.pi * z))
        with pytest.raises(ValidationError):
            trivial_eigenfunction(0, z, kind="sin")

    def test_requires_point_matrix(self, flat):
        with pytest.raises(ValidationError):
            eigenfunction_field(flat, CATMAP, (1, 0), 0, np.zeros((3,)))


class TestLineValidation:
    def test_source_kind_checked(self):
        with pytest.raises(ValidationError):
            SpectralLine(energy=1.0, multiplicity=1, source_kind="bogus",
                         k_or_l=0)

    def test_orbit_requires_payload(self):
        with pytest.raises(ValidationError):
            SpectralLine(energy=1.0, multiplicity=1, source_kind="orbit",
                         k_or_l=0)
