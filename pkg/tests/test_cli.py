"""End-to-end checks of the command-line interface: example outputs,
exit codes, selftests, file emission, and byte-level determinism."""

import json
import subprocess
import sys
import time
import xml.etree.ElementTree as ET

import pytest

from solspec import cli


def _run(args, capsys):
    rc = cli.run(args)
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


def _val(out, key):
    for line in out.splitlines():
        if line.startswith(key + ": "):
            return line.split(": ", 1)[1]
    raise AssertionError(f"{key!r} missing in:\n{out}")


class TestForms:
    def test_example_representation_count(self, capsys):
        rc, out, _ = _run(["forms", "--matrix", "2,1,1,1", "--n", "11"], capsys)
        assert rc == 0
        assert "N=2" in out.splitlines()
        assert "m=4" in out.splitlines()

    def test_arithmetic_summary(self, capsys):
        rc, out, _ = _run(["forms", "--matrix", "2,1,1,1"], capsys)
        assert rc == 0
        assert _val(out, "discriminant") == "5"
        assert _val(out, "class_number") == "1"
        assert _val(out, "pell_fundamental") == "X=3 Y=1"
        assert _val(out, "automorph") == "[[2,1],[1,1]]"
        assert _val(out, "primitivity_index") == "1"

    def test_square_of_map_has_index_two(self, capsys):
        rc, out, _ = _run(["forms", "--matrix", "5,3,3,2"], capsys)
        assert rc == 0
        assert _val(out, "primitivity_index") == "2"

    def test_json_file(self, capsys, tmp_path):
        rc, out, _ = _run(["forms", "--matrix", "2,1,1,1", "--n", "11",
                           "--out", str(tmp_path)], capsys)
        assert rc == 0
        payload = json.loads((tmp_path / "forms.json").read_text())
        assert payload["N"] == 2
        assert payload["m"] == 4
        assert payload["automorph"] == [[2, 1], [1, 1]]

    def test_zero_n_rejected(self, capsys):
        rc, _, err = _run(["forms", "--n", "0"], capsys)
        assert rc == 2
        assert err.startswith("solspec: validation:")


class TestSpectrum:
    def test_summary_and_files(self, capsys, tmp_path):
        rc, out, _ = _run(["spectrum", "--energy-cut", "200",
                           "--out", str(tmp_path)], capsys)
        assert rc == 0
        assert int(_val(out, "lines")) > 0
        assert int(_val(out, "groups")) > 0
        assert _val(out, "multiplicity_check") == "ok"
        for name in ("spectrum.csv", "spectrum_grouped.csv", "spectrum.json"):
            assert (tmp_path / name).exists()
        payload = json.loads((tmp_path / "spectrum.json").read_text())
        assert payload["meta"]["count"] == int(_val(out, "groups"))

    def test_generic_metric_has_predicted_groups(self, capsys):
        # 1.3,0.25,0.8 is not a combination of the identity and the matrix,
        # so the eigendirections are skew and sign pairs split
        rc, out, _ = _run(["spectrum", "--metric", "1.3,0.25,0.8",
                           "--energy-cut", "300"], capsys)
        assert rc == 0
        assert int(_val(out, "predicted")) > 0
        assert int(_val(out, "accidental")) == 0
        assert _val(out, "multiplicity_check") == "ok"

    def test_bad_grouping_tol(self, capsys):
        rc, _, err = _run(["spectrum", "--grouping-tol", "-1"], capsys)
        assert rc == 2
        assert err.startswith("solspec: validation:")


class TestWeyl:
    def test_ratio_near_one(self, capsys, tmp_path):
        rc, out, _ = _run(["weyl", "--energy", "600",
                           "--out", str(tmp_path)], capsys)
        assert rc == 0
        assert abs(float(_val(out, "ratio")) - 1.0) < 0.1
        text = (tmp_path / "weyl.csv").read_text().splitlines()
        assert text[0] == "energy,empirical,predicted,ratio"
        assert len(text) == 9

    def test_counts_match_area_one(self, capsys):
        rc, out, _ = _run(["weyl", "--energy", "400"], capsys)
        assert rc == 0
        assert _val(out, "area") == "1"
        assert int(_val(out, "empirical")) > 0


class TestSpacing:
    def test_orbit_only_summary(self, capsys, tmp_path):
        rc, out, _ = _run(["spacing", "--qmax", "900",
                           "--out", str(tmp_path)], capsys)
        assert rc == 0
        assert _val(out, "mode") == "orbit-only"
        assert _val(out, "involution") == "none"
        ratio = float(_val(out, "count_ratio"))
        assert 1.5 < ratio < 2.0
        frac = float(_val(out, "zero_spacing_fraction"))
        assert 0.0 < frac < 1.0
        for name in ("spacing.csv", "growth.csv", "spacing.svg"):
            assert (tmp_path / name).exists()

    def test_involution_mode_reduces(self, capsys):
        rc, out1, _ = _run(["spacing", "--qmax", "900"], capsys)
        rc2, out2, _ = _run(["spacing", "--qmax", "900",
                             "--mode", "extra-involution"], capsys)
        assert rc == 0 and rc2 == 0
        assert int(_val(out2, "values")) < int(_val(out1, "values"))
        assert _val(out2, "involution") != "none"

    def test_zero_fraction_grows_with_bound(self, capsys):
        rc, out, _ = _run(["spacing", "--qmax", "3600",
                           "--mode", "extra-involution",
                           "--checkpoints", "900,3600"], capsys)
        assert rc == 0
        fracs = [float(line.split("zero_fraction=")[1].split()[0])
                 for line in out.splitlines() if line.startswith("checkpoint")]
        assert len(fracs) == 2
        assert fracs[0] < fracs[1]

    def test_checkpoint_beyond_qmax(self, capsys):
        rc, _, err = _run(["spacing", "--qmax", "100",
                           "--checkpoints", "50,200"], capsys)
        assert rc == 2
        assert err.startswith("solspec: validation:")


class TestFlower:
    def test_transport_recovers_gluing(self, capsys):
        rc, out, _ = _run(["flower", "--matrix", "2,1,1,1",
                           "--qmax", "3600", "--transport"], capsys)
        assert rc == 0
        assert _val(out, "transport") == "[[2,1],[1,1]]"

    def test_files_and_svg(self, capsys, tmp_path):
        rc, out, _ = _run(["flower", "--qmax", "400",
                           "--out", str(tmp_path)], capsys)
        assert rc == 0
        assert int(_val(out, "points")) > 0
        csv = (tmp_path / "flower.csv").read_text().splitlines()
        assert len(csv) == int(_val(out, "points")) + 1
        root = ET.fromstring((tmp_path / "flower.svg").read_text())
        assert root.tag.endswith("svg")

    def test_box_cap(self, capsys):
        rc, _, err = _run(["flower", "--box", "9999"], capsys)
        assert rc == 3
        assert err.startswith("solspec: resource:")


class TestGeodesic:
    def test_flat_unit_momenta_landmarks(self, capsys, tmp_path):
        rc, out, _ = _run(["geodesic", "--out", str(tmp_path)], capsys)
        assert rc == 0
        assert _val(out, "energy") == "1.5"
        assert float(_val(out, "h_drift")) < 1e-8
        assert _val(out, "turning") == "z_minus=-0.5 z_plus=0.5"
        assert float(_val(out, "caustic_residual")) < 1e-5
        assert (tmp_path / "trajectory.csv").exists()

    def test_vertical_point_has_no_turning(self, capsys):
        rc, out, _ = _run(["geodesic", "--point", "0,0,0,0,0,1",
                           "--duration", "2"], capsys)
        assert rc == 0
        assert _val(out, "turning").startswith("none")

    def test_bad_duration(self, capsys):
        rc, _, err = _run(["geodesic", "--duration", "-3"], capsys)
        assert rc == 2
        assert err.startswith("solspec: validation:")


class TestField:
    def test_gluing_residual_small(self, capsys, tmp_path):
        rc, out, _ = _run(["field", "--grid", "12",
                           "--out", str(tmp_path)], capsys)
        assert rc == 0
        assert float(_val(out, "gluing_residual")) < 1e-7
        assert float(_val(out, "max_abs")) > 0
        csv = (tmp_path / "field.csv").read_text().splitlines()
        assert len(csv) == 12 * 12 + 1
        assert (tmp_path / "field.svg").exists()

    def test_zero_gamma_rejected(self, capsys):
        rc, _, err = _run(["field", "--gamma", "0,0"], capsys)
        assert rc == 2
        assert err.startswith("solspec: validation:")


class TestSelftests:
    @pytest.mark.parametrize("cmd", ["forms", "spectrum", "weyl", "spacing",
                                     "flower", "geodesic", "field"])
    def test_selftest_passes_quickly(self, cmd, capsys):
        t0 = time.perf_counter()
        rc, out, _ = _run([cmd, "--selftest"], capsys)
        elapsed = time.perf_counter() - t0
        assert rc == 0
        assert out.splitlines()[-1] == "selftest: pass"
        assert elapsed < 60.0


class TestDeterminism:
    def test_identical_reruns(self, capsys):
        _, out1, _ = _run(["spacing", "--qmax", "900",
                           "--mode", "extra-involution"], capsys)
        _, out2, _ = _run(["spacing", "--qmax", "900",
                           "--mode", "extra-involution"], capsys)
        assert out1 == out2

    def test_thread_count_does_not_change_output(self, capsys):
        base = ["spacing", "--qmax", "900", "--checkpoints", "100,300,900"]
        _, out1, _ = _run(base + ["--threads", "1"], capsys)
        _, out2, _ = _run(base + ["--threads", "3"], capsys)
        assert out1 == out2

    def test_json_config_overrides_flags(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"matrix": [2, 1, 1, 1], "n": 11}))
        _, out1, _ = _run(["forms", "--n", "5",
                           "--json-config", str(cfg)], capsys)
        _, out2, _ = _run(["forms", "--matrix", "2,1,1,1", "--n", "11"], capsys)
        assert out1 == out2
        assert "N=2" in out1.splitlines()

    def test_unknown_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"no_such_flag": 1}')
        rc, _, err = _run(["forms", "--json-config", str(cfg)], capsys)
        assert rc == 2
        assert err.startswith("solspec: validation:")

    def test_missing_config_file(self, capsys):
        rc, _, err = _run(["forms", "--json-config", "/no/such/file.json"],
                          capsys)
        assert rc == 2
        assert err.startswith("solspec: validation:")


class TestExitCodes:
    def test_validation_error_single_line(self, capsys):
        rc, _, err = _run(["forms", "--matrix", "2,1,1,0"], capsys)
        assert rc == 2
        assert err.count("\n") == 1
        assert err.startswith("solspec: validation:")

    def test_console_script(self):
        proc = subprocess.run(
            [sys.executable, "-m", "solspec.cli", "forms",
             "--matrix", "2,1,1,1", "--n", "11"],
            capture_output=True, text=True, timeout=120)
        assert proc.returncode == 0
        assert "N=2" in proc.stdout.splitlines()
