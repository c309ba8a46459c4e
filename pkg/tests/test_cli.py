import json

import pytest

from riccisol import cli
from riccisol import metricfile as mf
from riccisol import zoo


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_identities_zoo_pass(capsys):
    code, out, _ = run_cli(
        capsys, "identities", "--zoo", "cigar_cross_line", "--points", "5", "--seed", "7"
    )
    assert code == 0
    assert "FAIL" not in out
    assert "metric_compatibility" in out


def test_identities_sphere_weyl_zero(capsys):
    code, out, _ = run_cli(
        capsys, "identities", "--zoo", "round_sphere4", "--points", "4"
    )
    assert code == 0
    assert "zoo_round_sphere4_w_zero" in out
    assert "FAIL" not in out


def test_soliton_zoo_gaussian(capsys):
    code, out, _ = run_cli(
        capsys, "soliton", "--zoo", "euclidean_gaussian4", "--points", "4"
    )
    assert code == 0
    assert "fitted c=0.0" in out


def test_soliton_cigar_reports_c4(capsys):
    code, out, _ = run_cli(capsys, "soliton", "--zoo", "cigar", "--points", "4")
    assert code == 0
    assert "fitted c=3.99999999" in out or "fitted c=4.0" in out


def test_soliton_nonsoliton_file_fails(capsys, tmp_path):
    spec = zoo.non_soliton_control().spec
    path = tmp_path / "nonsoliton.metric"
    mf.write_metric_file(spec, path)
    code, out, _ = run_cli(capsys, "soliton", str(path), "--points", "4")
    assert code == 1
    assert "FAIL soliton_equation" in out
    assert "not a soliton" in out


def test_div_reports_lemma_values(capsys):
    code, out, _ = run_cli(
        capsys, "div", "--zoo", "cigar_cross_line", "--at", "0,0,0", "--human"
    )
    assert code == 0
    assert "div3_cotton_value" in out
    assert "scalar_cubed_over_8_value" in out
    for line in out.splitlines():
        if "div3_cotton_value" in line or "scalar_cubed_over_8" in line:
            assert "8.00000e+00" in line


def test_div_gaussian_zero(capsys):
    code, out, _ = run_cli(
        capsys, "div", "--zoo", "euclidean_gaussian4", "--at", "1,1,1,1"
    )
    assert code == 0
    for line in out.splitlines():
        if "_value" in line and "div" in line:
            assert "lhs=0.0000000000000000e+00" in line


def test_div_cylinder_cotton_free(capsys):
    code, out, _ = run_cli(
        capsys, "div", "--zoo", "cylinder_shrinker3", "--at", "0,0,0.5"
    )
    assert code == 0
    for line in out.splitlines():
        if "div3_cotton_value" in line:
            value = float(line.split("lhs=")[1].split()[0])
            assert abs(value) < 1e-10  # C is identically zero on the cylinder


def test_pole_error_names_location(capsys, tmp_path):
    bad = "dim = 2\nmetric\ng[1][1] = log(x1)\ng[2][2] = 1\npotential = 0\nlambda = 0\ndomain = box(-1,-1; 1,1)\n"
    path = tmp_path / "bad.metric"
    path.write_text(bad)
    code, out, err = run_cli(capsys, "identities", str(path), "--points", "4", "--order", "3")
    assert code == 2
    assert "error:" in err
    assert "log" in err


def test_insufficient_order_errors(capsys):
    code, _, err = run_cli(
        capsys, "identities", "--zoo", "round_sphere4", "--points", "2", "--order", "3"
    )
    assert code == 2
    assert "order" in err


def test_unknown_zoo_name(capsys):
    code, _, err = run_cli(capsys, "identities", "--zoo", "nope", "--points", "2")
    assert code == 2
    assert "unknown zoo entry" in err


def test_determinism_byte_identical(capsys):
    args = ("soliton", "--zoo", "cylinder_shrinker3", "--points", "6", "--seed", "42")
    _, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    assert out1 == out2


def test_json_mode_records(capsys):
    code, out, _ = run_cli(
        capsys, "soliton", "--zoo", "cigar", "--points", "3", "--json"
    )
    assert code == 0
    records = [json.loads(line) for line in out.strip().splitlines()]
    assert all(
        set(r) == {"check_id", "point", "lhs_norm", "rhs_norm", "residual",
                   "tolerance", "verdict", "note"}
        for r in records
    )
    assert any(r["check_id"] == "soliton_equation" for r in records)


def test_tol_override_forces_failure(capsys):
    # comically strict tolerance: float noise must now FAIL -> exit 1
    code, out, _ = run_cli(
        capsys, "soliton", "--zoo", "cigar_cross_line", "--points", "4",
        "--tol", "1e-30",
    )
    assert code == 1


def test_export_round_trip_same_report(capsys, tmp_path):
    path = tmp_path / "cigar.metric"
    code, _, _ = run_cli(capsys, "export", "--zoo", "cigar", "--out", str(path))
    assert code == 0
    _, out_zoo, _ = run_cli(capsys, "soliton", "--zoo", "cigar", "--points", "5", "--seed", "3")
    _, out_file, _ = run_cli(capsys, "soliton", str(path), "--points", "5", "--seed", "3")
    assert out_zoo == out_file


def test_export_stdout_stable(capsys):
    _, out1, _ = run_cli(capsys, "export", "--zoo", "round_sphere4")
    _, out2, _ = run_cli(capsys, "export", "--zoo", "round_sphere4")
    assert out1 == out2
    assert "dim = 4" in out1


def test_export_list(capsys):
    code, out, _ = run_cli(capsys, "export", "--list")
    assert code == 0
    assert "cigar_cross_circle" in out
    assert "bryant" in out


def test_bryant_command(capsys):
    code, out, _ = run_cli(capsys, "bryant", "--rmax", "4", "--step", "0.02", "--human")
    assert code == 0
    assert "bryant_soliton_residual" in out
    assert "FAIL" not in out


def test_integral_command(capsys):
    code, out, _ = run_cli(capsys, "integral", "--s", "1.0", "--grid", "64", "--human")
    assert code == 0
    assert "integral_identity_gap" in out
    assert "FAIL" not in out


def test_integral_coarse_grid_reports_instability(capsys):
    # a deliberately small grid must honestly FAIL the side-stability check
    code, out, _ = run_cli(capsys, "integral", "--s", "0.8", "--grid", "12", "--human")
    assert code == 1
    assert "integral_lhs_stable" in out


def test_human_vs_full_precision(capsys):
    _, out_full, _ = run_cli(capsys, "div", "--zoo", "euclidean_gaussian3", "--at", "0,0,0")
    _, out_human, _ = run_cli(
        capsys, "div", "--zoo", "euclidean_gaussian3", "--at", "0,0,0", "--human"
    )
    assert "0.0000000000000000e+00" in out_full
    assert "0.00000e+00" in out_human
