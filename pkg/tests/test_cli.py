import json

import pytest

from semiclab import cli


def test_passing_suite_exits_zero(capsys):
    assert cli.main(["verify", "metaplectic-table"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_failing_check_exits_one(capsys):
    # the coarse grid has not converged yet, so the residual check must fail
    assert cli.main(["verify", "theorem1", "--row", "free", "--M", "64"]) == 1
    assert "FAIL" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["spectrum", "homoclinic", "--hbar", "-1"],
    ["spectrum", "homoclinic", "--mu-nu", "0"],
    ["spectrum", "homoclinic", "--action", "0.1"],
    ["spectrum", "homoclinic", "--symmetric", "--window", "1", "0"],
    ["demo", "dilation", "--samples", "0"],
])
def test_bad_input_exits_two(argv, capsys):
    assert cli.main(argv) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_malformed_config_exits_two(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("hbar 0.1\n")
    assert cli.main(["spectrum", "homoclinic", "--symmetric", "--config", str(cfg)]) == 2


def test_config_values_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# spectrum settings\nhbar = 0.001\nwindow = -0.5 0.5\nseed = 4\n")
    args = cli.parse(["spectrum", "homoclinic", "--symmetric", "--config", str(cfg)])
    assert args.hbar == 0.001 and args.window == [-0.5, 0.5] and args.seed == 4
    args = cli.parse(["spectrum", "homoclinic", "--symmetric", "--config", str(cfg), "--hbar", "0.01"])
    assert args.hbar == 0.01


def test_defaults_without_config():
    args = cli.parse(["demo", "dilation"])
    assert args.tol_profile == "default" and args.seed == 0 and args.t is None


def test_out_directory_receives_json_and_csv(tmp_path):
    assert cli.main(["spectrum", "homoclinic", "--hbar", "1e-3", "--symmetric", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "spectrum-homoclinic.json").read_text())
    assert report["suite"] == "spectrum-homoclinic"
    assert report["all_pass"] is True
    assert {"python", "numpy", "seed", "tol_profile"} <= set(report["environment"])
    header = (tmp_path / "spectrum-homoclinic.csv").read_text().splitlines()[0]
    assert header == "omega,residual,label,winding"


def test_csv_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert cli.main(["demo", "dilation", "--samples", "500", "--seed", "3", "--out", str(d)]) == 0
    assert (a / "demo-dilation.csv").read_text() == (b / "demo-dilation.csv").read_text()


def test_csv_text_round_trips_floats():
    text = cli.csv_text([{"x": 0.1 + 0.2, "n": 3}])
    assert text.splitlines() == ["x,n", repr(0.1 + 0.2) + ",3"]
    assert cli.csv_text([]) == ""


def test_unknown_suite_is_rejected():
    with pytest.raises(SystemExit):
        cli.main(["verify", "no-such-suite"])


def test_sphere_part_writes_coefficient_profile(tmp_path):
    assert cli.main(["verify", "sphere", "--suite", "acoeffs", "--N", "64", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "sphere.csv").read_text().splitlines()
    assert lines[0] == "N,n,C"
    assert len(lines) == 65


def test_statistics_part_selection(capsys):
    assert cli.main(["verify", "statistics", "--which", "prop3", "--hbar", "0.2"]) == 0
    out = capsys.readouterr().out
    assert "exchange as composition hbar=0.2" in out
    assert "Husimi" not in out


def test_custom_matrix_row(capsys):
    assert cli.main(["verify", "theorem1", "--row", "1,0.2j,0,1", "--M", "128"]) == 0
    assert cli.main(["verify", "theorem1", "--row", "1,2,3,4"]) == 2
    assert cli.main(["verify", "theorem1", "--row", "sideways"]) == 2


@pytest.mark.parametrize("argv", [
    ["verify", "group-law", "--suite", "an"],
    ["verify", "sphere", "--which", "prop3"],
    ["verify", "sphere", "--N", "1"],
])
def test_misapplied_options_exit_two(argv):
    assert cli.main(argv) == 2
