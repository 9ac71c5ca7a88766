"""Command-line entry points and exit codes."""

import json

import pytest

from singulab._version import __version__
from singulab.cli import main


def test_version_prints_and_exits_zero(capsys):
    assert main(["version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_list_shows_every_experiment(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("gmm-ordering", "gmm-mixture", "rrr-rank", "rrr-sign",
                 "scale-scan", "contraction", "hellinger"):
        assert name in out


def test_hellinger_quadrature_between_named_points(capsys):
    rc = main(["hellinger", "std-normal", "gap2-mixture", "--method", "quadrature"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "h^2" in out and "quadrature" in out


def test_hellinger_inline_point_spec(capsys):
    rc = main(["hellinger", "gmm:0,0,1", "gmm:2,2,1", "--method", "monte-carlo"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "monte-carlo" in out
    # closed form for these two single Gaussians is 1 - exp(-0.5) = 0.3935
    val = float(out.split("h^2 =")[1].split()[0])
    assert abs(val - 0.3935) < 0.02


def test_hellinger_rejects_malformed_point(capsys):
    assert main(["hellinger", "gmm:0,0", "std-normal"]) == 2
    assert "gmm" in capsys.readouterr().err


def test_witness_reports_overlap_pair(capsys):
    assert main(["witness", "gmm-ordering"]) == 0
    out = capsys.readouterr().out
    assert "gmm-label-swap" in out
    w0_json = out.split("(null side): ")[1].splitlines()[0]
    assert json.loads(w0_json)["model"] == "gmm"


def test_witness_absent_for_identifiable_hypothesis(capsys):
    assert main(["witness", "gmm-mixture"]) == 0
    assert "no overlap witness" in capsys.readouterr().out.lower()


def test_witness_unknown_experiment_exits_two(capsys):
    assert main(["witness", "gmm-nonsense"]) == 2
    assert capsys.readouterr().err


def test_run_writes_artifacts(tmp_path, capsys):
    rc = main([
        "run", "rrr-sign", "--reps", "100", "--out", str(tmp_path / "out"),
    ])
    assert rc == 0
    assert (tmp_path / "out" / "results.csv").exists()
    assert str(tmp_path / "out") in capsys.readouterr().out


def test_run_seed_override_changes_output(tmp_path):
    main(["run", "rrr-sign", "--reps", "100", "--out", str(tmp_path / "a")])
    main(["run", "rrr-sign", "--reps", "100", "--seed", "5", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "results.csv").read_bytes() != (
        tmp_path / "b" / "results.csv"
    ).read_bytes()


def test_run_accepts_config_file(tmp_path):
    cfg = {"name": "rrr-sign", "sample_sizes": [50], "reps": 100}
    path = tmp_path / "my.json"
    path.write_text(json.dumps(cfg))
    rc = main(["run", str(path), "--out", str(tmp_path / "out")])
    assert rc == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["config"]["sample_sizes"] == [50]


def test_run_missing_config_file_exits_two(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["run", str(missing)]) == 2
    err = capsys.readouterr().err
    assert "nope.json" in err


def test_run_unknown_experiment_exits_two(capsys):
    assert main(["run", "gmm-nonsense"]) == 2
    assert capsys.readouterr().err


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["hellinger"])  # missing required point arguments
    assert exc.value.code == 2
