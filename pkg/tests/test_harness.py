"""End-to-end experiment harness: files, schemas, determinism, witness injection."""

import csv
import hashlib
import json
import os

import pytest

from singulab.config import resolve_config
from singulab.harness import CSV_DIALECT, run_experiment
from singulab.plotting import chart_data

FILES = ("results.csv", "results.json", "plot.svg", "manifest.json")


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run_small_sign(tmp_path, sub="a", **overrides):
    cfg = resolve_config(
        "rrr-sign", {"sample_sizes": [50, 100], "reps": 100, **overrides}
    )
    return run_experiment(cfg, tmp_path / sub)


def test_error_curve_run_writes_all_artifacts(tmp_path):
    res = run_small_sign(tmp_path)
    for name in FILES:
        assert (res.out_dir / name).exists(), name
    rows = read_rows(res.out_dir / "results.csv")
    assert [c for c in rows[0]] == [
        "experiment", "n", "grid_point_id", "alpha_hat", "beta_hat",
        "sum", "mc_half_width", "seed",
    ]
    assert [r["n"] for r in rows] == ["50", "100"]


def test_witness_pair_injected_and_dominates(tmp_path):
    res = run_small_sign(tmp_path)
    payload = json.loads((res.out_dir / "results.json").read_text())
    assert payload["witness"] is not None
    rows = read_rows(res.out_dir / "results.csv")
    # the equivalent pair forces the summed errors to exactly 1
    assert all(float(r["sum"]) == 1.0 for r in rows)


def test_rerun_is_byte_identical(tmp_path):
    a = run_small_sign(tmp_path, "a")
    b = run_small_sign(tmp_path, "b")
    for name in FILES:
        ha = hashlib.sha256((a.out_dir / name).read_bytes()).hexdigest()
        hb = hashlib.sha256((b.out_dir / name).read_bytes()).hexdigest()
        assert ha == hb, name


def test_seed_change_alters_results(tmp_path):
    a = run_small_sign(tmp_path, "a")
    b = run_small_sign(tmp_path, "b", base_seed=1)
    assert (a.out_dir / "results.csv").read_bytes() != (
        b.out_dir / "results.csv"
    ).read_bytes()


def test_thread_count_does_not_change_bytes(tmp_path):
    old = os.environ.get("SINGULAB_THREADS")
    try:
        os.environ["SINGULAB_THREADS"] = "1"
        a = run_small_sign(tmp_path, "a")
        os.environ["SINGULAB_THREADS"] = "4"
        b = run_small_sign(tmp_path, "b")
    finally:
        if old is None:
            os.environ.pop("SINGULAB_THREADS", None)
        else:
            os.environ["SINGULAB_THREADS"] = old
    assert (a.out_dir / "results.csv").read_bytes() == (
        b.out_dir / "results.csv"
    ).read_bytes()


def test_single_rep_run_is_well_formed(tmp_path):
    cfg = resolve_config("gmm-ordering", {"sample_sizes": [50], "reps": 1})
    res = run_experiment(cfg, tmp_path / "tiny")
    rows = read_rows(res.out_dir / "results.csv")
    assert len(rows) == 1
    assert float(rows[0]["alpha_hat"]) in (0.0, 1.0)
    json.loads((res.out_dir / "results.json").read_text())
    chart_data((res.out_dir / "plot.svg").read_text())


def test_chart_embeds_the_csv_numbers(tmp_path):
    res = run_small_sign(tmp_path)
    rows = read_rows(res.out_dir / "results.csv")
    data = chart_data((res.out_dir / "plot.svg").read_text())
    sums = next(s for s in data["series"] if s["label"] == "alpha + beta")
    assert sums["y"] == [float(r["sum"]) for r in rows]


def test_manifest_documents_the_run(tmp_path):
    res = run_small_sign(tmp_path)
    manifest = json.loads((res.out_dir / "manifest.json").read_text())
    assert manifest["library"] == "singulab"
    assert manifest["experiment"] == "rrr-sign"
    assert manifest["base_seed"] == 0
    assert manifest["csv_dialect"] == CSV_DIALECT
    assert set(manifest["files"]) == set(FILES)
    assert manifest["config"]["reps"] == 100
    assert manifest["csv_columns"] == [
        "experiment", "n", "grid_point_id", "alpha_hat", "beta_hat",
        "sum", "mc_half_width", "seed",
    ]


def test_contraction_run_schema(tmp_path):
    cfg = resolve_config(
        "contraction",
        {"sample_sizes": [50, 100], "reps": 20, "params": {"gap_count": 7}},
    )
    res = run_experiment(cfg, tmp_path / "c")
    rows = read_rows(res.out_dir / "results.csv")
    assert [c for c in rows[0]] == [
        "experiment", "mode", "n", "epsilon", "mass", "mass_se", "seed",
    ]
    modes = {r["mode"] for r in rows}
    assert modes == {"separated", "full-alternative"}
    for r in rows:
        assert 0.0 <= float(r["mass"]) <= 1.0


def test_scale_scan_run_schema_and_products(tmp_path):
    cfg = resolve_config(
        "scale-scan",
        {
            "sample_sizes": [30, 60, 120, 240],
            "reps": 20,
            "params": {"deltas": [0.0, 0.3, 0.8, 2.0]},
            "calibration": {"bootstrap": 29},
        },
    )
    res = run_experiment(cfg, tmp_path / "s")
    rows = read_rows(res.out_dir / "results.csv")
    assert [c for c in rows[0]] == [
        "experiment", "n", "delta", "power", "product", "a_hat",
        "mc_half_width", "seed",
    ]
    assert len(rows) == 16
    for r in rows:
        n, d, prod = int(r["n"]), float(r["delta"]), float(r["product"])
        if d == 0.0:
            assert prod == 0.0
        else:
            a_hat = float(r["a_hat"])
            assert prod == pytest.approx(n * d ** (2 * a_hat))
    data = chart_data((res.out_dir / "plot.svg").read_text())
    assert data["chart"] == "heatmap"
    assert len(data["overlays"]) == 2


def test_hellinger_run_schema(tmp_path):
    cfg = resolve_config("hellinger")
    res = run_experiment(cfg, tmp_path / "h")
    rows = read_rows(res.out_dir / "results.csv")
    assert [c for c in rows[0]] == [
        "experiment", "pair_id", "point_a", "point_b", "h2", "h",
        "error_radius", "method", "n_eval", "seed",
    ]
    for r in rows:
        assert float(r["h"]) == pytest.approx(float(r["h2"]) ** 0.5)


def test_output_dir_argument_wins_over_config(tmp_path):
    cfg = resolve_config(
        "rrr-sign",
        {"sample_sizes": [50], "reps": 100, "output_dir": str(tmp_path / "cfgdir")},
    )
    res = run_experiment(cfg, tmp_path / "argdir")
    assert res.out_dir == tmp_path / "argdir"
    assert not (tmp_path / "cfgdir").exists()


def test_config_output_dir_used_when_no_argument(tmp_path):
    cfg = resolve_config(
        "rrr-sign",
        {"sample_sizes": [50], "reps": 100, "output_dir": str(tmp_path / "cfgdir")},
    )
    res = run_experiment(cfg)
    assert res.out_dir == tmp_path / "cfgdir"
    assert (tmp_path / "cfgdir" / "results.csv").exists()
