import json
from pathlib import Path

import numpy as np
import pytest

from sparsegmm.cli import main
from sparsegmm.experiment import load_matrix_csv


def run_cli(*args):
    return main([str(a) for a in args])


def test_simulate_writes_data_and_truth(tmp_path):
    out = tmp_path / "sim"
    code = run_cli("simulate", "--scenario", "one", "--p", 20, "--n", 15, "--s", 4,
                   "--seed", 3, "--out", out)
    assert code == 0
    mat = load_matrix_csv(out / "data.csv")
    assert mat.shape == (20, 15)
    truth = json.loads((out / "truth.json").read_text())
    assert len(truth["z_true"]) == 15
    assert len(truth["mu_true"]) == 20


def test_simulate_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        run_cli("simulate", "--scenario", "two", "--p", 12, "--n", 10, "--seed", 5,
                "--out", out)
    assert (a / "data.csv").read_bytes() == (b / "data.csv").read_bytes()
    assert (a / "truth.json").read_bytes() == (b / "truth.json").read_bytes()


def test_fit_kmeans_end_to_end(tmp_path):
    sim = tmp_path / "sim"
    run_cli("simulate", "--scenario", "one", "--p", 20, "--n", 40, "--s", 4,
            "--mean-scale", 3.0, "--seed", 1, "--out", sim)
    fit = tmp_path / "fit"
    code = run_cli("fit", "--data", sim / "data.csv", "--method", "kmeans", "--k", 3,
                   "--truth", sim / "truth.json", "--seed", 2, "--out", fit)
    assert code == 0
    est = json.loads((fit / "estimate.json").read_text())
    assert est["k_hat"] == 3
    assert sorted(set(est["z_hat"])) == [1, 2, 3]
    metrics = json.loads((fit / "metrics.json").read_text())
    assert metrics["ari"] == pytest.approx(1.0)  # huge separation
    manifest = json.loads((fit / "manifest.json").read_text())
    assert "versions" in manifest and "data_digest" in manifest
    assert (fit / "assignments.csv").read_text().startswith("observation,label")


def test_fit_bayesian_writes_traces_and_psrf(tmp_path):
    sim = tmp_path / "sim"
    run_cli("simulate", "--scenario", "one", "--p", 15, "--n", 20, "--s", 3,
            "--mean-scale", 2.0, "--seed", 4, "--out", sim)
    fit = tmp_path / "bayes"
    code = run_cli("fit", "--data", sim / "data.csv", "--method", "bayesian",
                   "--n-burn", 10, "--n-keep", 20, "--n-chains", 2, "--seed", 5,
                   "--truth", sim / "truth.json", "--out", fit, "--quiet")
    assert code == 0
    assert (fit / "trace_chain0.ndjson").exists()
    assert (fit / "trace_chain1.ndjson").exists()
    psrf = json.loads((fit / "psrf.json").read_text())
    assert "theta" in psrf and "k" in psrf
    est = json.loads((fit / "estimate.json").read_text())
    assert est["k_hat"] >= 1


def test_fit_deterministic_rerun(tmp_path):
    sim = tmp_path / "sim"
    run_cli("simulate", "--scenario", "one", "--p", 12, "--n", 16, "--s", 3,
            "--seed", 9, "--out", sim)
    fit = tmp_path / "fit"
    files = ("estimate.json", "trace_chain0.ndjson", "metrics.json",
             "manifest.json", "assignments.csv")
    bundles = []
    for _ in range(2):  # identical config and output dir, rerun overwrites
        run_cli("fit", "--data", sim / "data.csv", "--method", "bayesian",
                "--truth", sim / "truth.json",
                "--n-burn", 5, "--n-keep", 10, "--seed", 7, "--out", fit, "--quiet")
        bundles.append(tuple((fit / f).read_bytes() for f in files))
    assert bundles[0] == bundles[1]


def test_fit_without_data_source_exits_2(tmp_path):
    code = run_cli("fit", "--method", "bayesian", "--out", tmp_path / "x")
    assert code == 2


def test_evaluate_subcommand(tmp_path):
    est = {"k_hat": 2, "z_hat": [1, 1, 2, 2], "support": [1],
           "mu_hat": [[1.0, 0.0], [0.0, 0.0]]}
    truth = {"z_true": [1, 1, 2, 2],
             "mu_true": [[1.0, 0.0], [0.0, 0.0]]}
    (tmp_path / "est.json").write_text(json.dumps(est))
    (tmp_path / "truth.json").write_text(json.dumps(truth))
    out = tmp_path / "metrics.json"
    code = run_cli("evaluate", "--estimate", tmp_path / "est.json",
                   "--truth", tmp_path / "truth.json", "--out", out)
    assert code == 0
    m = json.loads(out.read_text())
    assert m["ari"] == 1.0
    assert m["d_h"] == 0.0
    assert m["mean_matrix_error"] == 0.0


def test_diagnose_subcommand(tmp_path):
    sim = tmp_path / "sim"
    run_cli("simulate", "--scenario", "one", "--p", 10, "--n", 14, "--s", 2,
            "--seed", 2, "--out", sim)
    fit = tmp_path / "fit"
    run_cli("fit", "--data", sim / "data.csv", "--method", "bayesian",
            "--n-burn", 5, "--n-keep", 15, "--n-chains", 2, "--seed", 3,
            "--out", fit, "--quiet")
    out = tmp_path / "psrf.json"
    code = run_cli("diagnose", "--data", sim / "data.csv",
                   "--traces", fit / "trace_chain0.ndjson", fit / "trace_chain1.ndjson",
                   "--out", out)
    assert code == 0
    assert "theta" in json.loads(out.read_text())


def test_report_runs_full_experiment(tmp_path):
    cfg = {
        "scenario": {"scenario": "one", "p": 15, "n": 20, "s": 3, "mean_scale": 2.5, "seed": 8},
        "method": "kmeans",
        "cmle": {"k": 3, "s": 3, "seed": 1},
        "output_dir": str(tmp_path / "run"),
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    code = run_cli("report", "--config", cfg_path)
    assert code == 0
    metrics = json.loads((tmp_path / "run" / "metrics.json").read_text())
    assert metrics["k_hat"] == 3
    assert metrics["mean_matrix_error"] is not None


def test_preprocess_subcommand(tmp_path):
    rng = np.random.default_rng(0)
    counts = rng.poisson(30, size=(12, 8))
    src = tmp_path / "counts.csv"
    np.savetxt(src, counts, delimiter=",", fmt="%d")
    out = tmp_path / "expr.csv"
    code = run_cli("preprocess", "--counts", src, "--out", out)
    assert code == 0
    mat = load_matrix_csv(out)
    assert mat.shape[1] == 8
    assert np.abs(mat.mean(axis=1)).max() < 1e-10


def test_transpose_flag(tmp_path):
    vals = np.arange(12.0).reshape(3, 4)
    src = tmp_path / "wide.csv"
    np.savetxt(src, vals.T, delimiter=",", fmt="%.17g")
    assert load_matrix_csv(src, transpose=True).shape == (3, 4)


def test_header_row_detected(tmp_path):
    src = tmp_path / "hdr.csv"
    src.write_text("obs1,obs2,obs3\n1.0,2.0,3.0\n4.0,5.0,6.0\n")
    mat = load_matrix_csv(src)
    assert mat.shape == (2, 3)


def test_missing_data_exits_3(tmp_path):
    code = run_cli("fit", "--data", tmp_path / "nope.csv", "--method", "kmeans",
                   "--k", 2, "--out", tmp_path / "x")
    assert code == 3


def test_bad_config_exits_2(tmp_path):
    code = run_cli("fit", "--method", "cmle", "--out", tmp_path / "x")
    assert code == 2  # cmle without --k / --sparsity


def test_conflicting_sources_exit_2(tmp_path):
    cfg = {"data_path": "x.csv",
           "scenario": {"scenario": "one"},
           "method": "kmeans", "cmle": {"k": 2, "s": 1}}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert run_cli("report", "--config", path) == 2


def test_metrics_accept_non_dense_truth_labels():
    from sparsegmm.core import ClusterEstimate
    from sparsegmm.experiment import compute_metrics

    est = ClusterEstimate(
        k_hat=2, z_hat=np.array([1, 1, 2, 2]), mu_hat=np.zeros((3, 2)),
        support_hat=(), inclusion_freq=None,
    )
    m = compute_metrics(est, np.array([2, 2, 3, 3]), None)  # label 1 unused
    assert m["ari"] == 1.0 and m["d_h"] == 0.0


def test_nan_data_exits_3(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("1.0,2.0\nnan,3.0\n")
    code = run_cli("fit", "--data", src, "--method", "kmeans", "--k", 2,
                   "--out", tmp_path / "y")
    assert code == 3
