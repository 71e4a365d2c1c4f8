import json
import sys
from pathlib import Path

import pytest

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

import app
from report_storage import CONVERGENCE_FILE, DIMENSION_FILE, INCLUSION_FILE, SUMMARY_FILE, VERIFY_FILE


@pytest.fixture(autouse=True)
def _isolated_config(tmp_path, monkeypatch):
    monkeypatch.setattr(app, "BVS_CONFIG_PATH", tmp_path / "missing-config.json")
    monkeypatch.setattr(app, "BVS_SEED", None)


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


def _simulated_csv(tmp_path, capsys, n=8, p=6):
    path = tmp_path / "data.csv"
    code = app.main(["simulate", "--n", str(n), "--p", str(p), "--seed", "3", "--out", str(path), "--quiet"])
    assert code == 0
    assert _stdout_json(capsys)["outputs"] == [str(path)]
    return path


def test_exact_analysis_writes_reports(tmp_path, capsys):
    data = _simulated_csv(tmp_path, capsys)
    out = tmp_path / "exact"
    code = app.main(["analyze", str(data), "--exact", "--out-dir", str(out), "--quiet"])
    assert code == 0
    payload = _stdout_json(capsys)
    assert 0.0 <= payload["p_singular"] <= 1.0
    for name in (SUMMARY_FILE, INCLUSION_FILE, DIMENSION_FILE, "models.csv"):
        assert (out / name).exists()
    summary = json.loads((out / SUMMARY_FILE).read_text())
    assert summary["method"] == "exact"
    assert summary["column_names"] == [f"x{j}" for j in range(1, 7)]


def test_enumerate_subcommand_matches_exact_flag(tmp_path, capsys):
    data = _simulated_csv(tmp_path, capsys)
    app.main(["analyze", str(data), "--exact", "--out-dir", str(tmp_path / "a"), "--quiet"])
    capsys.readouterr()
    app.main(["enumerate", str(data), "--out-dir", str(tmp_path / "b"), "--quiet"])
    capsys.readouterr()
    assert (tmp_path / "a" / SUMMARY_FILE).read_text() == (tmp_path / "b" / SUMMARY_FILE).read_text()


def test_sampled_analysis(tmp_path, capsys):
    data = _simulated_csv(tmp_path, capsys, n=10, p=14)
    out = tmp_path / "gibbs"
    code = app.main(
        ["analyze", str(data), "--iterations", "400", "--seed", "5", "--trace", "--out-dir", str(out), "--quiet"]
    )
    assert code == 0
    capsys.readouterr()
    convergence = json.loads((out / CONVERGENCE_FILE).read_text())
    assert "max_discrepancy" in convergence
    assert convergence["c_estimate"]["a_size"] >= 1
    assert (out / "trace-0.csv").exists() and (out / "trace-1.csv").exists()
    summary = json.loads((out / SUMMARY_FILE).read_text())
    assert summary["chain_config"] == {"iterations": 400, "burnin": 40, "chains": 2, "seed": 5, "start": "null"}


def test_missing_file_reports_io_error(tmp_path, capsys):
    code = app.main(["analyze", str(tmp_path / "nope.csv"), "--quiet"])
    assert code == 3
    error = _stdout_json(capsys)["error"]
    assert error["module"] == "core_model_space"
    assert error["code"] == "dataset_io"


def test_bad_prior_spec(tmp_path, capsys):
    data = _simulated_csv(tmp_path, capsys)
    code = app.main(["analyze", str(data), "--exact", "--prior", "lasso", "--quiet"])
    assert code == 2
    assert _stdout_json(capsys)["error"]["module"] == "priors_bayes_factors"


def test_enumeration_refused_for_large_p(tmp_path, capsys):
    data = _simulated_csv(tmp_path, capsys, n=8, p=24)
    code = app.main(["enumerate", str(data), "--p-max", "20", "--out-dir", str(tmp_path / "o"), "--quiet"])
    assert code == 2
    assert "error" in _stdout_json(capsys)


def test_verify_passes_and_sabotage_fails(tmp_path, capsys):
    out = tmp_path / "verify"
    assert app.main(["verify", "--sizes", "3,4", "--out-dir", str(out), "--quiet"]) == 0
    assert _stdout_json(capsys)["passed"] is True
    assert json.loads((out / VERIFY_FILE).read_text())["passed"] is True

    assert app.main(["verify", "--sizes", "3", "--sabotage", "--out-dir", str(out), "--quiet"]) == app.VERIFY_FAILED_EXIT
    assert _stdout_json(capsys)["passed"] is False


def test_load_analysis_config_overrides_and_fallback(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"iterations": 123, "prior": "uniform", "unknown": 1}))
    config = app.load_analysis_config(good)
    assert config["iterations"] == 123
    assert config["prior"] == "uniform"
    assert config["chains"] == app.BUILTIN_DEFAULTS["chains"]
    assert "unknown" not in config

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert app.load_analysis_config(broken) == app.BUILTIN_DEFAULTS
    assert "[config] failed to load config" in capsys.readouterr().err


def test_seed_precedence(monkeypatch):
    config = dict(app.BUILTIN_DEFAULTS, seed=4)
    assert app.resolve_seed(None, config) == 4
    monkeypatch.setattr(app, "BVS_SEED", "9")
    assert app.resolve_seed(None, config) == 9
    assert app.resolve_seed(2, config) == 2


def test_experiment_subcommand(tmp_path, capsys):
    out = tmp_path / "exp"
    code = app.main(
        [
            "experiment",
            "--n-values",
            "14,10",
            "--p",
            "10",
            "--noise-scale",
            "0.1",
            "--iterations",
            "800",
            "--seed",
            "2",
            "--out-dir",
            str(out),
            "--quiet",
        ]
    )
    assert code == 0
    assert len(_stdout_json(capsys)["outputs"]) == 2
    rows = (out / "experiment.csv").read_text().splitlines()
    assert rows[0].split(",")[:3] == ["n", "prior", "p_singular"]
    assert [r.split(",")[0] for r in rows[1:]] == ["14", "10"]
    payload = json.loads((out / "experiment.json").read_text())
    assert payload["spec"]["n"] == 14


def test_simulate_is_byte_identical_for_a_seed(tmp_path, capsys):
    first = _simulated_csv(tmp_path, capsys).read_bytes()
    assert _simulated_csv(tmp_path, capsys).read_bytes() == first


def test_desk_scale_run_emits_all_reports(tmp_path, capsys):
    data = _simulated_csv(tmp_path, capsys, n=41, p=300)
    out = tmp_path / "desk"
    args = ["analyze", str(data), "--mixing", "g-prior:n", "--iterations", "200", "--seed", "1", "--out-dir", str(out), "--quiet"]
    assert app.main(args) == 0
    capsys.readouterr()
    for name in (SUMMARY_FILE, INCLUSION_FILE, DIMENSION_FILE, CONVERGENCE_FILE):
        assert (out / name).exists()
    first = (out / SUMMARY_FILE).read_bytes()
    assert app.main(args) == 0
    assert (out / SUMMARY_FILE).read_bytes() == first
    summary = json.loads(first)
    assert len(summary["q"]) == 300
    assert len(summary["dim_posterior"]) == 301
