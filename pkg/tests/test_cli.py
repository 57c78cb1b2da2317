"""
Tests for CLI

Unit tests for the nnts-symmetry commands using click's CliRunner.
"""

import json

import numpy as np
import pandas as pd
import pytest
import yaml
from click.testing import CliRunner
from loguru import logger

from core.analysis import REPORT_COLUMNS, FitTable
from core.angles import TWO_PI
from core.cli import cli
from core.distributions import uniform_model
from core.exporters import CSVExporter
from core.persistence import model_to_document, save_model
from core.rng import RngStream


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    logger.remove()


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def angle_file(tmp_path, symmetric_m2):
    path = tmp_path / "angles.csv"
    CSVExporter().export_samples(symmetric_m2.sample(150, RngStream(12)), str(path))
    return path


def _invoke(runner, *args):
    return runner.invoke(cli, ["--log-level", "ERROR", *[str(a) for a in args]])


def test_fit_writes_report_and_model(runner, angle_file, tmp_path):
    """fit writes the comparison CSV and the best model JSON."""
    report = tmp_path / "report.csv"
    model = tmp_path / "model.json"

    result = _invoke(runner, "fit", "--input", angle_file, "--m-max", 3, "--restarts", 1,
                     "--out-report", report, "--out-model", model)

    assert result.exit_code == 0, result.output
    assert "logL(G)" in result.output
    frame = pd.read_csv(report)
    assert list(frame.columns) == REPORT_COLUMNS
    assert list(frame["M"]) == [0, 1, 2, 3]
    assert frame["best_symmetric"].sum() == 1
    document = json.loads(model.read_text())
    assert document["type"] == "nnts_symmetric"


def test_fit_order_zero_only(runner, angle_file):
    """fit with --m-max 0 reports only the uniform model."""
    result = _invoke(runner, "fit", "--input", angle_file, "--m-max", 0, "--restarts", 1)

    assert result.exit_code == 0, result.output


def test_fit_strict_non_convergence(runner, angle_file, mocker):
    """--strict turns non-convergence into exit code 4."""
    mocker.patch.object(FitTable, "all_converged", new_callable=mocker.PropertyMock, return_value=False)

    result = _invoke(runner, "fit", "--input", angle_file, "--m-max", 1, "--restarts", 1, "--strict")

    assert result.exit_code == 4


def test_fit_rejects_small_bootstrap(runner, angle_file):
    """Fewer than 99 replicates is an argument error."""
    result = _invoke(runner, "fit", "--input", angle_file, "--k", 50)

    assert result.exit_code == 2


def test_missing_input_exits_3(runner, tmp_path):
    """A missing data file exits with code 3."""
    result = _invoke(runner, "fit", "--input", tmp_path / "absent.csv")

    assert result.exit_code == 3


def test_order_one_is_rejected(runner, angle_file):
    """Symmetry tests at M = 1 exit with code 2."""
    result = _invoke(runner, "symmetry-test", "--input", angle_file, "--m", 1)

    assert result.exit_code == 2
    assert "symmetric by definition" in result.output


def test_symmetry_test_json(runner, angle_file, tmp_path):
    """symmetry-test writes one JSON record per method."""
    out = tmp_path / "results.json"

    result = _invoke(runner, "symmetry-test", "--input", angle_file, "--method", "lr-asymptotic",
                     "--m", 2, "--restarts", 1, "--out", out)

    assert result.exit_code == 0, result.output
    (entry,) = json.loads(out.read_text())
    assert entry["test"] == "lr_asymptotic"
    assert entry["df"] == 1
    assert 0.0 <= entry["p_value"] <= 1.0


def test_symmetry_test_is_reproducible(runner, angle_file, tmp_path):
    """The same seed gives the same test output."""
    outputs = []
    for name in ("first.json", "second.json"):
        out = tmp_path / name
        result = _invoke(runner, "symmetry-test", "--input", angle_file, "--method", "b2-bootstrap",
                         "--k", 99, "--seed", 5, "--out", out)
        assert result.exit_code == 0, result.output
        outputs.append(out.read_bytes())

    assert outputs[0] == outputs[1]


def test_simulate_is_reproducible(runner, tmp_path, symmetric_m2):
    """simulate with a fixed seed writes identical draws."""
    model = tmp_path / "model.json"
    save_model(symmetric_m2, model)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"

    for out in (first, second):
        result = _invoke(runner, "simulate", "--model", model, "--n", 40, "--seed", 9, "--out", out)
        assert result.exit_code == 0, result.output

    assert first.read_bytes() == second.read_bytes()
    frame = pd.read_csv(first)
    assert list(frame.columns) == ["theta_rad"]
    assert len(frame) == 40
    assert frame["theta_rad"].between(0.0, TWO_PI).all()


def test_density_curves(runner, tmp_path, cardioid):
    """density tabulates a curve that integrates to one on the grid."""
    for name, model in (("uniform", uniform_model()), ("cardioid", cardioid)):
        path = tmp_path / f"{name}.json"
        save_model(model, path)
        out = tmp_path / f"{name}.csv"

        result = _invoke(runner, "density", "--model", path, "--grid", 256, "--out", out)

        assert result.exit_code == 0, result.output
        frame = pd.read_csv(out)
        assert list(frame.columns) == ["theta", "density"]
        assert frame["density"].sum() * TWO_PI / 256 == pytest.approx(1.0, abs=1e-12)
        if name == "uniform":
            np.testing.assert_allclose(frame["density"], 1.0 / TWO_PI)


def test_density_grid_minimum(runner, tmp_path):
    """Grids below the minimum size are rejected."""
    path = tmp_path / "uniform.json"
    save_model(uniform_model(), path)

    result = _invoke(runner, "density", "--model", path, "--grid", 4, "--out", tmp_path / "d.csv")

    assert result.exit_code == 2


def _write_config(tmp_path, generators):
    document = {
        "master_seed": 21,
        "n_datasets": 2,
        "sample_sizes": [40],
        "fit_options": {"n_restarts": 1, "max_iters": 300, "mu_grid_points": 64},
        "generators": generators,
        "tests": [{"kind": "lr_asymptotic"}, {"kind": "b2_bootstrap", "k": 99}],
    }
    path = tmp_path / "experiment.yaml"
    path.write_text(yaml.safe_dump(document), encoding="utf-8")
    return path


def test_experiment_outputs(runner, tmp_path, symmetric_m2):
    """experiment writes the rates CSV and the audit bundle."""
    config = _write_config(tmp_path, [{"id": "sym", "model": model_to_document(symmetric_m2)}])
    out_dir = tmp_path / "results"

    result = _invoke(runner, "experiment", "--config", config, "--out-dir", out_dir)

    assert result.exit_code == 0, result.output
    rates = pd.read_csv(out_dir / "rejection_rates.csv")
    assert len(rates) == 2 * 3
    audit = json.loads((out_dir / "audit.json").read_text())
    assert audit["master_seed"] == 21
    assert all(len(cell["p_values"]) == 2 for cell in audit["cells"])


def test_experiment_config_errors_exit_3(runner, tmp_path):
    """Invalid experiment configs exit with code 3."""
    config = _write_config(tmp_path, [])

    result = _invoke(runner, "experiment", "--config", config, "--out-dir", tmp_path / "out")

    assert result.exit_code == 3
