"""
Tests for Persistence

Unit tests for model documents and experiment configuration loading.
"""

import json
from pathlib import Path

import pytest
import yaml

from core.distributions import KSineModel, NntsModel, SymmetricNntsModel, VonMisesBase, random_nnts_model
from core.exceptions import ConfigError, ModelValidationError
from core.inference import TestKind
from core.persistence import (experiment_from_document, load_experiment_config, load_model,
                              model_from_document, model_to_document, save_model)
from core.rng import RngStream
from tools.generate_experiment_config import build_config

EXAMPLE_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "experiment_example.yaml"


def _document(kind, payload):
    return {"schema_version": 1, "type": kind, "payload": payload}


def test_general_model_file(tmp_path):
    """A general model survives a save and load."""
    model = random_nnts_model(5, RngStream(8).generator())
    path = tmp_path / "model.json"

    save_model(model, path)
    loaded = load_model(path)

    assert isinstance(loaded, NntsModel)
    assert loaded.m == 5
    assert loaded == model


def test_symmetric_and_ksine_documents(symmetric_m2):
    """Symmetric and k-sine documents load back to equal models."""
    ksine = KSineModel(mu=1.0, lam=-0.3, k_star=2, base=VonMisesBase(kappa=2.5))

    assert model_from_document(model_to_document(symmetric_m2)) == symmetric_m2
    assert model_from_document(model_to_document(ksine)) == ksine


def test_document_layout(cardioid):
    """Model documents hold a schema version, a type and a payload."""
    document = model_to_document(cardioid)

    assert document["schema_version"] == 1
    assert document["type"] == "nnts_general"
    assert document["payload"]["M"] == 1
    assert set(document["payload"]["coefficients"][0]) == {"re", "im"}
    json.dumps(document)


def test_non_unit_norm_rejected():
    """Documents with non-unit-norm coefficients are rejected."""
    payload = {"M": 1, "coefficients": [{"re": 0.6, "im": 0.0}, {"re": 0.6, "im": 0.0}]}

    with pytest.raises(ModelValidationError, match="unit-norm"):
        model_from_document(_document("nnts_general", payload))


def test_coefficient_count_must_match_order():
    """The coefficient count must be M + 1."""
    payload = {"M": 2, "coefficients": [{"re": 1.0, "im": 0.0}]}

    with pytest.raises(ModelValidationError, match="M\\+1"):
        model_from_document(_document("nnts_general", payload))


def test_symmetric_axis_out_of_range():
    """A symmetric axis outside [0, 2*pi) is rejected."""
    payload = {"M": 1, "rho": [0.6, 0.8], "mu": 7.0}

    with pytest.raises(ModelValidationError, match="payload/mu"):
        model_from_document(_document("nnts_symmetric", payload))


def test_unknown_type_and_extra_fields():
    """Unknown types and extra fields fail validation."""
    with pytest.raises(ModelValidationError):
        model_from_document(_document("wrapped_cauchy", {}))
    with pytest.raises(ModelValidationError):
        model_from_document({**model_to_document(NntsModel.from_values([1.0])), "extra": 1})


def test_ksine_lambda_range():
    """k-sine lambda must lie in [-1, 1]."""
    payload = {"mu": 0.0, "lambda": 1.5, "k_star": 2, "base": {"family": "von_mises", "kappa": 1.0}}

    with pytest.raises(ModelValidationError):
        model_from_document(_document("ksine", payload))


def test_load_model_errors(tmp_path):
    """Missing and malformed files raise ModelValidationError."""
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")

    with pytest.raises(ModelValidationError, match="not valid JSON"):
        load_model(broken)
    with pytest.raises(ModelValidationError, match="Cannot read"):
        load_model(tmp_path / "missing.json")


def test_example_config_loads():
    """The shipped example config loads."""
    spec = load_experiment_config(EXAMPLE_CONFIG)

    assert spec.master_seed == 12345
    assert spec.n_datasets == 100
    assert [g.id for g in spec.generators] == ["symmetric_m2", "skewed_m3", "ksine_k3"]
    assert spec.generators[2].test_m == 3
    assert isinstance(spec.generators[0].model, SymmetricNntsModel)
    assert spec.tests[0].kind is TestKind.LR_ASYMPTOTIC
    assert spec.tests[1].k_replicates == 199
    assert spec.fit_options.n_restarts == 2


def _minimal_config(**overrides):
    document = {
        "master_seed": 1,
        "sample_sizes": [50],
        "generators": [{"id": "u", "model": model_to_document(NntsModel.from_values([0.8, 0.6]))}],
        "tests": [{"kind": "b2_bootstrap", "k": 99}],
    }
    document.update(overrides)
    return document


def test_minimal_config_defaults():
    """A minimal config fills in defaults."""
    spec = experiment_from_document(_minimal_config())

    assert spec.n_datasets == 100
    assert spec.alphas == (0.10, 0.05, 0.01)


def test_empty_generators_rejected():
    """A config needs at least one generator."""
    with pytest.raises(ConfigError, match="generators"):
        experiment_from_document(_minimal_config(generators=[]))


def test_config_errors_carry_paths():
    """Config errors name the offending field."""
    with pytest.raises(ConfigError, match="tests/0/k"):
        experiment_from_document(_minimal_config(tests=[{"kind": "b2_bootstrap", "k": 10}]))
    with pytest.raises(ConfigError, match="generators/0"):
        experiment_from_document(_minimal_config(generators=[{"id": "x"}]))


def test_model_file_relative_to_config(tmp_path, symmetric_m2):
    """Model files resolve relative to the config file."""
    save_model(symmetric_m2, tmp_path / "sym.json")
    config = tmp_path / "experiment.yaml"
    config.write_text(
        "master_seed: 5\n"
        "sample_sizes: [40]\n"
        "generators:\n"
        "  - id: sym\n"
        "    model_file: sym.json\n"
        "tests:\n"
        "  - kind: lr_asymptotic\n",
        encoding="utf-8",
    )

    spec = load_experiment_config(config)

    assert spec.generators[0].model == symmetric_m2


def test_invalid_model_inside_config():
    """An invalid inline model fails the config."""
    bad = _document("nnts_symmetric", {"M": 1, "rho": [0.5, 0.5], "mu": 0.0})

    with pytest.raises(ConfigError, match="generators/0"):
        experiment_from_document(_minimal_config(generators=[{"id": "bad", "model": bad}]))


def test_generated_default_grid_is_valid():
    """The generated default config passes validation."""
    document = yaml.safe_load(yaml.safe_dump(build_config(seed=7, n_datasets=10, k_replicates=99), sort_keys=False))
    spec = experiment_from_document(document)

    assert len(spec.generators) == 15
    assert spec.sample_sizes == (20, 50, 100, 200, 500, 1000)
    assert all(g.symmetric for g in spec.generators if g.id.endswith("_symmetric"))
    assert spec.generators[0].test_m == 2
