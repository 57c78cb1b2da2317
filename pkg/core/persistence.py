"""
Persistence Module

JSON model documents and YAML experiment configurations, both validated
with jsonschema before any object is built.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Union

import numpy as np
import yaml
from jsonschema import Draft7Validator
from loguru import logger

from .angles import TWO_PI
from .distributions.base_distribution import CircularDistribution
from .distributions.ksine import KSineModel, VonMisesBase
from .distributions.nnts import ComplexCoefficients, NntsModel, SymmetricNntsModel
from .estimation import FitOptions
from .exceptions import ConfigError, DomainError, ModelValidationError, NntsError
from .inference import TestKind
from .rng import UINT64_MAX
from .simulation import DEFAULT_ALPHAS, ExperimentSpec, GeneratorSpec, TestConfig

SCHEMA_VERSION = 1

PathLike = Union[str, Path]

_COEFFICIENT = {
    "type": "object",
    "required": ["re", "im"],
    "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
    "additionalProperties": False,
}

_GENERAL_PAYLOAD = {
    "type": "object",
    "required": ["M", "coefficients"],
    "properties": {
        "M": {"type": "integer", "minimum": 0},
        "coefficients": {"type": "array", "minItems": 1, "items": _COEFFICIENT},
    },
    "additionalProperties": False,
}

_SYMMETRIC_PAYLOAD = {
    "type": "object",
    "required": ["M", "rho", "mu"],
    "properties": {
        "M": {"type": "integer", "minimum": 0},
        "rho": {"type": "array", "minItems": 1, "items": {"type": "number"}},
        "mu": {"type": "number", "minimum": 0, "exclusiveMaximum": TWO_PI},
    },
    "additionalProperties": False,
}

_KSINE_PAYLOAD = {
    "type": "object",
    "required": ["mu", "lambda", "k_star", "base"],
    "properties": {
        "mu": {"type": "number", "minimum": 0, "exclusiveMaximum": TWO_PI},
        "lambda": {"type": "number", "minimum": -1, "maximum": 1},
        "k_star": {"type": "integer", "minimum": 1},
        "base": {
            "type": "object",
            "required": ["family", "kappa"],
            "properties": {
                "family": {"const": "von_mises"},
                "kappa": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


def _payload_rule(type_name: str, payload_schema: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "if": {"properties": {"type": {"const": type_name}}},
        "then": {"properties": {"payload": payload_schema}},
    }


MODEL_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["type", "payload"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "type": {"enum": ["nnts_general", "nnts_symmetric", "ksine"]},
        "payload": {"type": "object"},
    },
    "additionalProperties": False,
    "allOf": [
        _payload_rule("nnts_general", _GENERAL_PAYLOAD),
        _payload_rule("nnts_symmetric", _SYMMETRIC_PAYLOAD),
        _payload_rule("ksine", _KSINE_PAYLOAD),
    ],
}

EXPERIMENT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["master_seed", "sample_sizes", "generators", "tests"],
    "properties": {
        "master_seed": {"type": "integer", "minimum": 0, "maximum": UINT64_MAX},
        "n_datasets": {"type": "integer", "minimum": 1},
        "sample_sizes": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "alphas": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        },
        "fit_options": {"type": "object"},
        "generators": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "model": {"type": "object"},
                    "model_file": {"type": "string"},
                    "test_m": {"type": "integer", "minimum": 2},
                },
                "oneOf": [{"required": ["model"]}, {"required": ["model_file"]}],
                "additionalProperties": False,
            },
        },
        "tests": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["kind"],
                "properties": {
                    "kind": {"enum": [kind.value for kind in TestKind]},
                    "m": {"type": "integer", "minimum": 2},
                    "k": {"type": "integer", "minimum": 99},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


def _schema_errors(schema: Dict[str, Any], document: Any) -> List[str]:
    validator = Draft7Validator(schema)
    messages = []
    for error in sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path)):
        location = "/".join(str(part) for part in error.absolute_path) or "<root>"
        messages.append(f"{location}: {error.message}")
    return messages


def model_to_document(model: CircularDistribution) -> Dict[str, Any]:
    """Serialize a model to its JSON document form."""
    if isinstance(model, NntsModel):
        payload = {
            "M": model.m,
            "coefficients": [{"re": float(c.real), "im": float(c.imag)} for c in model.coeffs.values],
        }
    elif isinstance(model, SymmetricNntsModel):
        payload = {"M": model.m, "rho": [float(r) for r in model.rho], "mu": float(model.mu)}
    elif isinstance(model, KSineModel):
        payload = {
            "mu": float(model.mu),
            "lambda": float(model.lam),
            "k_star": int(model.k_star),
            "base": {"family": model.base.family, "kappa": float(model.base.kappa)},
        }
    else:
        raise DomainError(f"Cannot serialize model of type {type(model).__name__}")
    return {"schema_version": SCHEMA_VERSION, "type": model.family, "payload": payload}


def model_from_document(document: Any) -> CircularDistribution:
    """
    Build a model from its document form.

    Raises:
        ModelValidationError: on schema violations or broken model invariants
    """
    errors = _schema_errors(MODEL_SCHEMA, document)
    if errors:
        raise ModelValidationError("Invalid model document: " + "; ".join(errors))

    kind = document["type"]
    payload = document["payload"]
    try:
        if kind == "nnts_general":
            coefficients = payload["coefficients"]
            if len(coefficients) != payload["M"] + 1:
                raise ModelValidationError(
                    f"payload/coefficients: expected M+1={payload['M'] + 1} entries, got {len(coefficients)}"
                )
            values = np.array([complex(c["re"], c["im"]) for c in coefficients])
            return NntsModel(ComplexCoefficients(values))
        if kind == "nnts_symmetric":
            if len(payload["rho"]) != payload["M"] + 1:
                raise ModelValidationError(
                    f"payload/rho: expected M+1={payload['M'] + 1} entries, got {len(payload['rho'])}"
                )
            return SymmetricNntsModel(np.array(payload["rho"], dtype=float), payload["mu"])
        base = VonMisesBase(kappa=float(payload["base"]["kappa"]))
        return KSineModel(mu=payload["mu"], lam=payload["lambda"], k_star=payload["k_star"], base=base)
    except ModelValidationError as exc:
        raise ModelValidationError(f"Invalid {kind} model: {exc}") from exc


def save_model(model: CircularDistribution, path: PathLike):
    """Write a model document as JSON."""
    path = Path(path)
    path.write_text(json.dumps(model_to_document(model), indent=2) + "\n", encoding="utf-8")
    logger.info(f"Model saved to {path}")


def load_model(path: PathLike) -> CircularDistribution:
    """
    Read and validate a model document.

    Raises:
        ModelValidationError: if the file is missing, not JSON, or invalid
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ModelValidationError(f"Cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelValidationError(f"{path} is not valid JSON: {exc}") from exc
    return model_from_document(document)


def _generator_from_entry(entry: Mapping[str, Any], base_dir: Path) -> GeneratorSpec:
    if "model" in entry:
        model = model_from_document(entry["model"])
    else:
        model_path = Path(entry["model_file"])
        if not model_path.is_absolute():
            model_path = base_dir / model_path
        model = load_model(model_path)
    return GeneratorSpec(id=entry["id"], model=model, test_m=entry.get("test_m"))


def experiment_from_document(document: Any, base_dir: PathLike = ".") -> ExperimentSpec:
    """
    Build an ExperimentSpec from a parsed configuration document.

    Args:
        document: Parsed YAML/JSON configuration
        base_dir: Directory that relative model_file paths resolve against

    Raises:
        ConfigError: on schema violations (messages carry field paths)
    """
    errors = _schema_errors(EXPERIMENT_SCHEMA, document)
    if errors:
        raise ConfigError("Invalid experiment config: " + "; ".join(errors))

    base_dir = Path(base_dir)
    try:
        generators = []
        for index, entry in enumerate(document["generators"]):
            try:
                generators.append(_generator_from_entry(entry, base_dir))
            except ModelValidationError as exc:
                raise ConfigError(f"generators/{index}: {exc}") from exc

        tests = tuple(
            TestConfig(kind=TestKind(entry["kind"]), m=entry.get("m"), k_replicates=entry.get("k"))
            for entry in document["tests"]
        )
        return ExperimentSpec(
            generators=tuple(generators),
            sample_sizes=tuple(document["sample_sizes"]),
            tests=tests,
            n_datasets=document.get("n_datasets", 100),
            alphas=tuple(document.get("alphas", DEFAULT_ALPHAS)),
            master_seed=document["master_seed"],
            fit_options=FitOptions.from_mapping(document.get("fit_options")),
        )
    except ConfigError:
        raise
    except (NntsError, TypeError) as exc:
        raise ConfigError(f"Invalid experiment config: {exc}") from exc


def load_experiment_config(path: PathLike) -> ExperimentSpec:
    """Read a YAML (or JSON) experiment configuration."""
    path = Path(path)
    try:
        document = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"Cannot read experiment config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path} is not valid YAML: {exc}") from exc
    logger.debug(f"Loaded experiment config from {path}")
    return experiment_from_document(document, path.parent)
