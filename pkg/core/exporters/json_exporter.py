"""
JSON Exporter Module

Writes symmetry-test results and experiment audit bundles as JSON.
"""

import json
from typing import Any, Dict, Optional, Sequence

from loguru import logger

from ..estimation import fit_options_summary
from ..inference import TestResult
from ..persistence import model_to_document
from ..simulation import ExperimentSpec, RejectionTable


class JSONExporter:
    """Exports results as indented JSON with a trailing newline."""

    def _emit(self, document: Any, output_file: Optional[str], what: str) -> str:
        content = json.dumps(document, indent=2) + "\n"
        if output_file:
            with open(output_file, "w", encoding="utf-8") as handle:
                handle.write(content)
            logger.info(f"{what} exported to {output_file}")
        return content

    def export_test_results(self, results: Sequence[TestResult], output_file: Optional[str] = None) -> str:
        """
        Export a JSON array of test results.

        Args:
            results: Test results
            output_file: Optional output file path

        Returns:
            JSON content as string
        """
        return self._emit([result.to_dict() for result in results], output_file, "Test results")

    def export_audit_bundle(self, spec: ExperimentSpec, table: RejectionTable,
                            output_file: Optional[str] = None) -> str:
        """
        Export everything needed to audit an experiment: the generators as
        model documents, the settings, failure counts and every p-value.
        """
        document: Dict[str, Any] = {
            "master_seed": spec.master_seed,
            "n_datasets": spec.n_datasets,
            "sample_sizes": list(spec.sample_sizes),
            "alphas": list(spec.alphas),
            "fit_options": fit_options_summary(spec.fit_options),
            "generators": [
                {"id": g.id, "test_m": g.test_m, "symmetric": g.symmetric, "model": model_to_document(g.model)}
                for g in spec.generators
            ],
            "tests": [
                {"kind": t.kind.value, "label": t.label, "m": t.m, "k": t.k_replicates}
                for t in spec.tests
            ],
            "failures": dict(table.failures),
            "cells": [
                {
                    "generator_id": row.generator_id,
                    "test": row.test,
                    "n": row.n,
                    "alpha": row.alpha,
                    "count": row.count,
                    "rate": row.rate,
                    "p_values": list(row.p_values),
                }
                for row in table.rows
            ],
        }
        return self._emit(document, output_file, "Audit bundle")
