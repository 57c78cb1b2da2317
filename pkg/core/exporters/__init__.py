"""
Exporters Module

Provides CSV and JSON writers for reports, samples and experiment results.
"""

from .csv_exporter import CSVExporter
from .json_exporter import JSONExporter

__all__ = ["CSVExporter", "JSONExporter"]
