"""
CSV Exporter Module

Writes fit reports, samples, density curves and rejection-rate tables as CSV.
"""

from typing import Optional

import numpy as np
import pandas as pd
from loguru import logger

from ..analysis import REPORT_COLUMNS, FitTable
from ..angles import TWO_PI, AngleSample
from ..distributions.base_distribution import CircularDistribution
from ..exceptions import DomainError
from ..simulation import RejectionTable

MIN_GRID = 8


class CSVExporter:
    """
    Exports analysis results to CSV.

    Every export returns the CSV text and optionally writes it to a file.
    Floats use the shortest repr that round-trips, so output does not
    depend on locale or platform.
    """

    def _emit(self, df: pd.DataFrame, output_file: Optional[str], what: str) -> str:
        csv_content = df.to_csv(index=False, lineterminator="\n")
        if output_file:
            with open(output_file, "w", encoding="utf-8", newline="") as handle:
                handle.write(csv_content)
            logger.info(f"{what} exported to {output_file}")
        return csv_content

    def export_fit_table(self, table: FitTable, output_file: Optional[str] = None) -> str:
        """
        Export the per-order fit report.

        Args:
            table: Fit table from SymmetryAnalysis.fit_table
            output_file: Optional output file path

        Returns:
            CSV content as string
        """
        df = pd.DataFrame(table.records(), columns=REPORT_COLUMNS)
        return self._emit(df, output_file, "Fit report")

    def export_samples(self, sample: AngleSample, output_file: Optional[str] = None) -> str:
        """Export one angle per row under the header theta_rad."""
        df = pd.DataFrame({"theta_rad": sample.angles})
        return self._emit(df, output_file, f"{sample.n} angles")

    def export_density_curve(self, model: CircularDistribution, grid: int = 512,
                             output_file: Optional[str] = None) -> str:
        """
        Export the density on a uniform grid over [0, 2*pi).

        Args:
            model: Any circular distribution
            grid: Number of grid points, at least 8
            output_file: Optional output file path

        Returns:
            CSV content with columns theta, density
        """
        if grid < MIN_GRID:
            raise DomainError(f"Density grid needs at least {MIN_GRID} points, got {grid}")
        theta = np.arange(grid) * (TWO_PI / grid)
        df = pd.DataFrame({"theta": theta, "density": model.density(theta)})
        return self._emit(df, output_file, "Density curve")

    def export_rejection_table(self, table: RejectionTable, output_file: Optional[str] = None) -> str:
        """Export experiment rejection rates, one row per (generator, test, n, alpha)."""
        return self._emit(table.to_frame(), output_file, "Rejection rates")
