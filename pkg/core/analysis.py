"""
Analysis Module

Orchestrates the workflow applied to a real dataset: fit general and
symmetric NNTS models over a range of orders, pick M by an information
criterion and run the symmetry tests at that order.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from loguru import logger

from .angles import AngleSample
from .estimation import FitOptions, FitReport, fit_general, fit_symmetric, mark_best
from .exceptions import DomainError, NntsError, OptimizerInconsistencyError
from .inference import (TestKind, TestResult, b2_test_bootstrap, check_order, chisq_sf,
                        lr_statistic, lr_test_asymptotic, lr_test_bootstrap, sk_from_fits,
                        wald_test)

FAMILIES = ("general", "symmetric", "both")

METHOD_ALIASES = {
    "lr-asymptotic": TestKind.LR_ASYMPTOTIC,
    "lr-bootstrap": TestKind.LR_BOOTSTRAP,
    "wald": TestKind.WALD,
    "b2-bootstrap": TestKind.B2_BOOTSTRAP,
}


@dataclass(frozen=True)
class FitTableRow:
    """One row of the fit report: both families at one order."""

    m: int
    n: int
    loglik_general: Optional[float] = None
    aic_general: Optional[float] = None
    bic_general: Optional[float] = None
    loglik_symmetric: Optional[float] = None
    aic_symmetric: Optional[float] = None
    bic_symmetric: Optional[float] = None
    mu_hat: Optional[float] = None
    lr_gs: Optional[float] = None
    chi2_p: Optional[float] = None
    blr_p: Optional[float] = None
    sk_nnts: Optional[float] = None
    best_general: bool = False
    best_symmetric: bool = False


REPORT_COLUMNS = [
    "n", "M", "loglik_general", "aic_general", "bic_general",
    "loglik_symmetric", "aic_symmetric", "bic_symmetric",
    "mu_hat", "lr_gs", "chi2_p", "blr_p", "sk_nnts", "best_general", "best_symmetric",
]


@dataclass
class FitTable:
    """Fits over M = 0..m_max with the derived comparison columns."""

    rows: List[FitTableRow]
    general: List[Optional[FitReport]]
    symmetric: List[Optional[FitReport]]
    family: str
    criterion: str
    notes: List[str] = field(default_factory=list)

    def _best(self, reports: List[Optional[FitReport]]) -> Optional[FitReport]:
        for report in reports:
            if report is not None and report.is_best:
                return report
        return None

    @property
    def best_general(self) -> Optional[FitReport]:
        return self._best(self.general)

    @property
    def best_symmetric(self) -> Optional[FitReport]:
        return self._best(self.symmetric)

    def selected_m(self) -> int:
        """Best order of the symmetric family (general family when only that was fitted)."""
        best = self.best_general if self.family == "general" else self.best_symmetric
        if best is None:
            raise NntsError("No successful fit to select an order from")
        return best.m

    def report_for(self, m: int) -> Optional[FitReport]:
        reports = self.general if self.family == "general" else self.symmetric
        return reports[m] if 0 <= m < len(reports) else None

    @property
    def all_converged(self) -> bool:
        reports = [r for r in self.general + self.symmetric if r is not None]
        return all(r.converged for r in reports)

    def with_bootstrap_p(self, m: int, p_value: float) -> "FitTable":
        rows = [replace(row, blr_p=p_value) if row.m == m else row for row in self.rows]
        return FitTable(rows, self.general, self.symmetric, self.family, self.criterion, list(self.notes))

    def records(self) -> List[Dict[str, object]]:
        """Rows as ordered dicts using the report column names."""
        records = []
        for row in self.rows:
            values = {name: getattr(row, name) for name in FitTableRow.__dataclass_fields__}
            values["M"] = values.pop("m")
            records.append({column: values[column] for column in REPORT_COLUMNS})
        return records


class SymmetryAnalysis:
    """
    Fits and tests for one dataset.

    Fits are cached per order, so building a table and then running tests at
    the selected order reuses the same optimisation results.
    """

    def __init__(self, data: AngleSample, options: Optional[FitOptions] = None,
                 max_workers: Optional[int] = None):
        """
        Initialize the analysis.

        Args:
            data: Angle sample
            options: Optimizer settings shared by every fit
            max_workers: Worker threads for bootstrap tests
        """
        self.data = data
        self.options = options or FitOptions()
        self.max_workers = max_workers
        self._general: Dict[int, FitReport] = {}
        self._symmetric: Dict[int, FitReport] = {}

    def general_fit(self, m: int) -> FitReport:
        """General fit at order m, warm-started from order m-1."""
        if m not in self._general:
            initial = None
            if m > 0:
                previous = self.general_fit(m - 1)
                initial = previous.model.coeffs.values if previous.ok else None
            self._general[m] = fit_general(self.data, m, self.options, initial=initial)
        return self._general[m]

    def symmetric_fit(self, m: int) -> FitReport:
        if m not in self._symmetric:
            self._symmetric[m] = fit_symmetric(self.data, m, self.options, general=self.general_fit(m))
            self._reconcile(m)
        return self._symmetric[m]

    def _reconcile(self, m: int):
        general, symmetric = self._general[m], self._symmetric[m]
        if symmetric.loglik > general.loglik:
            logger.debug(f"Refitting general M={m} from the symmetric optimum")
            warm = fit_general(self.data, m, self.options,
                               initial=symmetric.model.to_general().coeffs.values)
            if warm.loglik > general.loglik:
                self._general[m] = warm

    def fit_pair(self, m: int) -> Tuple[FitReport, FitReport]:
        symmetric = self.symmetric_fit(m)
        return self._general[m], symmetric

    def fit_table(self, m_max: int, family: str = "both", criterion: str = "bic") -> FitTable:
        """
        Fit M = 0..m_max and assemble the comparison table.

        Args:
            m_max: Largest order
            family: 'general', 'symmetric' or 'both'
            criterion: 'aic' or 'bic'

        Returns:
            FitTable with one row per order
        """
        if family not in FAMILIES:
            raise DomainError(f"Unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
        if m_max < 0:
            raise DomainError(f"m_max must be nonnegative, got {m_max}")

        logger.info(f"Fitting {family} NNTS models for M = 0..{m_max} on n={self.data.n}")
        general: List[Optional[FitReport]] = []
        symmetric: List[Optional[FitReport]] = []
        for m in range(m_max + 1):
            try:
                if family == "general":
                    general.append(self.general_fit(m))
                    symmetric.append(None)
                else:
                    symmetric_report = self.symmetric_fit(m)
                    general.append(self._general[m] if family == "both" else None)
                    symmetric.append(symmetric_report)
            except NntsError as exc:
                logger.warning(f"Fit at M={m} failed: {exc}")
                general.append(FitReport.failed("general", m, self.data, str(exc)) if family != "symmetric" else None)
                symmetric.append(FitReport.failed("symmetric", m, self.data, str(exc)) if family != "general" else None)

        if family != "symmetric":
            general = mark_best(general, criterion)
        if family != "general":
            symmetric = mark_best(symmetric, criterion)

        notes: List[str] = []
        rows = [self._row(m, general[m], symmetric[m], notes) for m in range(m_max + 1)]
        for report in general + symmetric:
            if report is not None and report.ok and not report.converged:
                logger.warning(f"{report.family.capitalize()} fit at M={report.m} did not converge")
        return FitTable(rows, general, symmetric, family, criterion, notes)

    def _row(self, m: int, general: Optional[FitReport], symmetric: Optional[FitReport],
             notes: List[str]) -> FitTableRow:
        values = {"m": m, "n": self.data.n}
        if general is not None:
            values.update(loglik_general=general.loglik, aic_general=general.aic,
                          bic_general=general.bic, best_general=general.is_best)
        if symmetric is not None:
            values.update(loglik_symmetric=symmetric.loglik, aic_symmetric=symmetric.aic,
                          bic_symmetric=symmetric.bic, best_symmetric=symmetric.is_best,
                          mu_hat=symmetric.mu_hat)
        if general is not None and symmetric is not None and general.ok and symmetric.ok and m >= 2:
            try:
                lr = lr_statistic(general, symmetric)
                values.update(lr_gs=lr, chi2_p=chisq_sf(lr, m - 1),
                              sk_nnts=sk_from_fits(general, symmetric))
            except OptimizerInconsistencyError as exc:
                logger.warning(str(exc))
                notes.append(f"M={m}: {exc}")
        return FitTableRow(**values)

    def select_m(self, m_max: int, criterion: str = "bic") -> int:
        """Order of the best symmetric model by the given criterion."""
        return self.fit_table(m_max, family="symmetric", criterion=criterion).selected_m()

    def run_tests(self, m: Optional[int], methods: Sequence[str], k: int = 999,
                  seed: int = 0) -> List[TestResult]:
        """
        Run the requested tests at order m.

        Args:
            m: NNTS order (not needed for b2-bootstrap alone)
            methods: Method names ('lr-asymptotic', 'lr-bootstrap', 'wald', 'b2-bootstrap')
            k: Bootstrap replicates
            seed: Master seed for the bootstrap tests

        Returns:
            One TestResult per method, in the order given
        """
        results: List[TestResult] = []
        for method in methods:
            kind = METHOD_ALIASES.get(method)
            if kind is None:
                raise DomainError(f"Unknown test method {method!r}")
            if kind is TestKind.B2_BOOTSTRAP:
                result = b2_test_bootstrap(self.data, k, seed, self.max_workers)
            elif kind is TestKind.LR_ASYMPTOTIC:
                result = lr_test_asymptotic(self.data, m, self.options, fits=self._pair_for(m))
            elif kind is TestKind.LR_BOOTSTRAP:
                result = lr_test_bootstrap(self.data, m, k, seed, self.options,
                                           fits=self._pair_for(m), max_workers=self.max_workers)
            else:
                result = wald_test(self.data, m, self.options, fits=self._pair_for(m))
            logger.info(f"{result.test.value}: statistic={result.statistic:.6g} p={result.p_value:.6g}")
            results.append(result)
        return results

    def _pair_for(self, m: Optional[int]) -> Tuple[FitReport, FitReport]:
        if m is None:
            raise DomainError("An NNTS order is required for likelihood-based tests")
        check_order(m)
        return self.fit_pair(m)

