"""
Estimation Module

Maximum-likelihood fitting of general NNTS models on the complex unit sphere
and of symmetric NNTS models on the real unit sphere, plus AIC/BIC scans
over the truncation order M.
"""

from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy.optimize import minimize_scalar

from .angles import TWO_PI, AngleSample, reduce_angles
from .distributions.base_distribution import DENSITY_FLOOR
from .distributions.nnts import (ComplexCoefficients, NntsModel, SymmetricNntsModel,
                                 minimum_phase, uniform_model)
from .exceptions import DomainError, NntsError
from .rng import UINT64_MAX, RngStream

MAX_HALVINGS = 30

# Grid columns evaluated at once while profiling mu.
PROFILE_CHUNK = 64

NntsFit = Union[NntsModel, SymmetricNntsModel]


@dataclass(frozen=True)
class FitOptions:
    """Optimizer settings shared by every fit."""

    max_iters: int = 2000
    grad_tol: float = 1e-8
    loglik_tol: float = 1e-10
    mu_grid_points: int = 512
    n_restarts: int = 3
    seed: int = 0
    mu_tol: float = 1e-8
    max_cycles: int = 200
    init_epsilon: float = 0.01

    def __post_init__(self):
        for name in ("grad_tol", "loglik_tol", "mu_tol", "init_epsilon"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("max_iters", "n_restarts", "max_cycles"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.mu_grid_points < 8:
            raise DomainError(f"mu_grid_points must be at least 8, got {self.mu_grid_points}")
        if not 0 <= self.seed <= UINT64_MAX:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @classmethod
    def from_mapping(cls, values: Optional[Mapping[str, Any]]) -> "FitOptions":
        """Build options from a config mapping, rejecting unknown keys."""
        values = dict(values or {})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise DomainError(f"Unknown fit option(s): {', '.join(unknown)}")
        return cls(**values)


def count_parameters(family: str, m: int) -> int:
    """Free parameters: 2M for general fits, M+1 for symmetric fits (0 at M=0)."""
    if m == 0:
        return 0
    return 2 * m if family == "general" else m + 1


def information_criteria(loglik: float, n_params: int, n: int) -> Tuple[float, float]:
    """Return (AIC, BIC)."""
    return -2.0 * loglik + 2.0 * n_params, -2.0 * loglik + np.log(n) * n_params


@dataclass(frozen=True)
class FitReport:
    """Outcome of one maximum-likelihood fit."""

    family: str
    m: int
    n: int
    model: Optional[NntsFit]
    loglik: float
    n_params: int
    aic: float
    bic: float
    iterations: int
    grad_norm: float
    converged: bool
    data_digest: str = ""
    loglik_trace: Tuple[float, ...] = field(default=(), repr=False)
    is_best: bool = False
    error: Optional[str] = None

    @classmethod
    def build(cls, family: str, data: AngleSample, model: NntsFit, iterations: int,
              grad_norm: float, converged: bool, trace: Sequence[float] = ()) -> "FitReport":
        loglik = model.log_likelihood(data)
        n_params = count_parameters(family, model.m)
        aic, bic = information_criteria(loglik, n_params, data.n)
        return cls(family=family, m=model.m, n=data.n, model=model, loglik=loglik,
                   n_params=n_params, aic=aic, bic=bic, iterations=iterations,
                   grad_norm=grad_norm, converged=converged, data_digest=data.digest,
                   loglik_trace=tuple(trace))

    @classmethod
    def failed(cls, family: str, m: int, data: AngleSample, error: str) -> "FitReport":
        """Placeholder entry for a fit that raised."""
        return cls(family=family, m=m, n=data.n, model=None, loglik=-np.inf,
                   n_params=count_parameters(family, m), aic=np.inf, bic=np.inf,
                   iterations=0, grad_norm=np.inf, converged=False,
                   data_digest=data.digest, error=error)

    @property
    def ok(self) -> bool:
        return self.model is not None

    @property
    def mu_hat(self) -> Optional[float]:
        return self.model.mu if isinstance(self.model, SymmetricNntsModel) else None

    def criterion(self, name: str) -> float:
        if name not in ("aic", "bic"):
            raise DomainError(f"Unknown criterion {name!r}; expected 'aic' or 'bic'")
        return self.aic if name == "aic" else self.bic


class _Ascent(NamedTuple):
    coeffs: np.ndarray
    loglik: float
    iterations: int
    grad_norm: float
    converged: bool
    trace: List[float]


def harmonic_design(theta: np.ndarray, m: int) -> np.ndarray:
    """Matrix E[j, k] = exp(i*k*theta_j), k = 0..M."""
    return np.exp(1j * np.outer(theta, np.arange(m + 1)))


def _loglik(design: np.ndarray, c: np.ndarray) -> Tuple[float, np.ndarray]:
    amp = design @ c
    dens = (amp.real ** 2 + amp.imag ** 2) / TWO_PI
    if np.any(dens < DENSITY_FLOOR):
        return -np.inf, amp
    return float(np.sum(np.log(dens))), amp


def _score(design: np.ndarray, amp: np.ndarray, real: bool) -> np.ndarray:
    """Per-observation score g = (1/n) * sum_j conj(E_j) / conj(a_j)."""
    g = np.conj(design.T @ (1.0 / amp)) / design.shape[0]
    return g.real if real else g


def _geodesic(start: np.ndarray, target: np.ndarray, t: float) -> np.ndarray:
    """Point at fraction t of the great circle from start to target (both unit)."""
    cos_w = float(np.clip(np.real(np.vdot(start, target)), -1.0, 1.0))
    w = np.arccos(cos_w)
    if w < 1e-12:
        point = start + t * (target - start)
    else:
        point = (np.sin((1.0 - t) * w) * start + np.sin(t * w) * target) / np.sin(w)
    return point / np.linalg.norm(point)


def _gauge(c: np.ndarray, real: bool) -> np.ndarray:
    if real:
        return c
    return ComplexCoefficients.normalized(c).values.copy()


def _ascend(design: np.ndarray, start: np.ndarray, opts: FitOptions, real: bool) -> _Ascent:
    """
    Fixed-point ascent on the unit sphere.

    Each step moves along the geodesic toward g/|g|, halving the step until
    the log-likelihood increases. The accepted log-likelihoods never decrease.
    """
    c = np.asarray(start, dtype=float if real else complex)
    c = _gauge(c / np.linalg.norm(c), real)
    loglik, amp = _loglik(design, c)
    if not np.isfinite(loglik):
        return _Ascent(c, loglik, 0, np.inf, False, [loglik])

    trace = [loglik]
    grad_norm = np.inf
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iters + 1):
        g = _score(design, amp, real)
        grad_norm = float(np.linalg.norm(g - np.vdot(c, g) * c))
        if grad_norm < opts.grad_tol:
            converged = True
            break

        target = g / np.linalg.norm(g)
        t = 1.0
        candidate = None
        for _ in range(MAX_HALVINGS + 1):
            trial = _gauge(_geodesic(c, target, t), real)
            trial_loglik, trial_amp = _loglik(design, trial)
            if trial_loglik > loglik:
                candidate = (trial, trial_loglik, trial_amp)
                break
            t *= 0.5

        if candidate is None:
            # No increase at any step length: stationary to working precision.
            converged = True
            break

        change = candidate[1] - loglik
        c, loglik, amp = candidate
        trace.append(loglik)
        if change <= opts.loglik_tol * max(1.0, abs(loglik)):
            converged = True
            break

    return _Ascent(c, loglik, iterations, grad_norm, converged, trace)


def _pad(values: np.ndarray, m: int) -> np.ndarray:
    padded = np.zeros(m + 1, dtype=complex)
    size = min(values.size, m + 1)
    padded[:size] = values[:size]
    return padded


def _canonical(design: np.ndarray, coeffs: np.ndarray, loglik: float) -> np.ndarray:
    """
    Minimum-phase representative of a fitted coefficient vector.

    Every density has several coefficient vectors, one per choice of which
    polynomial roots sit inside the unit disc; fits from different data
    rotations or starts may land on different ones. Falls back to the input
    if root finding lost accuracy.
    """
    canonical = minimum_phase(coeffs)
    value, _ = _loglik(design, canonical.astype(complex))
    if np.isfinite(loglik) and value < loglik - 1e-9 * max(1.0, abs(loglik)):
        logger.debug(f"Minimum-phase form lost {loglik - value:.3e} in loglik; keeping the fit as is")
        return coeffs
    return canonical


def _general_starts(m: int, opts: FitOptions) -> List[np.ndarray]:
    base = np.full(m + 1, opts.init_epsilon, dtype=complex)
    base[0] = 1.0
    starts = [base / np.linalg.norm(base)]
    root = RngStream(opts.seed)
    for restart in range(1, opts.n_restarts):
        generator = root.spawn(restart).generator()
        z = generator.standard_normal(m + 1) + 1j * generator.standard_normal(m + 1)
        starts.append(z / np.linalg.norm(z))
    return starts


def _run_general(data: AngleSample, m: int, opts: FitOptions,
                 starts: Sequence[np.ndarray]) -> FitReport:
    if m == 0:
        return FitReport.build("general", data, uniform_model(), 0, 0.0, True)

    design = harmonic_design(data.angles, m)
    best: Optional[_Ascent] = None
    for index, start in enumerate(starts):
        result = _ascend(design, start, opts, real=False)
        logger.debug(
            f"General M={m} start {index}: loglik={result.loglik:.6f} "
            f"after {result.iterations} iterations (converged={result.converged})"
        )
        if best is None or result.loglik > best.loglik:
            best = result

    if not np.isfinite(best.loglik):
        raise NntsError(f"No finite-likelihood starting point for the general M={m} fit")

    coeffs = _canonical(design, best.coeffs, best.loglik)
    model = NntsModel(ComplexCoefficients.normalized(coeffs))
    return FitReport.build("general", data, model, best.iterations, best.grad_norm,
                           best.converged, best.trace)


def fit_general(data: AngleSample, m: int, opts: Optional[FitOptions] = None,
                initial: Optional[Sequence[complex]] = None) -> FitReport:
    """
    Fit a general NNTS model of order m.

    Args:
        data: Angle sample
        m: Truncation order, m >= 0
        opts: Optimizer settings
        initial: Optional extra starting vector (zero-padded or truncated to m+1)

    Returns:
        FitReport of the best start; non-convergence is reported, not raised
    """
    opts = opts or FitOptions()
    if m < 0:
        raise DomainError(f"M must be nonnegative, got {m}")

    starts = _general_starts(m, opts)
    if initial is not None:
        extra = _pad(np.asarray(initial, dtype=complex).ravel(), m)
        if np.linalg.norm(extra) > 0:
            starts.append(extra)
    return _run_general(data, m, opts, starts)


def _symmetric_loglik(design: np.ndarray, rho: np.ndarray, mu: float) -> float:
    ks = np.arange(rho.size)
    return _loglik(design, rho * np.exp(-1j * ks * mu))[0]


def _profile_mu(design: np.ndarray, rho: np.ndarray, opts: FitOptions,
                current: Optional[float] = None) -> Tuple[float, float]:
    """Maximise the symmetric log-likelihood over mu for fixed rho."""
    ks = np.arange(rho.size)
    step = TWO_PI / opts.mu_grid_points
    grid = np.arange(opts.mu_grid_points) * step
    weighted = design * rho

    profile = np.empty(grid.size)
    for lo in range(0, grid.size, PROFILE_CHUNK):
        block = grid[lo:lo + PROFILE_CHUNK]
        amp = weighted @ np.exp(-1j * np.outer(ks, block))
        dens = (amp.real ** 2 + amp.imag ** 2) / TWO_PI
        underflow = np.any(dens < DENSITY_FLOOR, axis=0)
        profile[lo:lo + block.size] = np.where(
            underflow, -np.inf, np.sum(np.log(np.maximum(dens, DENSITY_FLOOR)), axis=0)
        )

    best = int(np.argmax(profile))
    best_mu, best_loglik = float(grid[best]), float(profile[best])
    if np.isfinite(best_loglik):
        refined = minimize_scalar(
            lambda mu: -_symmetric_loglik(design, rho, mu),
            bounds=(best_mu - step, best_mu + step),
            method="bounded",
            options={"xatol": opts.mu_tol},
        )
        if np.isfinite(refined.fun) and -refined.fun > best_loglik:
            best_mu, best_loglik = float(reduce_angles(refined.x)), float(-refined.fun)

    if current is not None:
        current_loglik = _symmetric_loglik(design, rho, current)
        if current_loglik >= best_loglik:
            return current, current_loglik
    return best_mu, best_loglik


def _joint_gradient_norm(design: np.ndarray, rho: np.ndarray, mu: float) -> float:
    """Norm of the (rho-tangent, d/dmu) score per observation."""
    ks = np.arange(rho.size)
    centred = design * np.exp(-1j * ks * mu)
    amp = centred @ rho
    g = _score(centred, amp, real=True)
    tangent = g - np.dot(rho, g) * rho
    d_amp = centred @ (-1j * ks * rho)
    d_mu = float(np.mean(2.0 * np.real(d_amp / amp)))
    return float(np.sqrt(np.dot(tangent, tangent) + d_mu ** 2))


def fit_symmetric(data: AngleSample, m: int, opts: Optional[FitOptions] = None,
                  general: Optional[FitReport] = None) -> FitReport:
    """
    Fit a reflectively symmetric NNTS model of order m.

    Starts from the moduli of the general fit, then alternates profiling the
    axis mu and re-fitting rho on the real sphere until the joint gradient
    vanishes or the log-likelihood stops improving.

    Args:
        data: Angle sample
        m: Truncation order, m >= 0
        opts: Optimizer settings
        general: General fit of the same order to start from (fitted when omitted)

    Returns:
        FitReport holding a SymmetricNntsModel
    """
    opts = opts or FitOptions()
    if m < 0:
        raise DomainError(f"M must be nonnegative, got {m}")
    if m == 0:
        return FitReport.build("symmetric", data, SymmetricNntsModel([1.0], 0.0), 0, 0.0, True)

    if general is None or general.model is None or general.m != m:
        general = fit_general(data, m, opts)

    design = harmonic_design(data.angles, m)
    ks = np.arange(m + 1)
    rho = general.model.coeffs.moduli.copy()
    mu, loglik = _profile_mu(design, rho, opts)
    trace = [loglik]

    iterations = 0
    converged = False
    grad_norm = np.inf
    for cycle in range(1, opts.max_cycles + 1):
        start_loglik = loglik

        ascent = _ascend(design * np.exp(-1j * ks * mu), rho, opts, real=True)
        iterations += ascent.iterations
        if ascent.loglik >= loglik:
            rho, loglik = ascent.coeffs, ascent.loglik

        mu, loglik = _profile_mu(design, rho, opts, current=mu)
        trace.append(loglik)

        grad_norm = _joint_gradient_norm(design, rho, mu) if np.isfinite(loglik) else np.inf
        if grad_norm < opts.grad_tol or (
            np.isfinite(loglik) and loglik - start_loglik <= opts.loglik_tol * max(1.0, abs(loglik))
        ):
            converged = np.isfinite(loglik)
            break

    logger.debug(
        f"Symmetric M={m}: loglik={loglik:.6f} mu={mu:.6f} after {cycle} cycles "
        f"(converged={converged})"
    )
    rho = _canonical(design * np.exp(-1j * ks * mu), rho, loglik)
    model = SymmetricNntsModel.normalized(rho, mu)
    return FitReport.build("symmetric", data, model, iterations, grad_norm, converged, trace)


def fit_pair(data: AngleSample, m: int, opts: Optional[FitOptions] = None,
             initial: Optional[Sequence[complex]] = None) -> Tuple[FitReport, FitReport]:
    """
    Fit the general and symmetric models of order m on the same data.

    When the symmetric optimum beats the general one (a local optimum of the
    general fit), the general fit is restarted from the symmetric solution.

    Returns:
        Tuple of (general report, symmetric report)
    """
    opts = opts or FitOptions()
    general = fit_general(data, m, opts, initial=initial)
    symmetric = fit_symmetric(data, m, opts, general=general)
    if symmetric.loglik > general.loglik:
        logger.debug(f"Restarting general M={m} fit from the symmetric optimum")
        warm = _run_general(data, m, opts, [symmetric.model.to_general().coeffs.values])
        if warm.loglik > general.loglik:
            general = warm
    return general, symmetric


def mark_best(reports: Sequence[FitReport], criterion: str = "bic") -> List[FitReport]:
    """Flag the criterion-minimising successful report; ties go to the smaller M."""
    best_index = None
    for index, report in enumerate(reports):
        if not report.ok:
            continue
        if best_index is None or report.criterion(criterion) < reports[best_index].criterion(criterion):
            best_index = index
    return [replace(report, is_best=index == best_index) for index, report in enumerate(reports)]


def scan_models(data: AngleSample, m_max: int, family: str = "symmetric",
                opts: Optional[FitOptions] = None, criterion: str = "bic") -> List[FitReport]:
    """
    Fit every order 0..m_max and flag the best one by AIC or BIC.

    Each general fit is warm-started from the previous order's optimum, so
    the general log-likelihood is nondecreasing in M. A failing order is
    recorded with its error and the scan continues.

    Args:
        data: Angle sample
        m_max: Largest order to fit
        family: 'general' or 'symmetric'
        opts: Optimizer settings
        criterion: 'aic' or 'bic'

    Returns:
        One FitReport per order, exactly one flagged as best
    """
    opts = opts or FitOptions()
    if m_max < 0:
        raise DomainError(f"m_max must be nonnegative, got {m_max}")
    if family not in ("general", "symmetric"):
        raise DomainError(f"Unknown family {family!r}; expected 'general' or 'symmetric'")

    reports: List[FitReport] = []
    previous: Optional[np.ndarray] = None
    for m in range(m_max + 1):
        try:
            general = fit_general(data, m, opts, initial=previous)
            previous = general.model.coeffs.values
            if family == "general":
                report = general
            else:
                report = fit_symmetric(data, m, opts, general=general)
        except NntsError as exc:
            logger.warning(f"{family.capitalize()} fit at M={m} failed: {exc}")
            report = FitReport.failed(family, m, data, str(exc))
        reports.append(report)

    return mark_best(reports, criterion)


def fit_options_summary(opts: FitOptions) -> Dict[str, Any]:
    """Plain mapping of the options, for audit records."""
    return {f.name: getattr(opts, f.name) for f in fields(opts)}
