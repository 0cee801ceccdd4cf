"""Run orchestration shared by the CLI and the acceptance suite.

A run is a pure function of (spec, settings); nothing here holds state
between runs, so sweep points can be evaluated in worker processes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import analytic, oracle
from .fitting import fit_decay_rate
from .model import SystemSpec

SCHEMA_VERSION = "1.0"

MEAN_CURRENT_TOL = 0.02
VARIANCE_RATIO_TOL = 0.05
CORRELATION_RATE_TOL = 0.05
CORRELATION_HEAD_TOL = 0.05

# Correlation sampling in units of 1/gamma_total.
CORRELATION_T1 = 10.0
CORRELATION_FIT_WINDOW = (0.5, 4.0)
CORRELATION_SPAN = 6.0
CORRELATION_STEP = 0.05


@dataclass(frozen=True)
class RunResult:
    spec_echo: dict
    provenance: str
    time_grid: np.ndarray
    mean_current_trace: np.ndarray
    steady_summary: dict
    variance: dict
    correlation_trace: dict | None = None
    diagnostics: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.provenance not in ("analytic", "oracle"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if np.shape(self.mean_current_trace) != np.shape(self.time_grid):
            raise ValueError("mean_current_trace is not aligned to time_grid")
        if self.provenance == "oracle" and not self.diagnostics:
            raise ValueError("oracle runs must carry diagnostics")

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "provenance": self.provenance,
            "spec_echo": self.spec_echo,
            "settings": self.settings,
            "time_grid": _floats(self.time_grid),
            "mean_current_trace": _floats(self.mean_current_trace),
            "steady_summary": self.steady_summary,
            "variance": self.variance,
            "correlation_trace": self.correlation_trace,
            "diagnostics": self.diagnostics,
        }


def _floats(values) -> list[float]:
    return [float(v) for v in np.asarray(values, float)]


def _complex_columns(values) -> dict[str, list[float]]:
    values = np.asarray(values, complex)
    return {"real": _floats(values.real), "imag": _floats(values.imag), "abs": _floats(np.abs(values))}


def settings_dict(settings: oracle.OracleSettings) -> dict:
    return asdict(settings)


def correlation_lags(spec: SystemSpec) -> np.ndarray:
    rate = spec.gamma_total
    steps = int(round(CORRELATION_SPAN / CORRELATION_STEP))
    return np.linspace(0.0, CORRELATION_SPAN / rate, steps + 1)


def fit_window_mask(spec: SystemSpec, tau) -> np.ndarray:
    lo, hi = CORRELATION_FIT_WINDOW
    rate = spec.gamma_total
    return (tau >= lo / rate - 1e-12) & (tau <= hi / rate + 1e-12)


def envelope_rate(spec: SystemSpec, tau, values) -> float:
    mask = fit_window_mask(spec, tau)
    return fit_decay_rate(tau[mask], values[mask])


# ----------------------------------------------------------------------
# analytic runs


def analytic_run(spec: SystemSpec, settings: oracle.OracleSettings | None = None, correlation: bool = False) -> RunResult:
    settings = settings or oracle.OracleSettings()
    spec = settings.resolve(spec)
    grid = settings.time_grid(spec)
    steady = analytic.mean_current_steady(spec)
    var = analytic.variance_summary(spec)
    corr = None
    if correlation:
        trace = analytic.correlation_stationary(spec, correlation_lags(spec))
        corr = {
            "tau": _floats(trace.tau_grid),
            "values": _complex_columns(trace.values),
            "smooth": _complex_columns(trace.smooth),
            "delta_weight": trace.delta_weight,
            "electronic_correlation_model": trace.electronic_correlation_model,
        }
    return RunResult(
        spec_echo=spec.to_dict(),
        provenance="analytic",
        time_grid=grid,
        mean_current_trace=np.asarray(analytic.mean_current_transient(spec, grid), float),
        steady_summary=asdict(steady),
        variance={**asdict(var), "ratio": var.ratio},
        correlation_trace=corr,
        settings=settings_dict(settings),
    )


# ----------------------------------------------------------------------
# oracle runs


@dataclass(frozen=True)
class OracleObservables:
    time_grid: np.ndarray
    mean_current_trace: np.ndarray
    mean_current: float
    variance: float
    variance_ratio: float
    correlation: oracle.CorrelationTerms | None
    correlation_rate: float
    correlation_head: complex
    unitarity_drift: float
    calibrations: tuple
    delta_integral: float


def recurrence_time(spec: SystemSpec) -> float:
    """Shortest Poincare recurrence 2 pi / dw over the coupled reservoirs."""
    times = [2 * math.pi / r.mode_spacing for r in (spec.electronic, spec.radiative) if r.gamma > 0]
    return min(times) if times else math.inf


def required_time(spec: SystemSpec, settings: oracle.OracleSettings, correlation: bool) -> float:
    horizon = float(settings.time_grid(spec)[-1])
    if correlation:
        horizon = max(horizon, (CORRELATION_T1 + CORRELATION_SPAN) / spec.gamma_total)
    return horizon


def oracle_observables(spec: SystemSpec, settings: oracle.OracleSettings | None = None, correlation: bool = True) -> OracleObservables:
    """Propagate the discretised model once and read off every observable."""
    settings = settings or oracle.OracleSettings()
    spec = settings.resolve(spec)
    system = oracle.build_discretized(spec, settings)
    U = oracle.propagate(system, settings.time_grid(spec))
    trace = oracle.oracle_mean_current_trace(U, system)
    t_end = float(U.time_grid[-1])
    mean = float(trace[-1])
    var = float(oracle.oracle_variance(U, system, t_end))
    ratio = var / mean if mean != 0 else 0.0

    terms, rate, head = None, math.nan, 0j
    if correlation:
        t1 = CORRELATION_T1 / spec.gamma_total
        tau = correlation_lags(spec)
        terms = oracle.oracle_correlation(U, system, t1, t1 + tau)
        head = complex(terms.smooth[0])
        if abs(head) > 0:
            rate = envelope_rate(spec, tau, terms.smooth)
    return OracleObservables(
        time_grid=U.time_grid,
        mean_current_trace=trace,
        mean_current=mean,
        variance=var,
        variance_ratio=ratio,
        correlation=terms,
        correlation_rate=rate,
        correlation_head=head,
        unitarity_drift=U.unitarity_drift,
        calibrations=system.calibrations,
        delta_integral=oracle.discrete_delta_integral(system),
    )


def _diagnostics(obs: OracleObservables, spec: SystemSpec) -> dict:
    return {
        "calibration": [asdict(c) for c in obs.calibrations],
        "unitarity_drift": obs.unitarity_drift,
        "recurrence_time": recurrence_time(spec),
        "discrete_delta_integral": obs.delta_integral,
    }


def oracle_run(spec: SystemSpec, settings: oracle.OracleSettings | None = None, correlation: bool = False) -> RunResult:
    settings = settings or oracle.OracleSettings()
    spec = settings.resolve(spec)
    obs = oracle_observables(spec, settings, correlation)
    corr = None
    if obs.correlation is not None:
        c = obs.correlation
        corr = {
            "tau": _floats(c.tau),
            "t1": c.t1,
            "values": _complex_columns(c.total),
            "smooth": _complex_columns(c.smooth),
            "fitted_decay_rate": obs.correlation_rate,
        }
    return RunResult(
        spec_echo=spec.to_dict(),
        provenance="oracle",
        time_grid=obs.time_grid,
        mean_current_trace=obs.mean_current_trace,
        steady_summary={"mean_current": obs.mean_current},
        variance={"variance": obs.variance, "ratio": obs.variance_ratio, "mean_current": obs.mean_current},
        correlation_trace=corr,
        diagnostics=_diagnostics(obs, spec),
        settings=settings_dict(settings),
    )


# ----------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Check:
    name: str
    analytic: float
    oracle: float
    tolerance: float
    kind: str = "relative"

    @property
    def error(self) -> float:
        if self.kind == "absolute":
            return abs(self.oracle - self.analytic)
        if self.analytic == 0:
            return abs(self.oracle)
        return abs(self.oracle / self.analytic - 1.0)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.error) and self.error <= self.tolerance)

    def row(self) -> dict:
        return {
            "check": self.name,
            "analytic": self.analytic,
            "oracle": self.oracle,
            "error": self.error,
            "tolerance": self.tolerance,
            "kind": self.kind,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ValidationOutcome:
    checks: tuple[Check, ...]
    convergence_ok: bool
    convergence_notes: tuple[str, ...]
    diagnostics: dict

    @property
    def tolerance_ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def ok(self) -> bool:
        return self.tolerance_ok and self.convergence_ok


def markov_checks(spec: SystemSpec, obs: OracleObservables) -> list[Check]:
    steady = analytic.mean_current_steady(spec)
    var = analytic.variance_summary(spec)
    checks = [
        Check("mean_current", steady.mean_current, obs.mean_current, MEAN_CURRENT_TOL),
        Check("variance_ratio", var.ratio, obs.variance_ratio, VARIANCE_RATIO_TOL),
    ]
    if obs.correlation is not None:
        head = abs(analytic.correlation_stationary(spec, [0.0]).smooth[0])
        checks.append(Check("correlation_decay_rate", spec.gamma_total, obs.correlation_rate, CORRELATION_RATE_TOL))
        checks.append(Check("correlation_head", head, abs(obs.correlation_head), CORRELATION_HEAD_TOL))
    return checks


def refined_settings(spec: SystemSpec, settings: oracle.OracleSettings) -> oracle.OracleSettings:
    """Settings with 2N - 1 modes per reservoir at the same bandwidth (nested grid)."""
    n = max(spec.electronic.mode_count, spec.radiative.mode_count)
    return oracle.OracleSettings(**{**asdict(settings), "mode_count": 2 * n - 1})


def convergence_shifts(coarse: OracleObservables, fine: OracleObservables) -> dict[str, float]:
    def rel(a, b):
        return abs(a / b - 1.0) if b else abs(a)

    shifts = {
        "mean_current": rel(coarse.mean_current, fine.mean_current),
        "variance_ratio": rel(coarse.variance_ratio, fine.variance_ratio),
    }
    if coarse.correlation is not None and fine.correlation is not None:
        shifts["correlation_decay_rate"] = rel(coarse.correlation_rate, fine.correlation_rate)
    return shifts


CONVERGENCE_LIMITS = {
    "mean_current": MEAN_CURRENT_TOL / 2,
    "variance_ratio": VARIANCE_RATIO_TOL / 2,
    "correlation_decay_rate": CORRELATION_RATE_TOL / 2,
}


def validate_run(
    spec: SystemSpec,
    settings: oracle.OracleSettings | None = None,
    correlation: bool = True,
    convergence: bool = True,
) -> ValidationOutcome:
    """Oracle vs closed forms plus the N vs 2N - 1 convergence study.

    Raises :class:`oracle.CalibrationError` if the coupling fit fails.  A
    grid whose recurrence time falls inside the simulated window is flagged
    as unconverged before any propagation.
    """
    settings = settings or oracle.OracleSettings()
    spec = settings.resolve(spec)
    needed = required_time(spec, settings, correlation)
    recurrence = recurrence_time(spec)
    if recurrence <= needed:
        note = f"recurrence time {recurrence:.4g} <= simulated time {needed:.4g}: grid too coarse"
        return ValidationOutcome((), False, (note,), {"recurrence_time": recurrence, "required_time": needed})

    obs = oracle_observables(spec, settings, correlation)
    checks = markov_checks(spec, obs)
    diagnostics = _diagnostics(obs, spec)
    notes: list[str] = []
    ok = True
    if obs.unitarity_drift > 1e-9:
        ok = False
        notes.append(f"unitarity drift {obs.unitarity_drift:.3g} > 1e-9")
    if convergence:
        fine_settings = refined_settings(spec, settings)
        fine = oracle_observables(fine_settings.resolve(spec), fine_settings, correlation)
        shifts = convergence_shifts(obs, fine)
        diagnostics["convergence_deltas"] = shifts
        diagnostics["convergence_mode_count"] = fine_settings.mode_count
        for name, shift in shifts.items():
            if not shift <= CONVERGENCE_LIMITS[name]:
                ok = False
                notes.append(f"{name} shifts by {shift:.3g} between N and 2N-1 (> {CONVERGENCE_LIMITS[name]:g})")
    return ValidationOutcome(tuple(checks), ok, tuple(notes), diagnostics)
