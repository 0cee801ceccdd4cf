"""Markov-limit closed forms for the photocurrent observables.

Everything here is O(g_L^2) in the drive coupling except the explicit
``-<i>^2/2`` term of the variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import _f
from .model import ReservoirSpec, SystemSpec


@dataclass(frozen=True)
class SteadyStateSummary:
    mean_current: float
    efficiency_factor: float
    normally_ordered_current: float
    detuning: float
    xi: float


@dataclass(frozen=True)
class VarianceSummary:
    variance: float
    shot_noise_limit: float
    mean_current: float

    @property
    def ratio(self) -> float:
        """Fano-like variance/mean ratio (0 when the drive is off)."""
        if self.mean_current == 0:
            return 0.0
        return self.variance / self.mean_current


@dataclass(frozen=True)
class CorrelationTrace:
    """Stationary current correlation <i(t) i(t + tau)>.

    ``smooth`` is the exponentially decaying part.  The electronic reservoir
    correlation is a delta at ``tau == 0`` whose weight, times the Lorentzian
    prefactor, is stored in ``delta_weight`` and added to ``values[tau == 0]``.
    """

    tau_grid: np.ndarray
    values: np.ndarray
    smooth: np.ndarray
    delta_weight: float
    electronic_correlation_model: str


def quantum_efficiency(xi: float) -> float:
    if xi < 0:
        raise ValueError(f"branching ratio must be >= 0, got {xi}")
    return 1.0 / (1.0 + xi) ** 2


def _prefactor(spec: SystemSpec) -> float:
    """g_L^2 |alpha|^2 / (gamma_e^2 + detuning^2)."""
    g = spec.drive.coupling
    return g * g * spec.drive.intensity / (spec.gamma_total**2 + spec.detuning**2)


def mean_current_transient(spec: SystemSpec, t):
    """Mean electronic current at time(s) ``t`` after the drive is switched on."""
    t = np.asarray(t, float)
    if np.any(t < 0):
        raise ValueError("time must be >= 0")
    f = _f(spec.drive.laser_frequency, spec.detector.transition_frequency, spec.gamma_total, t)
    g = spec.drive.coupling
    out = 2.0 * spec.drive.intensity * spec.electronic.gamma * g * g * np.abs(f) ** 2
    return float(out) if out.ndim == 0 else out


def mean_current_steady(spec: SystemSpec) -> SteadyStateSummary:
    g1 = spec.electronic.gamma
    mean = 2.0 * g1 * _prefactor(spec)
    g = spec.drive.coupling
    normal = 2.0 * g * g * spec.drive.intensity / g1
    return SteadyStateSummary(
        mean_current=mean,
        efficiency_factor=quantum_efficiency(spec.xi),
        normally_ordered_current=normal,
        detuning=spec.detuning,
        xi=spec.xi,
    )


def variance_summary(spec: SystemSpec) -> VarianceSummary:
    mean = mean_current_steady(spec).mean_current
    shot = spec.electronic.bandwidth / math.pi
    full = (shot + 0.5 * spec.electronic.gamma) * mean - 0.5 * mean * mean
    return VarianceSummary(variance=full, shot_noise_limit=shot * mean, mean_current=mean)


def current_variance(spec: SystemSpec) -> float:
    """Steady-state current variance including the -<i>^2/2 correction."""
    return variance_summary(spec).variance


def markov_delta_weight(reservoir: ReservoirSpec) -> float:
    """Weight of the delta function that sum_l g_l^2 exp(i w_l tau) tends to."""
    return 2.0 * reservoir.gamma


def electronic_delta_weight(spec: SystemSpec) -> float:
    """Equal-time value of the electronic reservoir correlation, 2 g1 Ω/π.

    Chosen so that the tau = 0 correlation reproduces the Ω/π shot-noise term
    of the variance.
    """
    return markov_delta_weight(spec.electronic) * spec.electronic.bandwidth / math.pi


def correlation_stationary(spec: SystemSpec, tau_grid) -> CorrelationTrace:
    tau = np.asarray(tau_grid, float)
    if np.any(tau < 0):
        raise ValueError("lags must be >= 0; reflect negative lags by conjugate symmetry")
    pref = _prefactor(spec)
    w_l = spec.drive.laser_frequency
    w_e = spec.detector.transition_frequency
    g1 = spec.electronic.gamma
    smooth = pref * g1 * g1 * np.exp(-1j * (w_l - w_e) * tau - spec.gamma_total * tau)
    weight = pref * electronic_delta_weight(spec)
    values = smooth.copy()
    values[tau == 0] += weight
    return CorrelationTrace(
        tau_grid=tau,
        values=values,
        smooth=smooth,
        delta_weight=weight,
        electronic_correlation_model=f"delta(tau) with equal-time weight 2*gamma_1*Omega/pi = {electronic_delta_weight(spec):.6g}",
    )
