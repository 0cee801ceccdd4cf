"""Discretised-reservoir reference for the Markov closed forms.

Both reservoirs are replaced by explicit equally spaced modes and the linear
(weak-excitation, rotating-wave) equations of motion

    db/dt   = -i w_e b + i sum_k g_k a_k + i sum_l g_l c_l
    da_k/dt = -i w_k a_k + i g_k b
    dc_l/dt = -i w_l c_l + i g_l b

are solved exactly.  The generator is -i H with H a real symmetric arrowhead
matrix, so the propagator is obtained from its eigendecomposition
(:mod:`vacdetect.spectral`) in the frame rotating at the detector frequency.

The laser is one extra field mode at the drive frequency holding the coherent
amplitude.  It is coupled with a probe strength ``probe_scale * g_L`` and its
column of the propagator is rescaled by ``1 / probe_scale``.  This gives the
O(g_L) linear response of the closed forms without depleting a single
discrete mode over the simulated horizon.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fitting import fit_decay_rate
from .kernels import KernelSet
from .model import ReservoirSpec, SystemSpec
from .spectral import ArrowheadSpectrum

UNITARITY_LIMIT = 1e-7
CALIBRATION_WINDOW = (2.0, 6.0)


class OracleError(RuntimeError):
    pass


class CalibrationError(OracleError):
    """Per-mode couplings could not reproduce the requested decay rate."""


class DiscretizationError(OracleError, ValueError):
    """The requested discretisation is inconsistent with the SystemSpec."""


class UnitarityError(OracleError):
    pass


@dataclass(frozen=True)
class OracleSettings:
    """Discretisation and sampling controls; ``None`` means derived default.

    ``mode_count`` and ``bandwidth`` override both reservoirs.  ``dt`` and
    ``horizon`` default to 0.05 and 20 in units of 1/gamma_total.
    """

    mode_count: int | None = None
    bandwidth: float | None = None
    dt: float | None = None
    horizon: float | None = None
    probe_scale: float = 1e-3
    calibration_tolerance: float = 0.005
    fd_step: float | None = None

    def resolve(self, spec: SystemSpec) -> SystemSpec:
        changes = {}
        if self.mode_count is not None:
            changes["mode_count"] = self.mode_count
        if self.bandwidth is not None:
            changes["bandwidth"] = self.bandwidth
        if not changes:
            return spec
        return spec.with_changes(electronic=changes, radiative=changes)

    def time_grid(self, spec: SystemSpec) -> np.ndarray:
        rate = spec.gamma_total
        dt = self.dt if self.dt is not None else 0.05 / rate
        horizon = self.horizon if self.horizon is not None else 20.0 / rate
        steps = int(round(horizon / dt))
        return np.linspace(0.0, steps * dt, steps + 1)

    def derivative_step(self, spec: SystemSpec) -> float:
        return self.fd_step if self.fd_step is not None else 0.01 / spec.gamma_total


@dataclass(frozen=True)
class Calibration:
    kind: str
    target_rate: float
    fitted_rate: float
    coupling: float
    initial_coupling: float
    iterations: int
    method: str = "fit"

    @property
    def relative_error(self) -> float:
        if self.target_rate == 0:
            return 0.0
        return abs(self.fitted_rate / self.target_rate - 1.0)


def _band(offset: float, reservoir: ReservoirSpec) -> np.ndarray:
    return offset + reservoir.bandwidth * np.linspace(-1.0, 1.0, reservoir.mode_count)


def _detector_decay_rate(poles, coupling, rate_scale) -> float:
    spectrum = ArrowheadSpectrum(0.0, poles, np.full(poles.size, -coupling))
    t = np.linspace(CALIBRATION_WINDOW[0] / rate_scale, CALIBRATION_WINDOW[1] / rate_scale, 200)
    coeff = spectrum.project(np.eye(1, spectrum.size, 0).ravel())
    return fit_decay_rate(t, spectrum.bilinear(coeff, coeff, t))


@functools.lru_cache(maxsize=64)
def _calibrate(kind: str, gamma: float, bandwidth: float, mode_count: int, offset: float, tolerance: float):
    reservoir = ReservoirSpec(kind, gamma, bandwidth, mode_count)
    poles = _band(offset, reservoir)
    initial = math.sqrt(gamma * reservoir.mode_spacing / math.pi)
    if not reservoir.markovian:
        # Decay is not exponential for a narrow band; keep the golden-rule value.
        try:
            rate = _detector_decay_rate(poles, initial, gamma)
        except ValueError:
            rate = math.nan
        return Calibration(kind, gamma, rate, initial, initial, 0, "golden-rule")
    recurrence = 2 * math.pi / reservoir.mode_spacing
    if recurrence <= CALIBRATION_WINDOW[1] / gamma:
        raise CalibrationError(
            f"{kind}: recurrence time {recurrence:.3g} falls inside the fit window; increase mode_count"
        )
    coupling, rate, iterations = initial, math.nan, 0
    for iterations in range(1, 13):
        try:
            rate = _detector_decay_rate(poles, coupling, gamma)
        except ValueError as exc:
            raise CalibrationError(f"{kind}: decay fit failed ({exc})") from None
        if not rate > 0:
            raise CalibrationError(f"{kind}: fitted decay rate {rate:.4g} is not positive")
        if abs(rate / gamma - 1.0) < 1e-3 * tolerance:
            break
        coupling *= math.sqrt(gamma / rate)
    cal = Calibration(kind, gamma, rate, coupling, initial, iterations)
    if cal.relative_error > tolerance:
        raise CalibrationError(
            f"{kind}: fitted decay rate {rate:.6g} misses target {gamma:.6g} "
            f"by {100 * cal.relative_error:.2f}% (> {100 * tolerance:.2g}%)"
        )
    return cal


def calibrate_reservoir(spec: SystemSpec, reservoir: ReservoirSpec, tolerance: float = 0.005) -> Calibration:
    """Coupling for which the isolated detector decays at ``reservoir.gamma``.

    Starts from the golden-rule value sqrt(gamma dw / pi) and rescales until
    an exponential fit of |U_bb(t)| over t in [2, 6]/gamma hits the target.
    Non-Markovian bands keep the golden-rule coupling (``method`` records it).
    """
    if reservoir.gamma == 0:
        return Calibration(reservoir.kind.value, 0.0, 0.0, 0.0, 0.0, 0)
    offset = spec.band_center(reservoir) - spec.detector.transition_frequency
    return _calibrate(
        reservoir.kind.value,
        float(reservoir.gamma),
        float(reservoir.bandwidth),
        int(reservoir.mode_count),
        float(offset),
        float(tolerance),
    )


@dataclass(frozen=True)
class DiscretizedSystem:
    """Explicit-mode model: index 0 is the detector, then radiative modes,
    electronic modes and finally the laser mode."""

    spec: SystemSpec
    frequencies: np.ndarray
    couplings: np.ndarray
    radiative: slice
    electronic: slice
    laser: int
    drive_coupling: float
    probe_coupling: float
    calibrations: tuple[Calibration, ...] = field(default_factory=tuple)

    @property
    def size(self) -> int:
        return self.frequencies.size

    @property
    def reference_frequency(self) -> float:
        return float(self.frequencies[0])

    @property
    def drive_scale(self) -> float:
        """Factor converting the probe-coupled laser column to coupling g_L."""
        if self.probe_coupling == 0:
            return 0.0
        return self.drive_coupling / self.probe_coupling

    @property
    def electronic_couplings(self) -> np.ndarray:
        return self.couplings[self.electronic]

    def generator(self) -> np.ndarray:
        """Dense generator M of dX/dt = M X (small systems only)."""
        m = np.diag(-1j * self.frequencies).astype(complex)
        m[0, 1:] = 1j * self.couplings[1:]
        m[1:, 0] = 1j * self.couplings[1:]
        return m

    def unit(self, index: int) -> np.ndarray:
        return np.eye(1, self.size, index).ravel()

    def electronic_vector(self) -> np.ndarray:
        v = np.zeros(self.size)
        v[self.electronic] = self.electronic_couplings
        return v


def build_discretized(spec: SystemSpec, settings: OracleSettings | None = None) -> DiscretizedSystem:
    settings = settings or OracleSettings()
    spec = settings.resolve(spec)
    w_e = spec.detector.transition_frequency
    w_l = spec.drive.laser_frequency
    rad, elec = spec.radiative, spec.electronic
    for res in (rad, elec):
        if res.mode_count < 3 or res.mode_count % 2 == 0:
            raise DiscretizationError(f"{res.kind.value}.mode_count must be odd and >= 3")
    rad_center = spec.band_center(rad)
    if abs(w_l - rad_center) > rad.bandwidth * (1 + 1e-12):
        raise DiscretizationError(
            f"laser frequency {w_l:g} lies outside the radiative band "
            f"[{rad_center - rad.bandwidth:g}, {rad_center + rad.bandwidth:g}]"
        )

    cal_rad = calibrate_reservoir(spec, rad, settings.calibration_tolerance)
    cal_elec = calibrate_reservoir(spec, elec, settings.calibration_tolerance)
    probe = settings.probe_scale * spec.drive.coupling

    frequencies = np.concatenate(
        [
            [w_e],
            w_e + _band(rad_center - w_e, rad),
            w_e + _band(spec.band_center(elec) - w_e, elec),
            [w_l],
        ]
    )
    couplings = np.concatenate(
        [
            [0.0],
            np.full(rad.mode_count, cal_rad.coupling),
            np.full(elec.mode_count, cal_elec.coupling),
            [probe],
        ]
    )
    n_rad = rad.mode_count
    return DiscretizedSystem(
        spec=spec,
        frequencies=frequencies,
        couplings=couplings,
        radiative=slice(1, 1 + n_rad),
        electronic=slice(1 + n_rad, 1 + n_rad + elec.mode_count),
        laser=frequencies.size - 1,
        drive_coupling=spec.drive.coupling,
        probe_coupling=probe,
        calibrations=(cal_rad, cal_elec),
    )


class TransferMatrix:
    """Propagator U(t) = exp(M t) of a discretised system, held spectrally.

    Entries are evaluated on demand; dense U(t) is never stored.
    """

    def __init__(self, system: DiscretizedSystem, time_grid):
        self.system = system
        self.time_grid = np.asarray(time_grid, float)
        w_ref = system.reference_frequency
        # H = i M is real symmetric with couplings -g in the rotating frame.
        self.spectrum = ArrowheadSpectrum(0.0, system.frequencies[1:] - w_ref, -system.couplings[1:])
        self.unitarity_drift = self.spectrum.orthogonality_defect()
        self._projections: dict[object, np.ndarray] = {}

    def _phase(self, times):
        return np.exp(-1j * self.system.reference_frequency * np.asarray(times, float))

    def projection(self, key, vector=None) -> np.ndarray:
        if key not in self._projections:
            if vector is None:
                vector = self.system.unit(key)
            self._projections[key] = self.spectrum.project(vector)
        return self._projections[key]

    def bilinear(self, left_key, right_key, times=None) -> np.ndarray:
        """left^T U(t) right for cached projection keys (ints are unit vectors)."""
        times = self.time_grid if times is None else np.atleast_1d(np.asarray(times, float))
        values = self.spectrum.bilinear(self.projection(left_key), self.projection(right_key), times)
        return values * self._phase(times)

    def element(self, row: int, col: int, times=None) -> np.ndarray:
        return self.bilinear(row, col, times)

    def columns(self, col: int, times) -> np.ndarray:
        """U(t) e_col for each time; shape (size, len(times))."""
        times = np.atleast_1d(np.asarray(times, float))
        coeff = self.projection(col)
        evolved = np.exp(-1j * np.outer(self.spectrum.eigenvalues, times)) * coeff[:, None]
        return self.spectrum.apply(evolved) * self._phase(times)

    def dense(self, t: float) -> np.ndarray:
        """Dense U(t); small systems and tests only."""
        v = self.spectrum.dense()
        return (v * np.exp(-1j * self.spectrum.eigenvalues * t)) @ v.T * self._phase(t)


def propagate(system: DiscretizedSystem, time_grid) -> TransferMatrix:
    grid = np.asarray(time_grid, float)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid < 0):
        raise ValueError("time grid must be a non-empty 1-d array of times >= 0")
    if grid.size > 1:
        steps = np.diff(grid)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("time grid must be uniform and increasing")
    transfer = TransferMatrix(system, grid)
    if transfer.unitarity_drift > UNITARITY_LIMIT:
        raise UnitarityError(f"propagator unitarity drift {transfer.unitarity_drift:.3g} > {UNITARITY_LIMIT:g}")
    return transfer


# ----------------------------------------------------------------------
# kernels and drive response


def extract_kernels(U: TransferMatrix, system: DiscretizedSystem, mode: int | None = None, source: int | None = None) -> KernelSet:
    """f_k, h_k and p_kk' read off the propagator on its time grid.

    f_k = U_bk / (i g_k), h_k = U_kb and p_kk' = -(U_kk' - delta_kk' e^{-i w_k t}).
    Laser-mode kernels are reported at the nominal drive coupling g_L.
    """
    mode = system.laser if mode is None else mode
    source = mode if source is None else source
    t = U.time_grid

    def scale(index):
        return system.drive_scale if index == system.laser else 1.0

    g = system.couplings[mode]
    if g == 0:
        raise ValueError(f"mode {mode} is uncoupled; f_k is undefined")
    f = U.element(0, mode) / (1j * g)
    h = U.element(mode, 0) * scale(mode)
    p = -U.element(mode, source)
    if mode == source:
        p = p + np.exp(-1j * system.frequencies[mode] * t)
    p = p * scale(mode) * scale(source)
    return KernelSet(t, f, h, p)


def _drive_amplitudes(U: TransferMatrix, system: DiscretizedSystem, times):
    """(u_b, P, F) of the drive response at ``times``.

    u_b = U_bL alpha is the detector amplitude, P = sum_l g_l p_lL and
    F = g_L f_L, all at the nominal drive coupling.
    """
    if "elec" not in U._projections:
        U.projection("elec", system.electronic_vector())
    s = system.drive_scale
    u_bl = U.bilinear(0, system.laser, times) * s
    gp = -U.bilinear("elec", system.laser, times) * s
    return u_bl * system.spec.drive.alpha, gp, u_bl / 1j


def oracle_mean_current_flux(U: TransferMatrix, system: DiscretizedSystem, times) -> np.ndarray:
    """Exact flux sum_l i g_l <c_l^+ b - b^+ c_l> = 2|alpha|^2 Re(F conj(P))."""
    _, gp, f = _drive_amplitudes(U, system, times)
    return 2.0 * system.spec.drive.intensity * np.real(f * np.conj(gp))


def electronic_population(U: TransferMatrix, system: DiscretizedSystem, times) -> np.ndarray:
    """sum over electronic modes of |U_lL(t) alpha|^2 at the nominal coupling."""
    cols = U.columns(system.laser, times)[system.electronic]
    return np.sum(np.abs(cols) ** 2, axis=0) * system.drive_scale**2 * system.spec.drive.intensity


def oracle_mean_current(U: TransferMatrix, system: DiscretizedSystem, t: float, step: float | None = None) -> float:
    """d/dt of the electronic population by a centred finite difference."""
    h = step if step is not None else 0.01 / system.spec.gamma_total
    if t >= h:
        pops = electronic_population(U, system, [t - h, t + h])
        return float((pops[1] - pops[0]) / (2 * h))
    pops = electronic_population(U, system, [t, t + h, t + 2 * h])
    return float((-3 * pops[0] + 4 * pops[1] - pops[2]) / (2 * h))


def oracle_mean_current_trace(U: TransferMatrix, system: DiscretizedSystem) -> np.ndarray:
    """Finite-difference current on the propagator's own (uniform) grid."""
    pops = electronic_population(U, system, U.time_grid)
    if pops.size < 3:
        raise ValueError("need at least three grid points")
    return np.gradient(pops, U.time_grid, edge_order=2)


def oracle_variance(U: TransferMatrix, system: DiscretizedSystem, t) -> np.ndarray | float:
    """Current variance from the three mode-sum terms with oracle kernels."""
    times = np.atleast_1d(np.asarray(t, float))
    _, gp, f = _drive_amplitudes(U, system, times)
    n = system.spec.drive.intensity
    sum_g2 = float(np.sum(system.electronic_couplings**2))
    var = n * np.abs(gp) ** 2 + n * sum_g2 * np.abs(f) ** 2 - 2.0 * n * n * np.real(f**2 * np.conj(gp) ** 2)
    return float(var[0]) if np.ndim(t) == 0 else var


@dataclass(frozen=True)
class CorrelationTerms:
    """Term-by-term two-time current correlation at lags ``tau``.

    ``detector`` is the [b(t1), b^+(t2)] term, ``electronic`` the
    [c_k(t1), c_k'^+(t2)] term and ``cross`` the two mixed commutator terms;
    ``fourth_order`` is the O(g_L^4) product of mean currents.
    ``electronic_free`` is the part of ``electronic`` carried by free
    reservoir propagation, i.e. the discrete chi_e(tau).
    """

    t1: float
    tau: np.ndarray
    detector: np.ndarray
    electronic: np.ndarray
    cross: np.ndarray
    fourth_order: np.ndarray
    electronic_free: np.ndarray

    @property
    def second_order(self) -> np.ndarray:
        return self.detector + self.electronic + self.cross

    @property
    def total(self) -> np.ndarray:
        return self.second_order + self.fourth_order

    @property
    def smooth(self) -> np.ndarray:
        """The exponentially decaying term kept alongside chi_e in the Markov limit."""
        return self.detector


def oracle_correlation(U: TransferMatrix, system: DiscretizedSystem, t1: float, t2) -> CorrelationTerms:
    t2 = np.atleast_1d(np.asarray(t2, float))
    if np.any(t2 < t1):
        raise ValueError("oracle_correlation needs t2 >= t1")
    tau = t2 - t1
    if "elec" not in U._projections:
        U.projection("elec", system.electronic_vector())
    n = system.spec.drive.intensity
    _, gp1, f1 = _drive_amplitudes(U, system, [t1])
    _, gp2, f2 = _drive_amplitudes(U, system, t2)
    gp1, f1 = gp1[0], f1[0]

    # Commutators of Heisenberg operators at t1 and t2 are entries of U(-tau).
    comm_bb = np.conj(U.bilinear(0, 0, tau))
    comm_cc = np.conj(U.bilinear("elec", "elec", tau))
    comm_bc = np.conj(U.bilinear("elec", 0, tau))
    comm_cb = np.conj(U.bilinear(0, "elec", tau))

    detector = n * np.conj(gp1) * gp2 * comm_bb
    electronic = n * np.conj(f1) * f2 * comm_cc
    cross = 1j * n * np.conj(gp1) * f2 * comm_bc - 1j * n * np.conj(f1) * gp2 * comm_cb

    w_l = system.frequencies[system.electronic]
    g2 = system.electronic_couplings**2
    chi = np.exp(1j * np.outer(tau, w_l)) @ g2
    electronic_free = n * np.conj(f1) * f2 * chi

    m1 = 2.0 * n * np.real(f1 * np.conj(gp1))
    m2 = 2.0 * n * np.real(f2 * np.conj(gp2))
    return CorrelationTerms(
        t1=float(t1),
        tau=tau,
        detector=detector,
        electronic=electronic,
        cross=cross,
        fourth_order=m1 * m2,
        electronic_free=electronic_free,
    )


def discrete_delta_integral(system: DiscretizedSystem, window: float = 5.0) -> float:
    """Integral of sum_l g_l^2 exp(i (w_l - w_c) tau) over |tau| <= window / Omega.

    ``w_c`` is the electronic band centre.  In the Markov limit the sum tends to
    2 gamma_1 delta(tau), so the result approaches 2 gamma_1.
    """
    res = system.spec.electronic
    half = window / res.bandwidth
    dw = system.frequencies[system.electronic] - system.spec.band_center(res)
    # int_{-T}^{T} exp(i x tau) dtau = 2 T sinc(x T / pi)
    return float(np.sum(system.electronic_couplings**2 * 2 * half * np.sinc(dw * half / np.pi)))


def with_settings(spec: SystemSpec, settings: OracleSettings, **overrides) -> tuple[SystemSpec, OracleSettings]:
    """Convenience: settings with overrides, and the resolved spec."""
    settings = replace(settings, **overrides)
    return settings.resolve(spec), settings
