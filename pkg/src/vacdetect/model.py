"""Physical parameter types shared by every other module.

All quantities are expressed in units of a user-chosen rate scale (usually the
electronic damping rate).  No SI constants appear anywhere: the observables
depend only on rate ratios and detunings.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace
from typing import Any

MARKOV_RATIO = 10.0
WEAK_EXCITATION_LIMIT = 0.1


class ConfigError(ValueError):
    """A configuration document is malformed (missing keys, wrong types)."""


class ReservoirKind(str, enum.Enum):
    ELECTRONIC = "electronic"
    RADIATIVE = "radiative"


@dataclass(frozen=True)
class DetectorSpec:
    """Two-level transition; the ground-state energy is zero."""

    transition_frequency: float


@dataclass(frozen=True)
class ReservoirSpec:
    """One damping channel of the detector.

    ``gamma`` is the operational amplitude decay rate into this reservoir.
    ``bandwidth`` is the half-width of the mode band, and ``mode_count`` only
    matters to the discretised oracle.  ``center_frequency=None`` centres the
    band on the laser frequency, so the drive sits on a grid mode and sees no
    band-edge dispersion.
    """

    kind: ReservoirKind
    gamma: float
    bandwidth: float
    mode_count: int = 2001
    center_frequency: float | None = None

    @property
    def markovian(self) -> bool:
        if self.gamma <= 0:
            return True
        return self.bandwidth / self.gamma >= MARKOV_RATIO

    @property
    def mode_spacing(self) -> float:
        return 2.0 * self.bandwidth / (self.mode_count - 1)

    @property
    def density_of_states(self) -> float:
        return self.mode_count / (2.0 * self.bandwidth)


@dataclass(frozen=True)
class DriveSpec:
    """Coherent drive occupying a single field mode."""

    alpha: complex
    laser_frequency: float
    coupling: float

    @property
    def intensity(self) -> float:
        return abs(self.alpha) ** 2


@dataclass(frozen=True)
class SystemSpec:
    detector: DetectorSpec
    electronic: ReservoirSpec
    radiative: ReservoirSpec
    drive: DriveSpec

    @property
    def gamma_total(self) -> float:
        return self.electronic.gamma + self.radiative.gamma

    @property
    def xi(self) -> float:
        """Branching ratio of radiative to electronic damping."""
        if self.electronic.gamma == 0:
            return math.inf
        return self.radiative.gamma / self.electronic.gamma

    @property
    def detuning(self) -> float:
        return self.drive.laser_frequency - self.detector.transition_frequency

    @property
    def weak_excitation_ratio(self) -> float:
        if self.gamma_total <= 0:
            return math.inf
        return self.drive.coupling * abs(self.drive.alpha) / self.gamma_total

    def band_center(self, reservoir: ReservoirSpec) -> float:
        if reservoir.center_frequency is None:
            return self.drive.laser_frequency
        return reservoir.center_frequency

    def with_changes(self, **changes: Any) -> SystemSpec:
        """Copy with nested overrides, e.g. ``radiative={"gamma": 0.5}``."""
        kwargs = {}
        for name, value in changes.items():
            current = getattr(self, name)
            kwargs[name] = replace(current, **value) if isinstance(value, dict) else value
        return replace(self, **kwargs)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        for key in ("electronic", "radiative"):
            out[key]["kind"] = getattr(self, key).kind.value
        alpha = complex(self.drive.alpha)
        out["drive"]["alpha"] = [alpha.real, alpha.imag]
        return out

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> SystemSpec:
        try:
            detector = DetectorSpec(transition_frequency=_real(doc["detector"]["transition_frequency"]))
            electronic = _reservoir(doc["electronic"], ReservoirKind.ELECTRONIC)
            radiative = _reservoir(doc["radiative"], ReservoirKind.RADIATIVE)
            d = doc["drive"]
            drive = DriveSpec(
                alpha=_complex(d["alpha"]),
                laser_frequency=_real(d["laser_frequency"]),
                coupling=_real(d["coupling"]),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config key: {exc.args[0]!r}") from None
        except TypeError as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        return cls(detector=detector, electronic=electronic, radiative=radiative, drive=drive)


def _real(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}")
    return float(value)


def _complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_real(value[0]), _real(value[1]))
    if isinstance(value, dict) and set(value) == {"real", "imag"}:
        return complex(_real(value["real"]), _real(value["imag"]))
    return complex(_real(value), 0.0)


def _reservoir(doc: dict[str, Any], default_kind: ReservoirKind) -> ReservoirSpec:
    kind = doc.get("kind", default_kind.value)
    try:
        kind = ReservoirKind(kind)
    except ValueError:
        raise ConfigError(f"unknown reservoir kind {kind!r}") from None
    if kind is not default_kind:
        raise ConfigError(f"reservoir kind {kind.value!r} given in the {default_kind.value!r} slot")
    count = doc.get("mode_count", 2001)
    if isinstance(count, bool) or not isinstance(count, int):
        raise ConfigError(f"mode_count must be an integer, got {count!r}")
    center = doc.get("center_frequency")
    return ReservoirSpec(
        kind=kind,
        gamma=_real(doc["gamma"]),
        bandwidth=_real(doc["bandwidth"]),
        mode_count=count,
        center_frequency=None if center is None else _real(center),
    )


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        return [f"violation: {v}" for v in self.violations] + [f"warning: {w}" for w in self.warnings]


def validate(spec: SystemSpec) -> ValidationReport:
    """Check every physical invariant of ``spec``; never raises."""
    violations: list[str] = []
    warnings: list[str] = []

    if not spec.detector.transition_frequency > 0:
        violations.append("detector.transition_frequency must be > 0")

    for name in ("electronic", "radiative"):
        res: ReservoirSpec = getattr(spec, name)
        # A radiative rate of zero is the ideal-detector reference point.
        if name == "electronic" and not res.gamma > 0:
            violations.append("electronic.gamma must be > 0")
        if name == "radiative" and not res.gamma >= 0:
            violations.append("radiative.gamma must be >= 0")
        if not res.bandwidth > 0:
            violations.append(f"{name}.bandwidth must be > 0")
        if res.mode_count < 3 or res.mode_count % 2 == 0:
            violations.append(f"{name}.mode_count must be odd and >= 3")
        if res.gamma > 0 and res.bandwidth > 0 and not res.markovian:
            warnings.append(
                f"non-Markovian: Ω/γ < {MARKOV_RATIO:g} for {name} reservoir "
                f"(Ω/γ = {res.bandwidth / res.gamma:.3g})"
            )

    if not spec.drive.coupling >= 0:
        violations.append("drive.coupling must be >= 0")
    if not math.isfinite(abs(spec.drive.alpha)):
        violations.append("drive.alpha must be finite")
    if not spec.gamma_total > 0:
        violations.append("gamma_total must be > 0")
    else:
        ratio = spec.weak_excitation_ratio
        if ratio > WEAK_EXCITATION_LIMIT:
            warnings.append(f"weak-excitation ratio {ratio:.3g} > {WEAK_EXCITATION_LIMIT:g}")

    return ValidationReport(tuple(violations), tuple(warnings))


def default_spec(
    gamma_electronic: float = 1.0,
    gamma_radiative: float = 0.0,
    detuning: float = 0.0,
    coupling: float = 0.1,
    alpha: complex = 1.0,
    bandwidth: float = 40.0,
    mode_count: int = 2001,
    transition_frequency: float = 100.0,
) -> SystemSpec:
    """Reference configuration used by the examples and the acceptance suite."""
    return SystemSpec(
        detector=DetectorSpec(transition_frequency),
        electronic=ReservoirSpec(ReservoirKind.ELECTRONIC, gamma_electronic, bandwidth, mode_count),
        radiative=ReservoirSpec(ReservoirKind.RADIATIVE, gamma_radiative, bandwidth, mode_count),
        drive=DriveSpec(complex(alpha), transition_frequency + detuning, coupling),
    )


__all__ = [
    "ConfigError",
    "DetectorSpec",
    "DriveSpec",
    "ReservoirKind",
    "ReservoirSpec",
    "SystemSpec",
    "ValidationReport",
    "default_spec",
    "validate",
]
