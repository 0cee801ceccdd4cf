"""Photodetection with vacuum-mode back-action: closed forms and a discretised-reservoir oracle."""

from .analytic import (
    correlation_stationary,
    current_variance,
    mean_current_steady,
    mean_current_transient,
    quantum_efficiency,
    variance_summary,
)
from .cavity import CavityConfig, efficiency_vs_kappa, xi_bad_cavity
from .model import ConfigError, DetectorSpec, DriveSpec, ReservoirKind, ReservoirSpec, SystemSpec, default_spec, validate
from .oracle import OracleSettings, build_discretized, extract_kernels, propagate

__version__ = "0.1.0"

__all__ = [
    "CavityConfig",
    "ConfigError",
    "DetectorSpec",
    "DriveSpec",
    "OracleSettings",
    "ReservoirKind",
    "ReservoirSpec",
    "SystemSpec",
    "build_discretized",
    "correlation_stationary",
    "current_variance",
    "default_spec",
    "efficiency_vs_kappa",
    "extract_kernels",
    "mean_current_steady",
    "mean_current_transient",
    "propagate",
    "quantum_efficiency",
    "validate",
    "variance_summary",
    "xi_bad_cavity",
]
