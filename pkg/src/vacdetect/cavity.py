"""Bad-cavity design calculator: branching ratio and efficiency versus kappa."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .analytic import quantum_efficiency

BAD_CAVITY_RATIO = 10.0


@dataclass(frozen=True)
class CavityConfig:
    g_ke: float
    kappa: float
    gamma_1: float
    other_loss_ratios: tuple[float, ...] = field(default_factory=tuple)

    @property
    def bad_cavity(self) -> bool:
        return self.kappa >= BAD_CAVITY_RATIO * self.g_ke


@dataclass(frozen=True)
class KappaRow:
    kappa: float
    xi: float
    efficiency: float
    shot_noise_ratio: float


def xi_bad_cavity(cfg: CavityConfig) -> float:
    """Total branching ratio g^2/(kappa gamma_1) plus any extra loss ratios."""
    if not cfg.kappa > 0:
        raise ValueError("kappa must be > 0")
    if not cfg.gamma_1 > 0:
        raise ValueError("gamma_1 must be > 0")
    if not cfg.bad_cavity:
        warnings.warn(
            f"kappa = {cfg.kappa:g} < {BAD_CAVITY_RATIO:g} g = {BAD_CAVITY_RATIO * cfg.g_ke:g}: "
            "outside the bad-cavity limit",
            stacklevel=2,
        )
    return cfg.g_ke**2 / (cfg.kappa * cfg.gamma_1) + math.fsum(cfg.other_loss_ratios)


def efficiency_vs_kappa(
    cfg: CavityConfig,
    kappa_grid,
    bandwidth: float,
    reference_current: float = 0.0,
) -> list[KappaRow]:
    """Sweep kappa at fixed coupling, gamma_1 and extra losses.

    ``bandwidth`` is the electronic reservoir half-width.  The shot-noise ratio
    is variance/mean = Ω/π + gamma_1/2 - <i>/2, where <i> is the resonant
    current ``efficiency * reference_current`` (pass the normally ordered
    current; the default 0 drops the O(g_L^4) correction).
    """
    rows = []
    for kappa in np.asarray(kappa_grid, float):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            xi = xi_bad_cavity(CavityConfig(cfg.g_ke, float(kappa), cfg.gamma_1, cfg.other_loss_ratios))
        eff = quantum_efficiency(xi)
        ratio = bandwidth / math.pi + 0.5 * cfg.gamma_1 - 0.5 * eff * reference_current
        rows.append(KappaRow(float(kappa), xi, eff, ratio))
    return rows
