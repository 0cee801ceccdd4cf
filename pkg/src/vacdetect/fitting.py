"""Small curve-fitting helpers shared by the oracle, the CLI and the tests."""

from __future__ import annotations

import numpy as np


def fit_decay_rate(times, values) -> float:
    """Least-squares rate ``r`` of ``|values| ~ C exp(-r t)``."""
    times = np.asarray(times, float)
    mags = np.abs(np.asarray(values))
    if times.size < 2:
        raise ValueError("need at least two samples to fit a decay rate")
    if np.any(mags <= 0) or not np.all(np.isfinite(mags)):
        raise ValueError("decay fit needs strictly positive finite magnitudes")
    slope, _ = np.polyfit(times, np.log(mags), 1)
    return float(-slope)


def linear_fit(x, y) -> tuple[float, float, float]:
    """Return (slope, intercept, R^2) of an ordinary least-squares line."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / total if total > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def lorentzian_half_width(detunings, currents) -> float:
    """Half-width at half-maximum of a symmetric Lorentzian scan.

    Fits ``1/current`` as a quadratic in detuning, which is exact for
    ``current = A / (w^2 + delta^2)``: the half-width is sqrt(c0 / c2).
    """
    x = np.asarray(detunings, float)
    y = 1.0 / np.asarray(currents, float)
    c2, c1, c0 = np.polyfit(x, y, 2)
    floor = c0 - c1**2 / (4 * c2)
    if c2 <= 0 or floor <= 0:
        raise ValueError("scan is not Lorentzian-shaped")
    return float(np.sqrt(floor / c2))
