"""Acceptance criteria 1-9, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line; the lines are also
collected into the pytest terminal summary.  Run standalone with
``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from functools import lru_cache

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, observables, transfer
from quadrature import f_quad, p_quad, x_quad
from vacdetect import analytic, oracle
from vacdetect.fitting import linear_fit, lorentzian_half_width
from vacdetect.kernels import KernelArgs, kernel_f, kernel_h, kernel_p, kernel_x
from vacdetect.model import default_spec

GAMMA_2 = (0.0, 0.5, 1.0)
DETUNINGS = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
REFINED = 4001


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def rel(a, b):
    return abs(a / b - 1.0)


@lru_cache(maxsize=None)
def steady_current(gamma_radiative, detuning, mode_count=None):
    return observables(correlation=False, mode_count=mode_count, gamma_radiative=gamma_radiative, detuning=detuning).mean_current


def test_criterion_1_steady_current_equivalence():
    start = time.perf_counter()
    worst, where = 0.0, None
    for g2 in GAMMA_2:
        for d in DETUNINGS:
            target = analytic.mean_current_steady(default_spec(gamma_radiative=g2, detuning=d)).mean_current
            err = rel(steady_current(g2, d), target)
            if err > worst:
                worst, where = err, (g2, d)
    elapsed = time.perf_counter() - start
    ok = worst <= 0.02 and elapsed < 300
    report(1, ok, f"max rel error {worst:.4f} at (gamma_2, detuning)={where} (tol 0.02), {elapsed:.0f} s for 21 runs (limit 300 s)")
    assert ok


def test_criterion_2_quantum_efficiency_ratio():
    ratio = steady_current(1.0, 0.0) / steady_current(0.0, 0.0)
    ok = rel(ratio, 0.25) <= 0.02
    report(2, ok, f"I(xi=1)/I(xi=0) = {ratio:.5f} vs 0.25 (tol 2%)")
    assert ok


def half_width(gamma_radiative, mode_count=None):
    currents = [steady_current(gamma_radiative, d, mode_count) for d in DETUNINGS]
    return lorentzian_half_width(DETUNINGS, currents)


def test_criterion_3_lorentzian_linewidth():
    errs = {g2: rel(half_width(g2), 1.0 + g2) for g2 in GAMMA_2}
    ok = max(errs.values()) <= 0.05
    detail = ", ".join(f"gamma_2={g2}: {half_width(g2):.4f} (err {e:.4f})" for g2, e in errs.items())
    report(3, ok, f"half-width vs gamma_1+gamma_2 {detail} (tol 5%)")
    assert ok


def test_criterion_4_shot_noise_bandwidth_law():
    omegas = np.array([20.0, 40.0, 80.0])
    ratios = np.array([observables(correlation=False, bandwidth=w).variance_ratio for w in omegas])
    targets = omegas / math.pi + 0.5
    errs = np.abs(ratios / targets - 1)
    _, _, r2 = linear_fit(omegas, ratios)
    ok = bool(np.all(errs <= 0.05) and r2 >= 0.999)
    report(4, ok, f"variance/mean {np.round(ratios, 4).tolist()} vs {np.round(targets, 4).tolist()}, max err {errs.max():.4f} (tol 5%), R^2 {r2:.6f} (min 0.999)")
    assert ok


@pytest.mark.parametrize("g1, g2", [(1.0, 0.0), (0.5, 0.5)])
def test_criterion_5_correlation_decay(g1, g2):
    obs = observables(gamma_electronic=g1, gamma_radiative=g2)
    gamma = g1 + g2
    head_target = 0.01 * g1**2 / gamma**2
    rate_err = rel(obs.correlation_rate, gamma)
    head_err = rel(abs(obs.correlation_head), head_target)
    ok = rate_err <= 0.05 and head_err <= 0.05
    report(
        5,
        ok,
        f"(gamma_1={g1}, gamma_2={g2}) fitted rate {obs.correlation_rate:.4f} vs {gamma} (err {rate_err:.4f}), "
        f"|smooth(0+)| {abs(obs.correlation_head):.6f} vs {head_target:.6f} (err {head_err:.4f}) (tol 5%)",
    )
    assert ok


def test_criterion_6_kernel_fidelity():
    rng = np.random.default_rng(20240611)
    worst = {"f": 0.0, "h": 0.0, "p": 0.0, "x": 0.0}
    identity = 0.0
    for _ in range(100):
        w_k, w_kp, w_e = rng.uniform(-3, 3, 3)
        if rng.random() < 0.2:
            w_kp = w_k  # exercise the degenerate branch
        gamma = rng.uniform(0.1, 2.0)
        g, gp = rng.uniform(0.01, 1.0, 2)
        t = rng.uniform(0.0, 10.0)
        t1 = rng.uniform(0.0, t)
        args = KernelArgs(w_k=w_k, w_e=w_e, gamma=gamma, t=t, w_k_prime=w_kp, g_k=g, g_k_prime=gp)
        fq = f_quad(w_k, w_e, gamma, t)
        worst["f"] = max(worst["f"], abs(kernel_f(args) - fq))
        worst["h"] = max(worst["h"], abs(kernel_h(args) - 1j * g * fq))
        worst["p"] = max(worst["p"], abs(kernel_p(args) - p_quad(w_k, w_kp, w_e, gamma, g, gp, t)))
        worst["x"] = max(worst["x"], abs(kernel_x(w_k, w_e, gamma, t1, t) - x_quad(w_k, w_e, gamma, t1, t)))
        h = kernel_h(args)
        if h != 0:
            identity = max(identity, abs(h - 1j * g * kernel_f(args)) / abs(h))
    ok = max(worst.values()) <= 1e-9 and identity <= 1e-12
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items())
    report(6, ok, f"max |closed - quadrature| over 100 points: {detail} (tol 1e-9); h = i g f rel {identity:.1e} (tol 1e-12)")
    assert ok


def test_criterion_7_vacuum_silence():
    spec = default_spec(alpha=0)
    tau = np.linspace(0, 5, 11)
    a_mean = analytic.mean_current_steady(spec).mean_current
    a_trace = analytic.mean_current_transient(spec, tau)
    a_var = analytic.current_variance(spec)
    a_corr = analytic.correlation_stationary(spec, tau).values
    analytic_zero = a_mean == 0 and not np.any(a_trace) and a_var == 0 and not np.any(a_corr)

    system, U = transfer(alpha=0)
    o_mean = np.max(np.abs(oracle.oracle_mean_current_trace(U, system)))
    o_var = np.max(np.abs(oracle.oracle_variance(U, system, U.time_grid)))
    o_corr = np.max(np.abs(oracle.oracle_correlation(U, system, 10.0, 10.0 + tau).total))
    worst = max(o_mean, o_var, o_corr)
    ok = analytic_zero and worst < 1e-12
    report(7, ok, f"analytic exactly zero: {analytic_zero}; oracle max |mean|, |var|, |corr| = {o_mean:.1e}, {o_var:.1e}, {o_corr:.1e} (tol 1e-12)")
    assert ok


def test_criterion_8_unitarity_and_convergence():
    drifts = [transfer()[1].unitarity_drift, transfer(gamma_radiative=1.0)[1].unitarity_drift]
    for n in (None, REFINED):
        drifts.append(observables(mode_count=n).unitarity_drift)
    shifts = {}
    for g2 in (0.0, 1.0):
        for d in (0.0, 2.0):
            shifts[f"mean_current(gamma_2={g2}, detuning={d})"] = (
                rel(steady_current(g2, d), steady_current(g2, d, REFINED)),
                0.01,
            )
    eff = steady_current(1.0, 0.0) / steady_current(0.0, 0.0)
    eff_fine = steady_current(1.0, 0.0, REFINED) / steady_current(0.0, 0.0, REFINED)
    shifts["efficiency_ratio"] = (rel(eff, eff_fine), 0.01)
    shifts["half_width(gamma_2=0)"] = (rel(half_width(0.0), half_width(0.0, REFINED)), 0.025)
    coarse, fine = observables(), observables(mode_count=REFINED)
    drifts.append(fine.unitarity_drift)
    shifts["variance_ratio"] = (rel(coarse.variance_ratio, fine.variance_ratio), 0.025)
    shifts["correlation_rate"] = (rel(coarse.correlation_rate, fine.correlation_rate), 0.025)
    shifts["correlation_head"] = (rel(abs(coarse.correlation_head), abs(fine.correlation_head)), 0.025)
    worst_name = max(shifts, key=lambda k: shifts[k][0] / shifts[k][1])
    ok = max(drifts) <= 1e-9 and all(s <= lim for s, lim in shifts.values())
    report(
        8,
        ok,
        f"max unitarity drift {max(drifts):.1e} (tol 1e-9); N=2001 vs {REFINED}: largest shift/limit "
        f"{worst_name} {shifts[worst_name][0]:.2e}/{shifts[worst_name][1]} over {len(shifts)} observables",
    )
    assert ok


def test_criterion_9_approximation_boundary():
    spec = default_spec(bandwidth=2.0)
    current = observables(correlation=False, bandwidth=2.0).mean_current
    dev = rel(current, analytic.mean_current_steady(spec).mean_current)
    ok = dev > 0.02
    report(9, ok, f"Omega/gamma = 2: oracle deviates from the Markov current by {dev:.4f} (must exceed 0.02)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s", "-p", "no:cacheprovider"]))
