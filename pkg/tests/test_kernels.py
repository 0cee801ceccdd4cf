import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadrature import f_quad, p_quad, x_quad
from vacdetect.kernels import (
    KernelArgs,
    KernelSet,
    degenerate_tolerance,
    evaluate,
    kernel_f,
    kernel_h,
    kernel_p,
    kernel_x,
    tilde_f,
    tilde_p,
)

freq = st.floats(-5.0, 5.0)
rate = st.floats(0.05, 5.0)
time = st.floats(0.0, 12.0)


def test_f_matches_quadrature_reference_point():
    args = KernelArgs(w_k=2.0, w_e=1.0, gamma=0.5, t=3.0)
    assert abs(kernel_f(args) - f_quad(2.0, 1.0, 0.5, 3.0)) < 1e-10


def test_f_resonant_long_time_modulus():
    args = KernelArgs(w_k=1.0, w_e=1.0, gamma=1.0, t=60.0)
    assert abs(kernel_f(args)) == pytest.approx(1.0, abs=1e-12)


def test_h_matches_quadrature_reference_point():
    args = KernelArgs(w_k=0.7, w_e=1.0, gamma=0.2, t=5.0, g_k=0.01)
    assert abs(kernel_h(args) - 1j * 0.01 * f_quad(0.7, 1.0, 0.2, 5.0)) < 1e-10


@pytest.mark.parametrize(
    "w_k, w_kp, w_e, gamma, g, t",
    [(1.0, 1.0, 1.0, 1.0, 0.1, 10.0), (1.3, 0.8, 1.0, 0.3, 0.05, 4.0)],
)
def test_p_matches_nested_quadrature(w_k, w_kp, w_e, gamma, g, t):
    args = KernelArgs(w_k=w_k, w_e=w_e, gamma=gamma, t=t, w_k_prime=w_kp, g_k=g, g_k_prime=g)
    assert abs(kernel_p(args) - p_quad(w_k, w_kp, w_e, gamma, g, g, t)) < 1e-9


def test_x_matches_quadrature_reference_point():
    assert abs(kernel_x(1.0, 1.0, 0.5, 1.0, 3.0) - x_quad(1.0, 1.0, 0.5, 1.0, 3.0)) < 1e-10


def test_x_at_origin_is_f():
    t = np.linspace(0, 5, 11)
    args = KernelArgs(w_k=0.4, w_e=1.1, gamma=0.7, t=t)
    np.testing.assert_allclose(kernel_x(0.4, 1.1, 0.7, 0.0, t), kernel_f(args), rtol=0, atol=1e-15)


def test_x_rejects_reversed_times():
    with pytest.raises(ValueError):
        kernel_x(1.0, 1.0, 0.5, 3.0, 1.0)
    assert kernel_x(1.0, 1.0, 0.5, 2.0, 2.0) == 0


def test_kernel_args_invariants():
    with pytest.raises(ValueError):
        KernelArgs(w_k=1.0, w_e=1.0, gamma=0.0, t=1.0)
    with pytest.raises(ValueError):
        KernelArgs(w_k=1.0, w_e=1.0, gamma=1.0, t=-1.0)
    with pytest.raises(ValueError):
        kernel_p(KernelArgs(w_k=1.0, w_e=1.0, gamma=1.0, t=1.0))


@given(freq, freq, freq, rate, st.floats(0.01, 1.0))
def test_all_kernels_vanish_at_t0(w_k, w_kp, w_e, gamma, g):
    args = KernelArgs(w_k=w_k, w_e=w_e, gamma=gamma, t=0.0, w_k_prime=w_kp, g_k=g, g_k_prime=g)
    assert kernel_f(args) == 0
    assert kernel_h(args) == 0
    assert kernel_p(args) == 0


@given(freq, freq, rate, time)
def test_f_triangle_bound(w_k, w_e, gamma, t):
    args = KernelArgs(w_k=w_k, w_e=w_e, gamma=gamma, t=t)
    assert abs(kernel_f(args)) <= -np.expm1(-gamma * t) / gamma * (1 + 1e-12) + 1e-300


@given(freq, freq, rate, time, st.floats(1e-3, 10.0))
def test_h_is_i_g_f(w_k, w_e, gamma, t, g):
    args = KernelArgs(w_k=w_k, w_e=w_e, gamma=gamma, t=t, g_k=g)
    f = kernel_f(args)
    h = kernel_h(args)
    assert abs(h - 1j * g * f) <= 1e-12 * abs(h)


@settings(max_examples=50)
@given(freq, st.floats(-1e3, 1e3).filter(lambda v: abs(v) > 1e-3), rate, st.floats(0.0, 10.0))
def test_degenerate_branch_is_continuous(w_k, w_e, gamma, t):
    tol = degenerate_tolerance(w_e, gamma)
    common = dict(w_k=w_k, w_e=w_e, gamma=gamma, t=t, g_k=0.1, g_k_prime=0.1)
    at_limit = kernel_p(KernelArgs(w_k_prime=w_k + 0.999999 * tol, **common))
    generic = kernel_p(KernelArgs(w_k_prime=w_k + 1.000001 * tol, **common))
    assert abs(at_limit - generic) <= 1e-8 * max(abs(generic), 1e-300)


def test_degenerate_limit_matches_quadrature():
    args = KernelArgs(w_k=0.9, w_e=1.0, gamma=0.4, t=6.0, w_k_prime=0.9 + 1e-12, g_k=0.2, g_k_prime=0.3)
    assert abs(kernel_p(args) - p_quad(0.9, 0.9, 1.0, 0.4, 0.2, 0.3, 6.0)) < 1e-9


def test_tilde_kernels_are_phase_wrappers():
    t = np.linspace(0, 4, 9)
    args = KernelArgs(w_k=0.3, w_e=1.0, gamma=0.5, t=t, w_k_prime=1.7, g_k=0.1, g_k_prime=0.2)
    np.testing.assert_allclose(tilde_f(args), kernel_f(args) * np.exp(0.3j * t))
    np.testing.assert_allclose(tilde_p(args), kernel_p(args) * np.exp(1.7j * t))


def test_evaluate_builds_aligned_set():
    grid = np.linspace(0, 5, 21)
    ks = evaluate(KernelArgs(w_k=1.0, w_e=1.2, gamma=0.6, t=0.0, g_k=0.1), grid)
    assert ks.f_values.shape == grid.shape
    assert ks.f_values[0] == 0 and ks.h_values[0] == 0 and ks.p_values[0] == 0
    with pytest.raises(ValueError):
        KernelSet(grid, ks.f_values[:-1], ks.h_values, ks.p_values)


def test_kernels_broadcast():
    t = np.linspace(0, 3, 7)
    w = np.linspace(-1, 1, 7)
    out = kernel_f(KernelArgs(w_k=w, w_e=0.0, gamma=1.0, t=t))
    assert out.shape == (7,)
