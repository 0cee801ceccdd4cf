"""Independent adaptive-quadrature evaluations of the kernel integrals."""

import numpy as np
from scipy import integrate

OPTS = dict(epsabs=1e-13, epsrel=1e-11, limit=400)


def cquad(fun, a, b):
    re, _ = integrate.quad(lambda s: fun(s).real, a, b, **OPTS)
    im, _ = integrate.quad(lambda s: fun(s).imag, a, b, **OPTS)
    return re + 1j * im


def f_quad(w_k, w_e, gamma, t):
    """int_0^t exp(-i w_k s) exp(-(i w_e + gamma)(t - s)) ds"""
    return cquad(lambda s: np.exp(-1j * w_k * s - (1j * w_e + gamma) * (t - s)), 0.0, t)


def h_quad(w_k, w_e, gamma, g, t):
    """h solves dh/dt = -(i w_e + gamma) h ... written as i g times the f integral."""
    return 1j * g * f_quad(w_k, w_e, gamma, t)


def p_quad(w_k, w_kp, w_e, gamma, g, gp, t):
    """g g' int_0^t exp(-i w_k (t - s)) f_k'(s) ds with f_k' itself by quadrature."""
    inner = lambda s: f_quad(w_kp, w_e, gamma, s)  # noqa: E731
    return g * gp * cquad(lambda s: np.exp(-1j * w_k * (t - s)) * inner(s), 0.0, t)


def x_quad(w_k, w_e, gamma, t1, t2):
    """int_{t1}^{t2} exp(-i w_k s) exp(-(i w_e + gamma)(t2 - s)) ds"""
    return cquad(lambda s: np.exp(-1j * w_k * s - (1j * w_e + gamma) * (t2 - s)), t1, t2)
