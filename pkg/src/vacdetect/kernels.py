"""Closed-form kernel functions of the linear Heisenberg solutions.

With ``a = gamma + i (w_e - w_k)`` the kernels are

    f_k(t)       = (exp(-i w_k t) - exp(-(i w_e + gamma) t)) / a
    h_k(t)       = i g_k f_k(t)
    p_kk'(t)     = g_k g_k' (D_kk'(t) - f_k(t)) / a'
    x_k(t1, t2)  = exp(-i w_k t1) f_k(t2 - t1)

where ``D_kk'(t) = int_0^t exp(-i w_k' s - i w_k (t - s)) ds``.  D has a
removable singularity at ``w_k == w_k'`` that is evaluated by its limit.
All functions broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEGENERATE_RTOL = 1e-8


@dataclass(frozen=True)
class KernelArgs:
    w_k: float
    w_e: float
    gamma: float
    t: float | np.ndarray
    w_k_prime: float | None = None
    g_k: float = 0.0
    g_k_prime: float = 0.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if np.any(np.asarray(self.t) < 0):
            raise ValueError("kernel times must be >= 0")


@dataclass(frozen=True)
class KernelSet:
    """Kernel values aligned to a time grid."""

    time_grid: np.ndarray
    f_values: np.ndarray
    h_values: np.ndarray
    p_values: np.ndarray

    def __post_init__(self):
        n = np.shape(self.time_grid)[0]
        for name in ("f_values", "h_values", "p_values"):
            if np.shape(getattr(self, name))[0] != n:
                raise ValueError(f"{name} is not aligned to the time grid")


def _f(w_k, w_e, gamma, t):
    a = gamma + 1j * (w_e - w_k)
    # exp(-i w_k t) (1 - exp(-a t)) / a; expm1 avoids cancellation at small t.
    return -np.exp(-1j * w_k * t) * np.expm1(-a * t) / a


def _beat(w_k, w_kp, t, tol):
    """int_0^t exp(-i w_kp s - i w_k (t - s)) ds, stable near w_k == w_kp."""
    w_k, w_kp, t = np.broadcast_arrays(np.asarray(w_k, float), np.asarray(w_kp, float), np.asarray(t, float))
    delta = w_kp - w_k
    base = np.exp(-1j * w_k * t)
    out = np.empty(t.shape, dtype=complex)
    near = np.abs(delta) < tol
    # Limit branch: t e^{-i w_k t} (1 - i delta t / 2) to first order.
    out[near] = t[near] * base[near] * (1.0 - 0.5j * delta[near] * t[near])
    far = ~near
    z = -1j * delta[far]
    out[far] = base[far] * np.expm1(z * t[far]) / z
    return out


def degenerate_tolerance(w_e: float, gamma: float) -> float:
    return DEGENERATE_RTOL * max(gamma, abs(w_e))


def kernel_f(args: KernelArgs):
    """Langevin-noise kernel f_k(t)."""
    return _f(args.w_k, args.w_e, args.gamma, np.asarray(args.t, float))


def kernel_h(args: KernelArgs):
    return 1j * args.g_k * kernel_f(args)


def kernel_p(args: KernelArgs):
    """Source-field kernel p_kk'(t): back-action of mode k' on mode k."""
    if args.w_k_prime is None:
        raise ValueError("kernel_p needs w_k_prime")
    t = np.asarray(args.t, float)
    a_prime = args.gamma + 1j * (args.w_e - args.w_k_prime)
    tol = degenerate_tolerance(args.w_e, args.gamma)
    beat = _beat(args.w_k, args.w_k_prime, t, tol)
    inner = _f(args.w_k, args.w_e, args.gamma, t)
    return args.g_k * args.g_k_prime * (beat - inner) / a_prime


def kernel_x(w_k: float, w_e: float, gamma: float, t1, t2):
    t1 = np.asarray(t1, float)
    t2 = np.asarray(t2, float)
    if np.any(t2 < t1):
        raise ValueError("kernel_x needs t2 >= t1; order the times first")
    if np.any(t1 < 0):
        raise ValueError("kernel times must be >= 0")
    return np.exp(-1j * w_k * t1) * _f(w_k, w_e, gamma, t2 - t1)


def tilde_f(args: KernelArgs):
    return kernel_f(args) * np.exp(1j * args.w_k * np.asarray(args.t, float))


def tilde_p(args: KernelArgs):
    return kernel_p(args) * np.exp(1j * args.w_k_prime * np.asarray(args.t, float))


def evaluate(args: KernelArgs, time_grid) -> KernelSet:
    """Evaluate f, h and p for fixed frequencies on ``time_grid``."""
    grid = np.asarray(time_grid, float)
    at = KernelArgs(
        w_k=args.w_k,
        w_e=args.w_e,
        gamma=args.gamma,
        t=grid,
        w_k_prime=args.w_k if args.w_k_prime is None else args.w_k_prime,
        g_k=args.g_k,
        g_k_prime=args.g_k if args.w_k_prime is None else args.g_k_prime,
    )
    return KernelSet(grid, kernel_f(at), kernel_h(at), kernel_p(at))
