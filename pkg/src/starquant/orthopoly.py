"""Laguerre and Hermite polynomials and oscillator eigenfunctions."""

from __future__ import annotations

from math import comb, factorial, pi

import numpy as np


def laguerre(n: int, x):
    """L_n(x) by the three-term recurrence (n+1) L_{n+1} = (2n+1-x) L_n - n L_{n-1}."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=complex if np.iscomplexobj(x) else float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else prev.item()
    cur = 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur if cur.ndim else cur.item()


def laguerre_coefficients(n: int) -> list[float]:
    """Power-series coefficients c_m of L_n(x) = sum_m c_m x^m."""
    return [(-1) ** m * comb(n, m) / factorial(m) for m in range(n + 1)]


def hermite(n: int, x):
    """Physicists' H_n(x): H_{n+1} = 2x H_n - 2n H_{n-1}."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=complex if np.iscomplexobj(x) else float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else prev.item()
    cur = 2.0 * x
    for k in range(1, n):
        prev, cur = cur, 2.0 * x * cur - 2.0 * k * prev
    return cur if cur.ndim else cur.item()


def hermite_functions(n_max: int, x) -> np.ndarray:
    """Orthonormal h_0..h_{n_max} at x, shape (n_max+1, *x.shape).

    h_n(x) = (2^n n! sqrt(pi))^{-1/2} H_n(x) exp(-x^2/2), computed by the
    normalized recurrence so large n does not overflow.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = pi**-0.25 * np.exp(-0.5 * x**2)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, n_max):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * x * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def oscillator_wavefunctions(n_max: int, q, hbar=1.0, mass=1.0, omega=1.0) -> np.ndarray:
    """Position-space eigenfunctions psi_0..psi_{n_max} of the oscillator."""
    s = np.sqrt(mass * omega / hbar)
    return np.sqrt(s) * hermite_functions(n_max, s * np.asarray(q, dtype=float))


def oscillator_momentum_densities(n_max: int, p, hbar=1.0, mass=1.0, omega=1.0) -> np.ndarray:
    """|psi~_n(p)|^2; the momentum eigenfunctions are Hermite functions in p/sqrt(hbar m omega)."""
    s = 1.0 / np.sqrt(hbar * mass * omega)
    return s * hermite_functions(n_max, s * np.asarray(p, dtype=float)) ** 2
