"""Oscillator propagators: Mehler kernel, eigenfunction sums, sliced path integrals."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import ConvergenceError, QuadratureOrderError, SingularityError
from .orthopoly import hermite, laguerre, oscillator_wavefunctions
from .poly import PhysParams


@dataclass(frozen=True)
class GaussianKernel:
    """K(q2, q1) = n0 * exp(A q2^2 + B q1 q2 + C q1^2)."""

    A: complex
    B: complex
    C: complex
    n0: complex

    def __call__(self, q2, q1):
        q1 = np.asarray(q1)
        q2 = np.asarray(q2)
        return self.n0 * np.exp(self.A * q2**2 + self.B * q1 * q2 + self.C * q1**2)

    def coefficients(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "N0": self.n0}

    def rel_diff(self, other: "GaussianKernel") -> float:
        """Largest relative coefficient difference."""
        mine = np.array([self.A, self.B, self.C, self.n0])
        theirs = np.array([other.A, other.B, other.C, other.n0])
        return float(np.max(np.abs(mine - theirs) / np.abs(theirs)))


def _sqrt_branch(z):
    """Principal square root; short-time kernels stay on it."""
    return np.sqrt(complex(z))


def _sqrt_sin(z):
    """sqrt(sin z) continued from small positive z along Im z <= 0.

    sin z = e^{iz}(1 - e^{-2iz})/2i and |e^{-2iz}| <= 1 there, so the
    principal root of the second factor is analytic and the branch picks
    up the Maslov phase e^{-i pi/2} at each caustic crossed.
    """
    z = complex(z)
    return np.exp(0.5j * z) * np.sqrt(1 - np.exp(-2j * z)) / np.sqrt(2j)


def mehler_kernel(t, params: PhysParams | None = None) -> GaussianKernel:
    """<q2| exp(-i H t/hbar) |q1> for the oscillator in closed form.

    sqrt(m w / (2 pi i hbar sin wt)) exp{ i m w [(q1^2 + q2^2) cos wt - 2 q1 q2] / (2 hbar sin wt) }

    t may be complex with Im t <= 0; beyond the first caustic the
    prefactor carries the continued phase.
    """
    params = params or PhysParams()
    hb, m, w = params.hbar, params.mass, params.omega
    s = np.sin(w * t)
    if abs(s) < 1e-12:
        raise SingularityError(f"Mehler kernel has a caustic at omega*t = {w * t:g}")
    c = np.cos(w * t)
    A = 1j * m * w * c / (2 * hb * s)
    B = -1j * m * w / (hb * s)
    n0 = np.sqrt(m * w / (2j * np.pi * hb)) / _sqrt_sin(w * t)
    return GaussianKernel(complex(A), complex(B), complex(A), complex(n0))


def compose(second: GaussianKernel, first: GaussianKernel) -> GaussianKernel:
    """(second o first)(q2, q0) = integral second(q2, q1) first(q1, q0) dq1."""
    alpha = -(first.A + second.C)
    if alpha == 0 or alpha.real < -1e-12 * abs(alpha):
        raise ConvergenceError("intermediate Gaussian is not integrable", {"alpha": alpha})
    A = second.A + second.B**2 / (4 * alpha)
    B = first.B * second.B / (2 * alpha)
    C = first.C + first.B**2 / (4 * alpha)
    n0 = first.n0 * second.n0 * np.sqrt(np.pi / alpha)
    return GaussianKernel(complex(A), complex(B), complex(C), complex(n0))


def short_time_kernel(dt, params: PhysParams | None = None, potential: bool = True, rule: str = "trapezoid") -> GaussianKernel:
    """sqrt(m/2 pi i hbar dt) exp[i m (q'-q)^2/2 hbar dt - i dt Vbar/hbar].

    ``rule="trapezoid"`` uses Vbar = (V(q) + V(q'))/2, the kernel of the
    symmetric splitting e^{-iV dt/2} e^{-iT dt} e^{-iV dt/2}; every
    coefficient of the composed kernel then converges at second order.
    ``rule="midpoint"`` uses Vbar = V((q + q')/2); its exponent converges at
    second order but its normalization only at first order.
    """
    params = params or PhysParams()
    hb, m, w = params.hbar, params.mass, params.omega
    k = m * w**2 if potential else 0.0
    A = 1j * m / (2 * hb * dt)
    B = -1j * m / (hb * dt)
    if rule == "trapezoid":
        A = A - 1j * dt * k / (4 * hb)
    elif rule == "midpoint":
        A = A - 1j * dt * k / (8 * hb)
        B = B - 1j * dt * k / (4 * hb)
    else:
        raise ValueError(f"unknown slice rule {rule!r}")
    n0 = _sqrt_branch(m / (2j * np.pi * hb * dt))
    return GaussianKernel(complex(A), complex(B), complex(A), n0)


def slice_compose(t, n_slices: int, params: PhysParams | None = None, potential: bool = True, rule: str = "trapezoid") -> GaussianKernel:
    """Compose n_slices short-time kernels by exact Gaussian integration.

    Composition uses repeated squaring when n_slices is a power of two and a
    left fold otherwise.
    """
    if n_slices < 2:
        raise ValueError("need at least two slices")
    params = params or PhysParams()
    if abs(np.sin(params.omega * t)) < 1e-12:
        raise SingularityError(f"t = {t:g} sits on a caustic")
    step = short_time_kernel(t / n_slices, params, potential, rule)
    if n_slices & (n_slices - 1) == 0:
        K = step
        n = 1
        while n < n_slices:
            K = compose(K, K)
            n *= 2
        return K
    K = step
    for _ in range(n_slices - 1):
        K = compose(step, K)
    return K


def convergence_order(t, slices=(64, 128, 256, 512), params: PhysParams | None = None, rule: str = "trapezoid") -> tuple[float, list]:
    """Log-log slope of the coefficient error against the Mehler kernel."""
    exact = mehler_kernel(t, params)
    errs = [slice_compose(t, n, params, rule=rule).rel_diff(exact) for n in slices]
    slope = -np.polyfit(np.log(slices), np.log(errs), 1)[0]
    return float(slope), errs


def eigenfunction_kernel(t, n_max: int, q1, q2, params: PhysParams | None = None, tol: float | None = None) -> complex:
    """Partial sum of psi_n(q2) psi_n(q1) exp(-i E_n t/hbar) for n <= n_max.

    A negative imaginary part of t damps the terms.  When ``tol`` is given,
    the size of the last few terms serves as a tail estimate and a
    ConvergenceError is raised if it exceeds tol.
    """
    params = params or PhysParams()
    hb, m, w = params.hbar, params.mass, params.omega
    psi1 = oscillator_wavefunctions(n_max, np.array([q1], dtype=float), hb, m, w)[:, 0]
    psi2 = oscillator_wavefunctions(n_max, np.array([q2], dtype=float), hb, m, w)[:, 0]
    n = np.arange(n_max + 1)
    terms = psi2 * psi1 * np.exp(-1j * (n + 0.5) * w * t)
    total = complex(terms.sum())
    if tol is not None:
        tail = float(np.max(np.abs(terms[-4:]))) * (1 / (1 - min(np.exp(w * np.imag(t)), 0.999)))
        if tail > tol:
            raise ConvergenceError(
                f"eigenfunction sum not converged at n_max={n_max} (tail ~ {tail:.2g})",
                {"tail": tail, "n_max": n_max, "value": total},
            )
    return total


def kernel_to_phase(t, q, p, params: PhysParams | None = None) -> complex:
    """Integral of <q + xi/2| e^{-iHt/hbar} |q - xi/2> e^{-i xi p/hbar} d xi.

    With the Mehler kernel the integrand is exp(-alpha xi^2 + beta xi + gamma),
    so the integral is n0 sqrt(pi/alpha) exp(beta^2/4 alpha + gamma).
    """
    params = params or PhysParams()
    hb, w = params.hbar, params.omega
    if abs(np.cos(w * t / 2)) < 1e-12:
        raise SingularityError(f"star exponential is singular at omega*t = {w * t:g}")
    K = mehler_kernel(t, params)
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    # q2 = q + xi/2, q1 = q - xi/2
    alpha = -(K.A - K.B + K.C) / 4
    beta = (K.A - K.C) * q - 1j * p / hb
    gamma = (K.A + K.B + K.C) * q**2
    return K.n0 * np.sqrt(np.pi / alpha) * np.exp(beta**2 / (4 * alpha) + gamma)


def hermite_laguerre_scale(n: int) -> float:
    """2^n sqrt(pi) n!, the natural size of both sides of the identity."""
    return 2**n * np.sqrt(np.pi) * factorial(n)


def hermite_laguerre_check(n: int, a: float, b: float, nodes: int = 80) -> tuple[complex, float]:
    """Both sides of the Hermite-Laguerre identity.

    lhs = integral H_n(x - a) H_n(x + a) e^{-x^2} e^{-2ibx} dx   (Gauss-Hermite)
    rhs = 2^n sqrt(pi) n! e^{-b^2} L_n(2(a^2 + b^2))

    The right side vanishes at Laguerre roots, so compare differences
    against ``hermite_laguerre_scale(n)``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > 12:
        raise QuadratureOrderError("n > 12 is outside the conditioned range")
    # the oscillatory factor needs nodes well beyond the polynomial degree
    need = n + int(np.ceil(4 * abs(b) ** 2 + 12 * abs(b))) + 30
    if nodes < need:
        raise QuadratureOrderError(f"{nodes} nodes are too few for n={n}, b={b} (need >= {need})")
    x, wts = np.polynomial.hermite.hermgauss(nodes)
    lhs = complex(np.sum(wts * hermite(n, x - a) * hermite(n, x + a) * np.exp(-2j * b * x)))
    rhs = hermite_laguerre_scale(n) * np.exp(-b * b) * laguerre(n, 2 * (a * a + b * b))
    return lhs, float(rhs)
