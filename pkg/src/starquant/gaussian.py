"""Polynomials times exp(mu * a * abar / hbar) and their exact star calculus.

All bidifferential operators used in this package have the form
``exp(hbar/2 * d^T C d)`` with a constant symmetric matrix ``C`` acting on
the stacked variables ``z = (a1, abar1, a2, abar2, ...)`` of the operands.
Acting on ``P(z) exp(z^T M z / (2 hbar))`` such an operator is a Gaussian
integral in disguise and has the closed form

    det(1 - C M)^(-1/2) exp(z^T K z / (2 hbar)) [exp(hbar/2 d^T N d) P](y)

with ``K = M (1 - C M)^-1``, ``N = C (1 - M C)^-1`` and ``y = (1 - C M)^-1 z``.
The polynomial part is a finite Wick-pairing sum.  Setting every ``a_i`` to
``a`` (and ``abar_i`` to ``abar``) afterwards gives the product.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from .errors import SingularExponentError, UnsupportedOperationError
from .poly import HOLOMORPHIC, HbarPoly, PhasePoly, PhysParams, canonical_point_to_holomorphic, convert
from .star import MOYAL, NORMAL, TransitionOp, as_scheme


class GaussianPoly:
    """``prefactor(a, abar) * exp(mu * a * abar / hbar)``, holomorphic basis.

    The prefactor may contain negative powers of hbar.  ``mu = 0`` is an
    ordinary polynomial.
    """

    __slots__ = ("prefactor", "mu")

    def __init__(self, prefactor, mu: complex = 0.0):
        if isinstance(prefactor, (int, float, complex)):
            prefactor = PhasePoly.constant(prefactor, HOLOMORPHIC)
        if prefactor.basis != HOLOMORPHIC:
            if not prefactor.is_zero():
                raise UnsupportedOperationError("GaussianPoly prefactor must be holomorphic")
            prefactor = PhasePoly.zero(HOLOMORPHIC)
        self.prefactor = prefactor
        self.mu = complex(mu)

    @classmethod
    def from_poly(cls, f: PhasePoly, params: PhysParams | None = None):
        return cls(convert(f, HOLOMORPHIC, params), 0.0)

    def __repr__(self):
        return f"GaussianPoly(({self.prefactor}) * exp(({self.mu})*a*abar/hbar))"

    # -- algebra --------------------------------------------------------------

    def _same_mu(self, other):
        if isinstance(other, PhasePoly):
            other = GaussianPoly(other, 0.0)
        if self.prefactor.is_zero():
            return other, other.mu
        if other.prefactor.is_zero():
            return other, self.mu
        if abs(self.mu - other.mu) > 1e-13 * (1 + abs(self.mu)):
            raise UnsupportedOperationError(f"cannot add Gaussians with mu={self.mu} and mu={other.mu}")
        return other, self.mu

    def __add__(self, other):
        other, mu = self._same_mu(other)
        return GaussianPoly(self.prefactor + other.prefactor, mu)

    def __sub__(self, other):
        other, mu = self._same_mu(other)
        return GaussianPoly(self.prefactor - other.prefactor, mu)

    def __neg__(self):
        return GaussianPoly(-self.prefactor, self.mu)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return GaussianPoly(self.prefactor * complex(other), self.mu)
        if isinstance(other, PhasePoly):
            return GaussianPoly(self.prefactor * other, self.mu)
        if isinstance(other, GaussianPoly):
            return GaussianPoly(self.prefactor * other.prefactor, self.mu + other.mu)
        return NotImplemented

    __rmul__ = __mul__

    def times_hbar(self, power: int):
        return GaussianPoly(self.prefactor.times_hbar(power), self.mu)

    def conj(self):
        return GaussianPoly(self.prefactor.conj(), self.mu.conjugate())

    def differentiate(self, var: str, order: int = 1) -> "GaussianPoly":
        """Exact derivative in ``a`` or ``abar``; the exponent contributes mu*other/hbar."""
        if var not in ("a", "abar"):
            raise ValueError(f"GaussianPoly depends on a and abar, not {var!r}")
        other = PhasePoly.var("abar" if var == "a" else "a").times_hbar(-1) * self.mu
        out = self.prefactor
        for _ in range(order):
            out = out.differentiate(var) + out * other
        return GaussianPoly(out, self.mu)

    def chop(self, tol=1e-14):
        return GaussianPoly(self.prefactor.chop(tol), self.mu)

    # -- comparison -----------------------------------------------------------

    def isclose(self, other, rel=1e-12, abs_tol=1e-12):
        if isinstance(other, PhasePoly):
            other = GaussianPoly(other, 0.0)
        if self.prefactor.is_zero() or other.prefactor.is_zero():
            return self.prefactor.isclose(other.prefactor, rel, abs_tol)
        if abs(self.mu - other.mu) > abs_tol + rel * max(abs(self.mu), abs(other.mu)):
            return False
        return self.prefactor.isclose(other.prefactor, rel, abs_tol)

    def coefficients_at(self, hbar_value: float) -> dict:
        """Prefactor coefficients of a^i abar^j with hbar bound to a number."""
        out = {}
        for (i, j, k), v in self.prefactor.terms.items():
            out[(i, j)] = out.get((i, j), 0j) + v * hbar_value**k
        return out

    def max_coefficient(self, hbar_value: float = 1.0) -> float:
        return max((abs(v) for v in self.coefficients_at(hbar_value).values()), default=0.0)

    # -- numerics -------------------------------------------------------------

    def evaluate(self, a, abar, hbar_value: float = 1.0):
        a = np.asarray(a)
        abar = np.asarray(abar)
        poly = self.prefactor.evaluate((a, abar), hbar_value)
        return poly * np.exp(self.mu * a * abar / hbar_value)

    def evaluate_canonical(self, q, p, params: PhysParams):
        a, abar = canonical_point_to_holomorphic(q, p, params)
        return self.evaluate(a, abar, params.hbar)

    def integrate(self) -> HbarPoly:
        """Exact (1/2 pi hbar) * integral over dq dp, as a polynomial in hbar.

        Uses (1/2 pi hbar) int a^m abar^m e^{mu a abar/hbar} dq dp
        = m! hbar^m (-mu)^-(m+1); unbalanced monomials integrate to zero.
        """
        if self.prefactor.is_zero():
            return HbarPoly()
        if not self.mu.real < 0:
            raise ValueError(f"integral diverges for mu={self.mu} (need Re mu < 0)")
        out = {}
        for (i, j, k), v in self.prefactor.terms.items():
            if i == j:
                out[k + i] = out.get(k + i, 0j) + v * factorial(i) * (-self.mu) ** (-(i + 1))
        return HbarPoly(out)


def _as_gaussian(f, params):
    if isinstance(f, GaussianPoly):
        return f
    if isinstance(f, PhasePoly):
        return GaussianPoly.from_poly(f, params)
    if isinstance(f, (int, float, complex)):
        return GaussianPoly(f, 0.0)
    raise UnsupportedOperationError(f"expected PhasePoly or GaussianPoly, got {type(f).__name__}")


# -- the engine -------------------------------------------------------------------


def _apply_quadratic_operator(poly: dict, N: np.ndarray) -> dict:
    """exp(hbar/2 d^T N d) on {(exponents, k): coeff}; finite series."""
    d = N.shape[0]
    ops = []
    for i in range(d):
        if N[i, i] != 0:
            ops.append((i, i, 0.5 * N[i, i]))
        for l in range(i + 1, d):
            if N[i, l] != 0:
                ops.append((i, l, N[i, l]))
    result = dict(poly)
    term = poly
    r = 0
    while term and ops:
        r += 1
        nxt = {}
        for (e, k), v in term.items():
            for i, l, c in ops:
                if i == l:
                    if e[i] < 2:
                        continue
                    w = v * c * e[i] * (e[i] - 1)
                    ne = list(e)
                    ne[i] -= 2
                else:
                    if e[i] == 0 or e[l] == 0:
                        continue
                    w = v * c * e[i] * e[l]
                    ne = list(e)
                    ne[i] -= 1
                    ne[l] -= 1
                key = (tuple(ne), k + 1)
                nxt[key] = nxt.get(key, 0j) + w / r
        term = {key: v for key, v in nxt.items() if v != 0}
        for key, v in term.items():
            result[key] = result.get(key, 0j) + v
    return result


def _linear_powers(row, nmax):
    """Powers 0..nmax of (row[0] a + row[1] abar) as PhasePolys."""
    lin = PhasePoly({(1, 0, 0): row[0], (0, 1, 0): row[1]}, HOLOMORPHIC)
    out = [PhasePoly.constant(1, HOLOMORPHIC)]
    for _ in range(nmax):
        out.append(out[-1] * lin)
    return out


def gaussian_bidifferential(factors, C: np.ndarray) -> GaussianPoly:
    """Apply exp(hbar/2 d^T C d) to the product of ``factors`` (each in its
    own copy of (a, abar)) and identify all copies.
    """
    F = len(factors)
    d = 2 * F
    C = np.asarray(C, dtype=complex)
    M = np.zeros((d, d), dtype=complex)
    for n, f in enumerate(factors):
        M[2 * n, 2 * n + 1] = M[2 * n + 1, 2 * n] = f.mu
    eye = np.eye(d)
    X = eye - C @ M
    eig = np.linalg.eigvals(X)
    if np.min(np.abs(eig)) < 1e-12:
        raise SingularExponentError(
            f"singular Gaussian composition for mu={[f.mu for f in factors]}", [f.mu for f in factors]
        )
    # LU-based det/solve are exact for the dyadic matrices that occur in
    # practice; the eigenvalues only select the branch of the square root
    branch = complex(np.prod(np.sqrt(eig)))
    root = np.sqrt(complex(np.linalg.det(X)))
    if abs(root - branch) > abs(root + branch):
        root = -root
    det_factor = 1.0 / root
    Xinv = np.linalg.solve(X, eye)
    K = M @ Xinv
    N = C @ np.linalg.solve(eye - M @ C, eye)
    R = np.zeros((d, 2))
    R[0::2, 0] = 1.0
    R[1::2, 1] = 1.0
    Q2 = 0.5 * R.T @ K @ R
    scale = 1.0 + np.max(np.abs(Q2))
    if abs(Q2[0, 0]) > 1e-12 * scale or abs(Q2[1, 1]) > 1e-12 * scale:
        raise UnsupportedOperationError("result leaves the exp(mu a abar/hbar) class")
    mu_new = complex(2 * Q2[0, 1])
    Y = Xinv @ R
    Y[np.abs(Y) < 1e-15 * np.max(np.abs(Y))] = 0.0
    N[np.abs(N) < 1e-15 * (1 + np.max(np.abs(N)))] = 0.0

    # product of prefactors in the stacked variables
    poly = {((), 0): 1 + 0j}
    for f in factors:
        nxt = {}
        for (e, k), v in poly.items():
            for (i, j, kk), w in f.prefactor.terms.items():
                key = (e + (i, j), k + kk)
                nxt[key] = nxt.get(key, 0j) + v * w
        poly = nxt
    poly = _apply_quadratic_operator(poly, N)

    maxdeg = [0] * d
    for e, _ in poly:
        for n in range(d):
            maxdeg[n] = max(maxdeg[n], e[n])
    powers = [_linear_powers(Y[n], maxdeg[n]) for n in range(d)]
    out = {}
    for (e, k), v in poly.items():
        if v == 0:
            continue
        term = PhasePoly.constant(v * det_factor, HOLOMORPHIC)
        for n in range(d):
            if e[n]:
                term = term * powers[n][e[n]]
        for (i, j, kk), w in term.terms.items():
            key = (i, j, kk + k)
            out[key] = out.get(key, 0j) + w
    return GaussianPoly(PhasePoly(out, HOLOMORPHIC), mu_new)


_STAR_C = {
    MOYAL: np.array([[0, 0, 0, 0.5], [0, 0, -0.5, 0], [0, -0.5, 0, 0], [0.5, 0, 0, 0]]),
    NORMAL: np.array([[0, 0, 0, 1.0], [0, 0, 0, 0], [0, 0, 0, 0], [1.0, 0, 0, 0]]),
}


def gaussian_star(f, g, scheme=MOYAL, params: PhysParams | None = None) -> GaussianPoly:
    """Exact star product of Gaussian-times-polynomial functions.

    Raises SingularExponentError when the completed square degenerates
    (Moyal: mu_f * mu_g = -4).
    """
    scheme = as_scheme(scheme)
    if scheme not in _STAR_C:
        raise UnsupportedOperationError(f"{scheme} product is not available on GaussianPoly")
    f = _as_gaussian(f, params)
    g = _as_gaussian(g, params)
    if f.prefactor.is_zero() or g.prefactor.is_zero():
        return GaussianPoly(PhasePoly.zero(HOLOMORPHIC), f.mu + g.mu)
    return gaussian_bidifferential([f, g], _STAR_C[scheme])


def gaussian_transition(T: TransitionOp, f) -> GaussianPoly:
    """exp(c hbar d_a d_abar) on a GaussianPoly (normal<->Moyal only)."""
    if T.basis != HOLOMORPHIC:
        raise UnsupportedOperationError(f"{T.kind} transition is not available on GaussianPoly")
    f = _as_gaussian(f, None)
    c = T.coefficient
    return gaussian_bidifferential([f], np.array([[0, c], [c, 0]]))
