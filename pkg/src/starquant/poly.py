"""Exact sparse polynomials on a two-dimensional phase space.

A :class:`PhasePoly` is a finite sum of terms ``c * x^i * y^j * hbar^k`` where
``(x, y)`` is either the canonical pair ``(q, p)`` or the holomorphic pair
``(a, abar)``.  Planck's constant stays a formal symbol; it is bound to a
number only in :meth:`PhasePoly.evaluate`.

Coefficients are Python complex numbers (double precision).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import BasisMismatchError, ExponentOverflowError

CANONICAL = "canonical"
HOLOMORPHIC = "holomorphic"
BASES = (CANONICAL, HOLOMORPHIC)
VARIABLES = {CANONICAL: ("q", "p"), HOLOMORPHIC: ("a", "abar")}
MAX_EXPONENT = 64


@dataclass(frozen=True)
class PhysParams:
    """Physical constants of a one-dimensional oscillator problem."""

    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "omega"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite real, got {value!r}")


def falling(n: int, r: int) -> int:
    """n (n-1) ... (n-r+1); zero when r > n."""
    if r > n:
        return 0
    out = 1
    for t in range(n - r + 1, n + 1):
        out *= t
    return out


class HbarPoly:
    """Polynomial in the formal deformation parameter hbar.

    Used for coefficients of a fixed phase-space monomial and for scalar
    results such as phase-space integrals.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, complex] | None = None):
        c = {}
        for k, v in (coeffs or {}).items():
            v = complex(v)
            if v != 0:
                c[int(k)] = v
        self._c = c

    @property
    def coeffs(self):
        return MappingProxyType(self._c)

    def __getitem__(self, k):
        return self._c.get(k, 0j)

    def __eq__(self, other):
        if isinstance(other, (int, float, complex)):
            other = HbarPoly({0: other})
        return isinstance(other, HbarPoly) and self._c == other._c

    def __hash__(self):
        return hash(tuple(sorted(self._c.items(), key=lambda kv: kv[0])))

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = HbarPoly({0: other})
        out = dict(self._c)
        for k, v in other._c.items():
            out[k] = out.get(k, 0j) + v
        return HbarPoly(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return HbarPoly({k: v * other for k, v in self._c.items()})
        out = {}
        for k1, v1 in self._c.items():
            for k2, v2 in other._c.items():
                out[k1 + k2] = out.get(k1 + k2, 0j) + v1 * v2
        return HbarPoly(out)

    __rmul__ = __mul__

    def evaluate(self, hbar):
        return sum(v * hbar**k for k, v in self._c.items()) if self._c else 0j

    def isclose(self, other, rel=1e-12, abs_tol=1e-12):
        if isinstance(other, (int, float, complex)):
            other = HbarPoly({0: other})
        keys = set(self._c) | set(other._c)
        scale = max([abs(v) for v in self._c.values()] + [abs(v) for v in other._c.values()] + [0.0])
        return all(abs(self[k] - other[k]) <= abs_tol + rel * scale for k in keys)

    def __repr__(self):
        return f"HbarPoly({dict(sorted(self._c.items()))})"


class PhasePoly:
    """Immutable sparse polynomial in phase-space variables and hbar.

    ``terms`` maps ``(i, j, k)`` to the coefficient of ``x^i y^j hbar^k``.
    Phase exponents ``i, j`` are non-negative and below ``MAX_EXPONENT``.
    The hbar exponent ``k`` is non-negative for everything built by the
    parser and the polynomial star products; Gaussian prefactors may carry
    negative powers (e.g. ``1/hbar^n``).
    """

    __slots__ = ("basis", "_terms")

    def __init__(self, terms: Mapping[tuple, complex] | None = None, basis: str = CANONICAL):
        if basis not in BASES:
            raise ValueError(f"unknown basis {basis!r}")
        clean = {}
        for key, v in (terms or {}).items():
            if len(key) == 2:
                key = (key[0], key[1], 0)
            i, j, k = (int(t) for t in key)
            if i < 0 or j < 0:
                raise ValueError(f"negative phase exponent in {key}")
            if i >= MAX_EXPONENT or j >= MAX_EXPONENT:
                raise ExponentOverflowError(f"exponent {max(i, j)} exceeds bound {MAX_EXPONENT - 1}")
            v = complex(v)
            if v != 0:
                clean[(i, j, k)] = clean.get((i, j, k), 0j) + v
        self.basis = basis
        self._terms = {key: v for key, v in clean.items() if v != 0}

    # -- constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, c, basis=CANONICAL):
        return cls({(0, 0, 0): c}, basis)

    @classmethod
    def zero(cls, basis=CANONICAL):
        return cls({}, basis)

    @classmethod
    def var(cls, name: str):
        for basis, names in VARIABLES.items():
            if name in names:
                key = (1, 0, 0) if names.index(name) == 0 else (0, 1, 0)
                return cls({key: 1}, basis)
        raise ValueError(f"unknown variable {name!r}")

    @classmethod
    def hbar(cls, power=1, basis=CANONICAL):
        return cls({(0, 0, power): 1}, basis)

    @classmethod
    def monomial(cls, i, j, k=0, c=1, basis=CANONICAL):
        return cls({(i, j, k): c}, basis)

    # -- inspection -----------------------------------------------------------

    @property
    def terms(self):
        return MappingProxyType(self._terms)

    @property
    def variables(self):
        return VARIABLES[self.basis]

    def is_zero(self):
        return not self._terms

    @property
    def degree(self):
        """Total degree in the phase variables (hbar not counted); -1 for zero."""
        return max((i + j for i, j, _ in self._terms), default=-1)

    @property
    def hbar_order(self):
        return max((k for _, _, k in self._terms), default=0)

    def hbar_part(self, k: int) -> "PhasePoly":
        """Phase-space polynomial multiplying hbar^k."""
        return PhasePoly({(i, j, 0): v for (i, j, kk), v in self._terms.items() if kk == k}, self.basis)

    def coefficient(self, i: int, j: int) -> HbarPoly:
        return HbarPoly({k: v for (ii, jj, k), v in self._terms.items() if (ii, jj) == (i, j)})

    def max_abs(self):
        return max((abs(v) for v in self._terms.values()), default=0.0)

    # -- comparison -----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, float, complex)):
            other = PhasePoly.constant(other, self.basis)
        if not isinstance(other, PhasePoly):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return self.basis == other.basis and self._terms == other._terms

    def __hash__(self):
        return hash((self.basis, frozenset(self._terms.items())))

    def isclose(self, other, rel=1e-12, abs_tol=1e-12):
        """Coefficient-wise comparison with tolerance ``abs_tol + rel * max|coeff|``."""
        if isinstance(other, (int, float, complex)):
            other = PhasePoly.constant(other, self.basis)
        if not (self.is_zero() or other.is_zero()) and self.basis != other.basis:
            raise BasisMismatchError(f"cannot compare {self.basis} with {other.basis}")
        diff = self - other if self.basis == other.basis or other.is_zero() else other - self
        scale = max(self.max_abs(), other.max_abs())
        return diff.max_abs() <= abs_tol + rel * scale

    def chop(self, tol=1e-14):
        """Drop real and imaginary parts smaller than ``tol`` in magnitude."""
        out = {}
        for key, v in self._terms.items():
            re = v.real if abs(v.real) > tol else 0.0
            im = v.imag if abs(v.imag) > tol else 0.0
            out[key] = complex(re, im)
        return PhasePoly(out, self.basis)

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PhasePoly):
            if other.basis != self.basis:
                if other.is_zero():
                    return PhasePoly.zero(self.basis)
                if self.is_zero():
                    return other
                raise BasisMismatchError(f"basis mismatch: {self.basis} vs {other.basis}")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return PhasePoly.constant(complex(other), self.basis)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        basis = other.basis if self.is_zero() else self.basis
        out = dict(self._terms)
        for key, v in other._terms.items():
            out[key] = out.get(key, 0j) + v
        return PhasePoly(out, basis)

    __radd__ = __add__

    def __neg__(self):
        return PhasePoly({key: -v for key, v in self._terms.items()}, self.basis)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            c = complex(other)
            return PhasePoly({key: v * c for key, v in self._terms.items()}, self.basis)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        basis = other.basis if self.is_zero() else self.basis
        out = {}
        for (i1, j1, k1), v1 in self._terms.items():
            for (i2, j2, k2), v2 in other._terms.items():
                key = (i1 + i2, j1 + j2, k1 + k2)
                out[key] = out.get(key, 0j) + v1 * v2
        for i, j, _ in out:
            if i >= MAX_EXPONENT or j >= MAX_EXPONENT:
                raise ExponentOverflowError(f"product exponent {max(i, j)} exceeds bound")
        return PhasePoly(out, basis)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, (int, float, complex)):
            return NotImplemented
        return self * (1 / complex(other))

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("power must be a non-negative integer")
        result = PhasePoly.constant(1, self.basis)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def times_hbar(self, power: int) -> "PhasePoly":
        return PhasePoly({(i, j, k + power): v for (i, j, k), v in self._terms.items()}, self.basis)

    # -- calculus -------------------------------------------------------------

    def differentiate(self, var: str, order: int = 1) -> "PhasePoly":
        if order < 0:
            raise ValueError("derivative order must be non-negative")
        if var not in self.variables:
            raise BasisMismatchError(f"variable {var!r} is not in the {self.basis} basis")
        idx = self.variables.index(var)
        out = {}
        for (i, j, k), v in self._terms.items():
            e = (i, j)[idx]
            f = falling(e, order)
            if f:
                key = (i - order, j, k) if idx == 0 else (i, j - order, k)
                out[key] = v * f
        return PhasePoly(out, self.basis)

    def conj(self) -> "PhasePoly":
        """Complex conjugate; in the holomorphic basis a and abar swap."""
        if self.basis == CANONICAL:
            return PhasePoly({key: v.conjugate() for key, v in self._terms.items()}, self.basis)
        return PhasePoly({(j, i, k): v.conjugate() for (i, j, k), v in self._terms.items()}, self.basis)

    def evaluate(self, point, hbar_value: float = 1.0):
        """Numeric value at ``point = (x, y)``; arrays broadcast."""
        x, y = point
        x = np.asarray(x)
        y = np.asarray(y)
        if not self._terms:
            return np.zeros(np.broadcast(x, y).shape, dtype=complex)[()]
        xp = _powers(x, max(i for i, _, _ in self._terms))
        yp = _powers(y, max(j for _, j, _ in self._terms))
        total = 0j
        for (i, j, k), v in self._terms.items():
            total = total + (v * hbar_value**k) * (xp[i] * yp[j])
        out = np.asarray(total, dtype=complex)
        return out[()] if out.ndim == 0 else out

    def __call__(self, x, y, hbar_value=1.0):
        return self.evaluate((x, y), hbar_value)

    # -- text -----------------------------------------------------------------

    def __str__(self):
        from .parser import format_poly

        return format_poly(self)

    def __repr__(self):
        return f"PhasePoly({str(self)!r}, basis={self.basis!r})"


def _powers(x, n):
    out = [np.ones_like(x, dtype=complex) if np.ndim(x) else 1.0]
    for _ in range(n):
        out.append(out[-1] * x)
    return out


def poisson_bracket(f: PhasePoly, g: PhasePoly) -> PhasePoly:
    """Poisson bracket with the constant canonical tensor.

    Canonical: {f, g} = f_q g_p - f_p g_q.  Holomorphic: the canonical
    tensor transported through the a, abar substitution, which gives
    {a, abar} = -i and hence {f, g} = -i (f_a g_abar - f_abar g_a).
    """
    if f.is_zero() or g.is_zero():
        return PhasePoly.zero(g.basis if f.is_zero() else f.basis)
    if f.basis != g.basis:
        raise BasisMismatchError(f"poisson_bracket: {f.basis} vs {g.basis}")
    x, y = f.variables
    out = f.differentiate(x) * g.differentiate(y) - f.differentiate(y) * g.differentiate(x)
    if f.basis == HOLOMORPHIC:
        out = out * (-1j)
    return out


# Poisson tensors alpha^{ij} in the (x, y) ordering of each basis.
POISSON_TENSOR = {
    CANONICAL: np.array([[0.0, 1.0], [-1.0, 0.0]]),
    HOLOMORPHIC: np.array([[0.0, -1j], [1j, 0.0]]),
}


def _substitute(f: PhasePoly, x_img: PhasePoly, y_img: PhasePoly, basis: str) -> PhasePoly:
    xs = [PhasePoly.constant(1, basis)]
    ys = [PhasePoly.constant(1, basis)]
    out = PhasePoly.zero(basis)
    for (i, j, k), v in f.terms.items():
        while len(xs) <= i:
            xs.append(xs[-1] * x_img)
        while len(ys) <= j:
            ys.append(ys[-1] * y_img)
        out = out + (xs[i] * ys[j]).times_hbar(k) * v
    return out


def to_holomorphic(f: PhasePoly, params: PhysParams) -> PhasePoly:
    """Rewrite a canonical polynomial in a, abar.

    Uses q = (a + abar)/sqrt(2 m w) and p = -i sqrt(m w / 2) (a - abar).
    """
    if f.basis == HOLOMORPHIC:
        return f
    mw = params.mass * params.omega
    a = PhasePoly.var("a")
    ab = PhasePoly.var("abar")
    q_img = (a + ab) * (1 / math.sqrt(2 * mw))
    p_img = (a - ab) * (-1j * math.sqrt(mw / 2))
    return _substitute(f, q_img, p_img, HOLOMORPHIC)


def to_canonical(f: PhasePoly, params: PhysParams) -> PhasePoly:
    """Rewrite a holomorphic polynomial in q, p.

    Uses a = sqrt(m w / 2) (q + i p / (m w)) and its conjugate.
    """
    if f.basis == CANONICAL:
        return f
    mw = params.mass * params.omega
    q = PhasePoly.var("q")
    p = PhasePoly.var("p")
    s = math.sqrt(mw / 2)
    a_img = q * s + p * (1j * s / mw)
    ab_img = q * s - p * (1j * s / mw)
    return _substitute(f, a_img, ab_img, CANONICAL)


def convert(f: PhasePoly, basis: str, params: PhysParams | None) -> PhasePoly:
    if f.basis == basis or f.is_zero():
        return PhasePoly(dict(f.terms), basis) if f.is_zero() else f
    if params is None:
        raise BasisMismatchError(f"converting {f.basis} -> {basis} needs PhysParams")
    return to_holomorphic(f, params) if basis == HOLOMORPHIC else to_canonical(f, params)


def differentiate(f: PhasePoly, var: str, order: int = 1) -> PhasePoly:
    return f.differentiate(var, order)


def evaluate(f: PhasePoly, point, hbar_value: float = 1.0):
    return f.evaluate(point, hbar_value)


def canonical_point_to_holomorphic(q, p, params: PhysParams):
    """Numeric (a, abar) at canonical (q, p)."""
    mw = params.mass * params.omega
    s = math.sqrt(mw / 2)
    q = np.asarray(q)
    p = np.asarray(p)
    return s * (q + 1j * p / mw), s * (q - 1j * p / mw)


def nice_fraction(x: float, max_den: int = 4096):
    """(numerator, denominator) if x is exactly the double nearest n/d, else None."""
    if not math.isfinite(x):
        return None
    fr = Fraction(x).limit_denominator(max_den)
    if fr.numerator / fr.denominator == x and abs(fr.numerator) < 10**15:
        return fr.numerator, fr.denominator
    return None
