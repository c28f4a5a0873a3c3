"""Phase-space polynomials as matrices in a truncated oscillator number basis."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import gammaln

from .errors import TruncationWarning
from .grid import GridFunction, GridSpec
from .orthopoly import oscillator_wavefunctions
from .poly import CANONICAL, HOLOMORPHIC, PhasePoly, PhysParams, convert
from .star import MOYAL, NORMAL, STANDARD, as_scheme, star_poly


class FockMatrix:
    """Square complex matrix on the number states |0>, ..., |D-1>."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 2:
            raise ValueError(f"FockMatrix needs a square matrix of size >= 2, got shape {entries.shape}")
        entries.setflags(write=False)
        self.entries = entries

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __matmul__(self, other):
        return FockMatrix(self.entries @ _entries(other))

    def __add__(self, other):
        return FockMatrix(self.entries + _entries(other))

    def __sub__(self, other):
        return FockMatrix(self.entries - _entries(other))

    def __mul__(self, c):
        return FockMatrix(self.entries * c)

    __rmul__ = __mul__

    def __neg__(self):
        return FockMatrix(-self.entries)

    def dagger(self) -> "FockMatrix":
        return FockMatrix(self.entries.conj().T)

    def block(self, k: int) -> np.ndarray:
        """Top-left k x k block."""
        return self.entries[:k, :k]

    def crop(self, k: int) -> "FockMatrix":
        return FockMatrix(self.entries[:k, :k])

    def __repr__(self):
        return f"FockMatrix(dim={self.dim})"


def _entries(x):
    return x.entries if isinstance(x, FockMatrix) else np.asarray(x)


def projector_matrix(n: int, dim: int) -> FockMatrix:
    m = np.zeros((dim, dim), dtype=complex)
    m[n, n] = 1.0
    return FockMatrix(m)


def _ladder_matrices(params: PhysParams, dim: int, dtype=complex):
    real = np.longdouble if dtype == np.clongdouble else float
    hb, m, w = (real(x) for x in (params.hbar, params.mass, params.omega))
    a = np.diag(np.sqrt(hb * np.arange(1, dim, dtype=real)), 1).astype(dtype)
    ad = a.conj().T
    Q = (a + ad) / np.sqrt(2 * m * w)
    P = (a - ad) * (-1j * np.sqrt(m * w / 2))
    return a, ad, Q, P


def fock_operators(params: PhysParams, dim: int) -> dict:
    """Ladder, position, momentum and Weyl-ordered Hamiltonian matrices.

    a|n> = sqrt(hbar n)|n-1>, so [a, a^dagger] = hbar on the untruncated
    block.  Q = (a + a^dagger)/sqrt(2 m w), P = -i sqrt(m w/2)(a - a^dagger).
    """
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    a, ad, Q, P = _ladder_matrices(params, dim)
    H = 0.5 * params.omega * (a @ ad + ad @ a)
    return {"a": FockMatrix(a), "adag": FockMatrix(ad), "Q": FockMatrix(Q), "P": FockMatrix(P), "H": FockMatrix(H)}


# -- orderings ----------------------------------------------------------------------


@dataclass(frozen=True)
class OrderingSpec:
    """Ordering rule for the correspondence.

    ``family="canonical"``: parameter -1 standard (Q left of P), +1
    antistandard, 0 Weyl.  ``family="holomorphic"``: +1 normal (a^dagger
    left of a), -1 antinormal, 0 Weyl.  The two Weyl points compare equal.
    """

    family: str = CANONICAL
    parameter: int = 0

    def __post_init__(self):
        if self.family not in (CANONICAL, HOLOMORPHIC):
            raise ValueError(f"unknown ordering family {self.family!r}")
        if self.parameter not in (-1, 0, 1):
            raise ValueError("ordering parameter must be -1, 0 or +1")

    @property
    def is_weyl(self):
        return self.parameter == 0

    @property
    def name(self) -> str:
        if self.is_weyl:
            return "weyl"
        if self.family == CANONICAL:
            return "standard" if self.parameter == -1 else "antistandard"
        return "normal" if self.parameter == 1 else "antinormal"

    def __eq__(self, other):
        if not isinstance(other, OrderingSpec):
            return NotImplemented
        return (self.is_weyl and other.is_weyl) or (self.family, self.parameter) == (other.family, other.parameter)

    def __hash__(self):
        return hash("weyl") if self.is_weyl else hash((self.family, self.parameter))


WEYL = OrderingSpec(CANONICAL, 0)
STANDARD_ORDER = OrderingSpec(CANONICAL, -1)
ANTISTANDARD_ORDER = OrderingSpec(CANONICAL, 1)
NORMAL_ORDER = OrderingSpec(HOLOMORPHIC, 1)
ANTINORMAL_ORDER = OrderingSpec(HOLOMORPHIC, -1)
ORDERINGS = {o.name: o for o in (WEYL, STANDARD_ORDER, ANTISTANDARD_ORDER, NORMAL_ORDER, ANTINORMAL_ORDER)}


def as_ordering(ordering) -> OrderingSpec:
    if isinstance(ordering, OrderingSpec):
        return ordering
    try:
        return ORDERINGS[ordering]
    except KeyError:
        raise ValueError(f"unknown ordering {ordering!r}; expected one of {sorted(ORDERINGS)}") from None


class _MonomialImages:
    """Images of x^i y^j under one ordering rule, memoized."""

    def __init__(self, X, Y, weyl: bool, y_first: bool):
        self.X, self.Y = X, Y
        self.weyl = weyl
        self.y_first = y_first
        self.xp = [np.eye(len(X), dtype=X.dtype)]
        self.yp = [np.eye(len(X), dtype=X.dtype)]
        self.memo = {}

    def _pow(self, table, M, n):
        while len(table) <= n:
            table.append(table[-1] @ M)
        return table[n]

    def __call__(self, i, j):
        if (i, j) in self.memo:
            return self.memo[i, j]
        if not self.weyl:
            xi = self._pow(self.xp, self.X, i)
            yj = self._pow(self.yp, self.Y, j)
            out = yj @ xi if self.y_first else xi @ yj
        elif i == 0:
            out = self._pow(self.yp, self.Y, j)
        else:
            # symmetrize one x at a time: W(x^i y^j) = (X W' + W' X)/2
            inner = self(i - 1, j)
            out = 0.5 * (self.X @ inner + inner @ self.X)
        self.memo[i, j] = out
        return out


def theta_order(f: PhasePoly, ordering=WEYL, dim: int = 32, params: PhysParams | None = None, extended: bool = False):
    """Operator image of a polynomial under an ordering rule.

    Canonical orderings act on (q, p) polynomials and holomorphic ones on
    (a, abar); the Weyl rule uses whichever basis f is in.  hbar is bound to
    ``params.hbar``.  Matrices are built at dimension dim + deg(f) and
    cropped, so the returned D x D block is exact.  ``extended=True``
    returns a raw ``clongdouble`` array instead of a FockMatrix, for
    residual checks that need more than double precision.
    """
    ordering = as_ordering(ordering)
    params = params or PhysParams()
    if ordering.is_weyl:
        basis = f.basis
    else:
        basis = ordering.family
    f = convert(f, basis, params)
    deg = max(f.degree, 0)
    if deg >= dim:
        warnings.warn(f"degree {deg} >= dimension {dim}: truncation reaches the whole block", TruncationWarning, stacklevel=2)
    dtype = np.clongdouble if extended else complex
    A, Ad, X, Y = _ladder_matrices(params, dim + deg, dtype)
    if basis == CANONICAL:
        rule = _MonomialImages(X, Y, ordering.is_weyl, y_first=ordering.parameter == 1)
    else:
        if ordering.is_weyl:
            rule = _MonomialImages(A, Ad, True, False)
        else:
            # normal: a^i abar^j -> adag^j a^i ; antinormal: a^i adag^j
            rule = _MonomialImages(A, Ad, False, y_first=ordering.parameter == 1)
    out = np.zeros((dim + deg, dim + deg), dtype=dtype)
    for (i, j, k), c in f.terms.items():
        out = out + dtype(c * params.hbar**k) * rule(i, j)
    if extended:
        return out[:dim, :dim]
    return FockMatrix(out[:dim, :dim])


def theta_weyl_enumerated(f: PhasePoly, dim: int, params: PhysParams | None = None) -> FockMatrix:
    """Weyl image by averaging over every interleaving of the factors (slow)."""
    from itertools import combinations

    params = params or PhysParams()
    deg = max(f.degree, 0)
    ops = fock_operators(params, dim + deg)
    X, Y = (ops["Q"], ops["P"]) if f.basis == CANONICAL else (ops["a"], ops["adag"])
    X, Y = X.entries, Y.entries
    out = np.zeros_like(X)
    for (i, j, k), c in f.terms.items():
        acc = np.zeros_like(X)
        for pos in combinations(range(i + j), i):
            M = np.eye(len(X), dtype=complex)
            chosen = set(pos)
            for t in range(i + j):
                M = M @ (X if t in chosen else Y)
            acc = acc + M
        out = out + (c * params.hbar**k / comb(i + j, i)) * acc
    return FockMatrix(out[:dim, :dim])


# -- inverse map ----------------------------------------------------------------------


def _trailing_weight(M: np.ndarray, width: int = 2) -> float:
    total = np.sum(np.abs(M) ** 2)
    if total == 0:
        return 0.0
    edge = np.sum(np.abs(M[-width:, :]) ** 2) + np.sum(np.abs(M[:-width, -width:]) ** 2)
    return float(edge / total)


def weyl_symbol(op: FockMatrix, spec: GridSpec | None = None, tol: float = 1e-8) -> GridFunction:
    """f(q, p) = integral <q + xi/2| op |q - xi/2> e^{-i xi p/hbar} d xi on a grid.

    Wavefunctions come from the Hermite-function recurrence; the xi integral
    is a trapezoid sum over a range covering the basis functions' support.
    A TruncationWarning is issued when the last two basis states carry more
    than ``tol`` of the operator's weight.
    """
    spec = spec or GridSpec()
    params = spec.params
    hb = params.hbar
    M = op.entries
    D = op.dim
    weight = _trailing_weight(M)
    if weight > tol:
        warnings.warn(f"trailing basis states carry {weight:.2g} of the operator weight", TruncationWarning, stacklevel=2)
    ell = np.sqrt(hb / (params.mass * params.omega))
    reach = ell * (np.sqrt(2 * D + 1) + 8)
    p = spec.p
    dxi = min(ell / (4 * np.sqrt(2 * D + 1)), np.pi * hb / (2 * np.max(np.abs(p)) + 1e-300))
    n_xi = int(np.ceil(2 * reach / dxi)) | 1
    xi = np.linspace(-2 * reach, 2 * reach, n_xi)
    dxi = xi[1] - xi[0]
    phase = np.exp(-1j * np.outer(xi, p) / hb) * dxi  # (n_xi, n_p)
    out = np.empty((spec.n_q, spec.n_p), dtype=complex)
    for iq, q in enumerate(spec.q):
        plus = oscillator_wavefunctions(D - 1, q + xi / 2, hb, params.mass, params.omega)
        minus = oscillator_wavefunctions(D - 1, q - xi / 2, hb, params.mass, params.omega)
        kernel = np.einsum("mx,mn,nx->x", plus, M, minus)
        out[iq] = kernel @ phase
    return GridFunction(spec, out)


def coherent_state(a: complex, dim: int, hbar: float = 1.0) -> np.ndarray:
    """Coefficients e^{-|a|^2/2 hbar} a^n / sqrt(n! hbar^n), n < dim."""
    n = np.arange(dim)
    a = complex(a)
    if a == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    logmag = n * np.log(abs(a)) - 0.5 * (gammaln(n + 1) + n * np.log(hbar)) - abs(a) ** 2 / (2 * hbar)
    return np.exp(logmag + 1j * n * np.angle(a))


def coherent_symbol(op: FockMatrix, a: complex, params: PhysParams | None = None, tol: float = 1e-8) -> complex:
    """<a| op |a> for the coherent state |a>; the normal symbol of op at (a, abar)."""
    params = params or PhysParams()
    v = coherent_state(a, op.dim, params.hbar)
    missing = 1 - float(np.sum(np.abs(v) ** 2))
    if missing > tol:
        warnings.warn(f"coherent state loses {missing:.2g} of its norm to truncation", TruncationWarning, stacklevel=2)
    return complex(v.conj() @ op.entries @ v)


# -- homomorphism ---------------------------------------------------------------------

# (ordering, star) pairs for which the correspondence is multiplicative
PAIRINGS = {
    "weyl": (WEYL, MOYAL),
    "normal": (NORMAL_ORDER, NORMAL),
    "standard": (ANTISTANDARD_ORDER, STANDARD),
}


def homomorphism_residual(f: PhasePoly, g: PhasePoly, pairing="weyl", dim: int = 32, params: PhysParams | None = None) -> float:
    """max |Theta(f) Theta(g) - Theta(f * g)| on the exact top-left block.

    ``pairing`` is a key of PAIRINGS or an explicit (ordering, scheme) pair.
    The block has size dim - deg f - deg g.  Matrices are formed in
    extended precision: entries reach ~dim^(deg/2), so double rounding alone
    would exceed 1e-9 for degree-4 operands at dim 32.
    """
    params = params or PhysParams()
    ordering, scheme = PAIRINGS[pairing] if isinstance(pairing, str) else pairing
    ordering = as_ordering(ordering)
    scheme = as_scheme(scheme)
    if scheme == STANDARD:
        f, g = convert(f, CANONICAL, params), convert(g, CANONICAL, params)
    elif scheme == NORMAL:
        f, g = convert(f, HOLOMORPHIC, params), convert(g, HOLOMORPHIC, params)
    elif f.basis != g.basis:
        f, g = convert(f, HOLOMORPHIC, params), convert(g, HOLOMORPHIC, params)
    k = dim - max(f.degree, 0) - max(g.degree, 0)
    if k < 1:
        raise ValueError("dimension too small for the operand degrees")
    lhs = theta_order(f, ordering, dim, params, True) @ theta_order(g, ordering, dim, params, True)
    rhs = theta_order(star_poly(f, g, scheme, params), ordering, dim, params, True)
    return float(np.max(np.abs((lhs - rhs)[:k, :k])))
