"""Star products of phase-space polynomials.

Every product here has the form ``f exp(hbar * sum_r c_r dL_{u_r} dR_{v_r}) g``
with constant coefficients, so on polynomials the exponential series
terminates.  The three schemes:

* Moyal, canonical:    (i hbar/2)(dL_q dR_p - dL_p dR_q)
* Moyal, holomorphic:  (hbar/2)(dL_a dR_abar - dL_abar dR_a)
* standard:            i hbar dL_q dR_p
* normal:              hbar dL_a dR_abar
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial

from .errors import BasisMismatchError, UnsupportedOperationError
from .poly import CANONICAL, HOLOMORPHIC, PhasePoly, PhysParams, convert, falling

MOYAL = "moyal"
STANDARD = "standard"
NORMAL = "normal"
SCHEMES = (MOYAL, STANDARD, NORMAL)


@dataclass(frozen=True)
class SchemeSpec:
    kind: str = MOYAL

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise ValueError(f"unknown scheme {self.kind!r}; expected one of {SCHEMES}")

    def __str__(self):
        return self.kind


def as_scheme(scheme) -> str:
    if isinstance(scheme, SchemeSpec):
        return scheme.kind
    return SchemeSpec(scheme).kind


# (left var index, right var index, coefficient of hbar)
_PAIRS = {
    (MOYAL, CANONICAL): ((0, 1, 0.5j), (1, 0, -0.5j)),
    (MOYAL, HOLOMORPHIC): ((0, 1, 0.5), (1, 0, -0.5)),
    (STANDARD, CANONICAL): ((0, 1, 1j),),
    (NORMAL, HOLOMORPHIC): ((0, 1, 1.0),),
}
_NATIVE_BASIS = {STANDARD: CANONICAL, NORMAL: HOLOMORPHIC}


def _orders(pairs, ef, eg, idx=0, dl=(0, 0), dr=(0, 0)):
    """Yield per-pair derivative orders within the available exponents."""
    if idx == len(pairs):
        yield ()
        return
    u, v, _ = pairs[idx]
    rmax = min(ef[u] - dl[u], eg[v] - dr[v])
    for r in range(rmax + 1):
        ndl = list(dl)
        ndr = list(dr)
        ndl[u] += r
        ndr[v] += r
        for rest in _orders(pairs, ef, eg, idx + 1, tuple(ndl), tuple(ndr)):
            yield (r,) + rest


@lru_cache(maxsize=200_000)
def _monomial_product(key, ef, eg):
    """Star product of x^ef and x^eg as a tuple of (exponent, dk, coeff)."""
    pairs = _PAIRS[key]
    out = []
    for rs in _orders(pairs, ef, eg):
        coeff = 1 + 0j
        dl = [0, 0]
        dr = [0, 0]
        for (u, v, c), r in zip(pairs, rs):
            if r:
                coeff *= c**r / factorial(r)
            dl[u] += r
            dr[v] += r
        coeff *= falling(ef[0], dl[0]) * falling(ef[1], dl[1]) * falling(eg[0], dr[0]) * falling(eg[1], dr[1])
        exp = (ef[0] - dl[0] + eg[0] - dr[0], ef[1] - dl[1] + eg[1] - dr[1])
        out.append((exp, sum(rs), coeff))
    return tuple(out)


def _align(f, g, scheme, params):
    """Bring f, g into the basis the scheme works in."""
    if scheme in _NATIVE_BASIS:
        basis = _NATIVE_BASIS[scheme]
    elif f.basis == g.basis or f.is_zero() or g.is_zero():
        basis = g.basis if f.is_zero() else f.basis
    else:
        basis = HOLOMORPHIC
    try:
        return convert(f, basis, params), convert(g, basis, params), basis
    except BasisMismatchError as exc:
        raise BasisMismatchError(f"{scheme} star needs {basis} operands: {exc}") from None


def star_poly(f: PhasePoly, g: PhasePoly, scheme=MOYAL, params: PhysParams | None = None) -> PhasePoly:
    """Exact star product of two polynomials.

    Mixed-basis Moyal operands are converted to holomorphic; the standard
    product needs canonical operands and the normal product holomorphic ones.
    Conversions need ``params``.
    """
    scheme = as_scheme(scheme)
    f, g, basis = _align(f, g, scheme, params)
    key = (scheme, basis)
    out = {}
    for (i1, j1, k1), v1 in f.terms.items():
        for (i2, j2, k2), v2 in g.terms.items():
            v = v1 * v2
            for (i, j), dk, c in _monomial_product(key, (i1, j1), (i2, j2)):
                t = (i, j, k1 + k2 + dk)
                out[t] = out.get(t, 0j) + v * c
    return PhasePoly(out, basis)


def star_commutator(f: PhasePoly, g: PhasePoly, scheme=MOYAL, params=None) -> PhasePoly:
    return star_poly(f, g, scheme, params) - star_poly(g, f, scheme, params)


# -- shift formula --------------------------------------------------------------


def _bopp(g: PhasePoly, which: int) -> PhasePoly:
    """Left-multiplication operator of the first (0) or second (1) variable.

    Canonical: q -> q + (i hbar/2) d_p,  p -> p - (i hbar/2) d_q.
    Holomorphic: a -> a + (hbar/2) d_abar,  abar -> abar - (hbar/2) d_a.
    """
    x, y = g.variables
    half = 0.5j if g.basis == CANONICAL else 0.5
    if which == 0:
        return PhasePoly.var(x) * g + g.differentiate(y).times_hbar(1) * half
    return PhasePoly.var(y) * g - g.differentiate(x).times_hbar(1) * half


def _apply_word(word, g):
    for which in reversed(word):
        g = _bopp(g, which)
    return g


def star_shift(f: PhasePoly, g: PhasePoly, params: PhysParams | None = None) -> PhasePoly:
    """Moyal product through the shifted-argument (Bopp) form.

    ``f(q + (i hbar/2) d_p, p - (i hbar/2) d_q) g`` where the two shifted
    operators do not commute, so each monomial of ``f`` is taken
    Weyl-symmetrized: x^m y^n -> 2^-m sum_s C(m, s) X^s Y^n X^(m-s).
    """
    if f.is_zero() or g.is_zero():
        return PhasePoly.zero(f.basis)
    if f.basis != g.basis:
        f = convert(f, HOLOMORPHIC, params)
        g = convert(g, HOLOMORPHIC, params)
    out = PhasePoly.zero(g.basis)
    for (m, n, k), v in f.terms.items():
        acc = PhasePoly.zero(g.basis)
        for s in range(m + 1):
            word = (0,) * s + (1,) * n + (0,) * (m - s)
            acc = acc + _apply_word(word, g) * comb(m, s)
        out = out + acc.times_hbar(k) * (v / 2**m)
    return out


# -- transition operators -------------------------------------------------------

STANDARD_TO_MOYAL = "standard->moyal"
NORMAL_TO_MOYAL = "normal->moyal"


@dataclass(frozen=True)
class TransitionOp:
    """exp(c hbar d_x d_y) intertwining a scheme with the Moyal product.

    standard->moyal: c = -i/2 on (q, p).  normal->moyal: c = -1/2 on
    (a, abar).  ``inverse=True`` flips the sign of c.
    """

    kind: str = NORMAL_TO_MOYAL
    inverse: bool = False

    def __post_init__(self):
        if self.kind not in (STANDARD_TO_MOYAL, NORMAL_TO_MOYAL):
            raise ValueError(f"unknown transition {self.kind!r}")

    @property
    def basis(self):
        return CANONICAL if self.kind == STANDARD_TO_MOYAL else HOLOMORPHIC

    @property
    def coefficient(self) -> complex:
        c = -0.5j if self.kind == STANDARD_TO_MOYAL else -0.5
        return -c if self.inverse else c

    def inverted(self) -> "TransitionOp":
        return TransitionOp(self.kind, not self.inverse)

    def __call__(self, f):
        return transition_apply(self, f)


def transition_apply(T: TransitionOp, f, params: PhysParams | None = None):
    """Apply a transition operator to a PhasePoly or GaussianPoly."""
    from .gaussian import GaussianPoly, gaussian_transition

    if isinstance(f, GaussianPoly):
        if T.kind != NORMAL_TO_MOYAL:
            raise UnsupportedOperationError("only the normal->moyal operator acts on GaussianPoly")
        return gaussian_transition(T, f)
    if not isinstance(f, PhasePoly):
        raise UnsupportedOperationError(f"cannot apply a transition operator to {type(f).__name__}")
    f = convert(f, T.basis, params)
    c = T.coefficient
    out = {}
    for (i, j, k), v in f.terms.items():
        for r in range(min(i, j) + 1):
            w = v * c**r / factorial(r) * falling(i, r) * falling(j, r)
            key = (i - r, j - r, k + r)
            out[key] = out.get(key, 0j) + w
    return PhasePoly(out, f.basis)


def hermitean_conj(f):
    """Complex conjugation (a <-> abar in the holomorphic basis)."""
    return f.conj()
