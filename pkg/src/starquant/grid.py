"""Phase-space functions sampled on uniform periodic (q, p) grids."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .errors import AliasingWarning, BoundaryDecayError, ConvergenceError
from .gaussian import GaussianPoly
from .poly import CANONICAL, HOLOMORPHIC, PhasePoly, PhysParams, canonical_point_to_holomorphic, convert


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid x_k = -L + 2 L k / N on [-L, L) in both q and p.

    Half-extents default to 8 natural widths: sqrt(hbar/m w) and sqrt(hbar m w).
    """

    n_q: int = 256
    n_p: int = 256
    l_q: float | None = None
    l_p: float | None = None
    params: PhysParams = field(default_factory=PhysParams)

    def __post_init__(self):
        for name in ("n_q", "n_p"):
            n = getattr(self, name)
            if n < 16 or n & (n - 1):
                raise ValueError(f"{name} must be a power of two >= 16, got {n}")
        hb, m, w = self.params.hbar, self.params.mass, self.params.omega
        if self.l_q is None:
            object.__setattr__(self, "l_q", 8 * np.sqrt(hb / (m * w)))
        if self.l_p is None:
            object.__setattr__(self, "l_p", 8 * np.sqrt(hb * m * w))
        if self.l_q <= 0 or self.l_p <= 0:
            raise ValueError("grid half-extents must be positive")

    @property
    def q(self):
        return -self.l_q + 2 * self.l_q * np.arange(self.n_q) / self.n_q

    @property
    def p(self):
        return -self.l_p + 2 * self.l_p * np.arange(self.n_p) / self.n_p

    @property
    def dq(self):
        return 2 * self.l_q / self.n_q

    @property
    def dp(self):
        return 2 * self.l_p / self.n_p

    def mesh(self):
        return np.meshgrid(self.q, self.p, indexing="ij")

    def with_params(self, params: PhysParams) -> "GridSpec":
        return GridSpec(self.n_q, self.n_p, None, None, params)


class GridFunction:
    """Complex samples on a GridSpec; axis 0 is q, axis 1 is p."""

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values):
        values = np.array(values, dtype=complex)
        if values.shape != (spec.n_q, spec.n_p):
            raise ValueError(f"values have shape {values.shape}, grid is {(spec.n_q, spec.n_p)}")
        values.setflags(write=False)
        self.spec = spec
        self.values = values

    def _other(self, other):
        if isinstance(other, GridFunction):
            if other.spec != self.spec:
                raise ValueError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.spec, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.spec, self.values - self._other(other))

    def __mul__(self, other):
        return GridFunction(self.spec, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.spec, -self.values)

    def conj(self):
        return GridFunction(self.spec, self.values.conj())

    def max_abs(self, mask=None):
        v = self.values if mask is None else self.values[mask]
        return float(np.max(np.abs(v)))

    def window(self, half_q: float, half_p: float | None = None):
        """Boolean mask of grid points with |q| <= half_q and |p| <= half_p."""
        half_p = half_q if half_p is None else half_p
        Q, P = self.spec.mesh()
        return (np.abs(Q) <= half_q + 1e-12) & (np.abs(P) <= half_p + 1e-12)

    def to_csv(self, path_or_file):
        """Rows ``q,p,re,im`` with p varying fastest."""
        write_csv(self, path_or_file)


def sample(f, spec: GridSpec, hbar_value: float | None = None) -> GridFunction:
    """Evaluate a PhasePoly, GaussianPoly or callable f(q, p) on the grid."""
    params = spec.params
    hb = params.hbar if hbar_value is None else hbar_value
    Q, P = spec.mesh()
    if isinstance(f, GaussianPoly):
        a, ab = canonical_point_to_holomorphic(Q, P, params)
        values = f.evaluate(a, ab, hb)
    elif isinstance(f, PhasePoly):
        if f.basis == HOLOMORPHIC:
            a, ab = canonical_point_to_holomorphic(Q, P, params)
            values = f.evaluate((a, ab), hb)
        else:
            values = f.evaluate((Q, P), hb)
    elif callable(f):
        values = f(Q, P)
    else:
        raise TypeError(f"cannot sample {type(f).__name__}")
    return GridFunction(spec, np.broadcast_to(values, Q.shape))


def check_decay(f: GridFunction, tol: float = 1e-10):
    """Raise BoundaryDecayError unless the edge values are below tol * max."""
    v = np.abs(f.values)
    peak = v.max()
    edge = max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max())
    if peak > 0 and edge > tol * peak:
        raise BoundaryDecayError(f"function is {edge / peak:.3g} of its peak at the grid boundary (limit {tol:g})")


def integrate(f: GridFunction, check: bool = True) -> complex:
    """(1/2 pi hbar) * integral dq dp, by the periodic trapezoid rule."""
    if check:
        check_decay(f)
    s = f.spec
    return complex(f.values.sum() * s.dq * s.dp / (2 * np.pi * s.params.hbar))


def marginal(f: GridFunction, axis: str = "q", check: bool = True):
    """Reduced distribution on the named axis.

    ``axis="q"`` returns (q, (1/2 pi hbar) * integral dp); ``axis="p"``
    returns (p, (1/2 pi hbar) * integral dq).
    """
    if check:
        check_decay(f)
    s = f.spec
    norm = 1 / (2 * np.pi * s.params.hbar)
    if axis == "q":
        return s.q, f.values.sum(axis=1) * s.dp * norm
    if axis == "p":
        return s.p, f.values.sum(axis=0) * s.dq * norm
    raise ValueError(f"axis must be 'q' or 'p', got {axis!r}")


def moments(f: GridFunction):
    """Means and variances of q and p under f (normalized by its integral)."""
    s = f.spec
    Z = integrate(f)
    q, mq = marginal(f, "q")
    p, mp = marginal(f, "p")
    mean_q = (q * mq).sum() * s.dq / Z
    mean_p = (p * mp).sum() * s.dp / Z
    var_q = ((q - mean_q) ** 2 * mq).sum() * s.dq / Z
    var_p = ((p - mean_p) ** 2 * mp).sum() * s.dp / Z
    return {"mean_q": mean_q.real, "mean_p": mean_p.real, "var_q": var_q.real, "var_p": var_p.real}


# -- spectral derivatives ---------------------------------------------------------------


def _wavenumbers(n, d):
    k = 2 * np.pi * np.fft.fftfreq(n, d=d)
    k[n // 2] = 0.0  # Nyquist mode carries no derivative information
    return k


class _Spectral:
    """Cached FFT of a grid function for repeated mixed derivatives."""

    def __init__(self, f: GridFunction, alias_tol=1e-10, filter_tol=0.0):
        s = f.spec
        self.F = np.fft.fft2(f.values)
        self.kq = _wavenumbers(s.n_q, s.dq)[:, None]
        self.kp = _wavenumbers(s.n_p, s.dp)[None, :]
        mag = np.abs(self.F)
        peak = mag.max() if mag.size else 0.0
        edge = max(mag[s.n_q // 2 - s.n_q // 16 : s.n_q // 2 + s.n_q // 16].max(),
                   mag[:, s.n_p // 2 - s.n_p // 16 : s.n_p // 2 + s.n_p // 16].max())
        if peak > 0 and edge > alias_tol * peak:
            warnings.warn(f"spectrum at the band edge is {edge / peak:.2g} of its peak", AliasingWarning, stacklevel=3)
        if filter_tol > 0:
            self.F = np.where(mag > filter_tol * peak, self.F, 0)
        self.spec = s

    def derivative(self, nq: int, np_: int):
        if nq == 0 and np_ == 0:
            return np.fft.ifft2(self.F)
        return np.fft.ifft2(self.F * (1j * self.kq) ** nq * (1j * self.kp) ** np_)


def spectral_derivative(f: GridFunction, nq: int = 0, np_: int = 0) -> GridFunction:
    return GridFunction(f.spec, _Spectral(f).derivative(nq, np_))


def grid_star_poly(f: PhasePoly, g: GridFunction) -> GridFunction:
    """Moyal product f * g through the shifted-argument operators.

    Q = q + (i hbar/2) d_p and P = p - (i hbar/2) d_q act on the samples of
    g with spectral derivatives; each monomial of f is Weyl-symmetrized.
    """
    s = g.spec
    hb = s.params.hbar
    f = convert(f, CANONICAL, s.params)
    Qm, Pm = s.mesh()
    kq = _wavenumbers(s.n_q, s.dq)[:, None]
    kp = _wavenumbers(s.n_p, s.dp)[None, :]
    _Spectral(g)  # aliasing report only

    def shift_q(v):
        return Qm * v + 0.5j * hb * np.fft.ifft2(1j * kp * np.fft.fft2(v))

    def shift_p(v):
        return Pm * v - 0.5j * hb * np.fft.ifft2(1j * kq * np.fft.fft2(v))

    cache = {(): g.values}

    def word(w):
        if w not in cache:
            inner = word(w[1:])
            cache[w] = shift_q(inner) if w[0] == 0 else shift_p(inner)
        return cache[w]

    out = np.zeros_like(g.values)
    for (m, n, k), c in f.terms.items():
        acc = np.zeros_like(g.values)
        for r in range(m + 1):
            acc = acc + comb(m, r) * word((0,) * r + (1,) * n + (0,) * (m - r))
        out = out + (c * hb**k / 2**m) * acc
    return GridFunction(s, out)


# -- truncated Moyal series ----------------------------------------------------------


@dataclass
class SeriesResult:
    """Partial sum of the Moyal series and its convergence evidence.

    ``term_norms[r]`` is the max-abs of the order-r term over the
    evaluation window; ``tail`` is the size of the last nonzero term.
    """

    value: GridFunction
    term_norms: list
    tail: float
    mask: np.ndarray | None = None


def _exact_derivatives(f, points, params, basis):
    """Callable (nx, ny) -> samples of d_x^nx d_y^ny f at points, exactly.

    Canonical polynomials differentiate in (q, p); everything else is
    promoted to a GaussianPoly and differentiated in (a, abar).
    """
    Q, P = points
    cache = {}
    if basis == CANONICAL:
        def d(nx, ny):
            if (nx, ny) not in cache:
                cache[nx, ny] = f.differentiate("q", nx).differentiate("p", ny).evaluate((Q, P), params.hbar)
            return cache[nx, ny]
        return d
    if isinstance(f, PhasePoly):
        f = GaussianPoly.from_poly(f, params)
    a, ab = canonical_point_to_holomorphic(Q, P, params)
    by_a = {0: f}

    def d(nx, ny):
        if (nx, ny) not in cache:
            if nx not in by_a:
                by_a[nx] = f.differentiate("a", nx)
            cache[nx, ny] = by_a[nx].differentiate("abar", ny).evaluate(a, ab, params.hbar)
        return cache[nx, ny]
    return d


def grid_star_series(
    f,
    g,
    K: int,
    spec: GridSpec | None = None,
    window: float | None = None,
    filter_tol: float = 1e-14,
    on_divergence: str = "raise",
) -> SeriesResult:
    """Moyal series f * g truncated after order K, evaluated on a grid.

    Operands may be GridFunctions (spectral derivatives) or PhasePoly /
    GaussianPoly (exact derivatives, then sampled; needs ``spec``).
    ``window`` restricts the evaluation to |q|, |p| <= window, other
    points are NaN.  Sustained growth of the term norms over the last
    orders raises ConvergenceError (``on_divergence="raise"``) or a
    warning (``"warn"``).
    """
    if K < 0 or K > 40:
        raise ValueError("K must lie in [0, 40]")
    grid_input = isinstance(f, GridFunction) and isinstance(g, GridFunction)
    if grid_input:
        spec = f.spec
        if g.spec != spec:
            raise ValueError("operands live on different grids")
    elif isinstance(f, GridFunction) or isinstance(g, GridFunction):
        raise TypeError("mix of grid and exact operands; sample the exact one first")
    elif spec is None:
        raise ValueError("exact operands need a GridSpec")
    params = spec.params
    hb = params.hbar
    Q, P = spec.mesh()
    mask = None
    if window is not None:
        mask = (np.abs(Q) <= window + 1e-12) & (np.abs(P) <= window + 1e-12)

    if grid_input:
        sf = _Spectral(f, filter_tol=filter_tol)
        sg = _Spectral(g, filter_tol=filter_tol)
        coef = 0.5j * hb

        def pick(v):
            return v[mask] if mask is not None else v

        df = lambda nx, ny: pick(sf.derivative(nx, ny))  # noqa: E731
        dg = lambda nx, ny: pick(sg.derivative(nx, ny))  # noqa: E731
        base_f, base_g = pick(f.values), pick(g.values)
    else:
        pts = (Q[mask], P[mask]) if mask is not None else (Q, P)
        canonical = all(isinstance(h, PhasePoly) and h.basis == CANONICAL for h in (f, g))
        basis = CANONICAL if canonical else HOLOMORPHIC
        df = _exact_derivatives(f, pts, params, basis)
        dg = _exact_derivatives(g, pts, params, basis)
        coef = 0.5j * hb if canonical else 0.5 * hb
        base_f, base_g = df(0, 0), dg(0, 0)

    # order 0 is the pointwise product, bit-for-bit
    total = np.asarray(base_f * base_g, dtype=complex)
    norms = [float(np.max(np.abs(total))) if total.size else 0.0]
    for r in range(1, K + 1):
        term = np.zeros_like(total)
        for sidx in range(r + 1):
            term = term + comb(r, sidx) * (-1) ** sidx * df(r - sidx, sidx) * dg(sidx, r - sidx)
        term = term * (coef**r / factorial(r))
        total = total + term
        norms.append(float(np.max(np.abs(term))) if term.size else 0.0)
    nonzero = [v for v in norms[1:] if v > 1e-300]
    tail = nonzero[-1] if nonzero else 0.0
    _divergence_check(norms, on_divergence)

    if mask is not None:
        full = np.full(Q.shape, np.nan + 0j)
        full[mask] = total
        total = full
    return SeriesResult(GridFunction(spec, total), norms, tail, mask)


def _divergence_check(norms, mode, floor=1e-12):
    """Flag series whose recent terms keep growing or stop decaying.

    Terms below ``floor`` times the largest are treated as zero, so a
    series that has converged to rounding level is not flagged.  The
    geometric mean of the last four significant terms is compared with the
    four before; a ratio above 1.5 is growth, and a ratio above 0.9 that
    persists up to the final order means the partial sums are not settling.
    """
    norms = np.asarray(norms, dtype=float)
    if norms.size == 0 or norms.max() == 0:
        return
    idx = np.flatnonzero(norms > floor * norms.max())
    if len(idx) < 8:
        return
    recent = norms[idx[-4:]]
    earlier = norms[idx[-8:-4]]
    ratio = float(np.exp(np.mean(np.log(recent)) - np.mean(np.log(earlier))))
    reaches_end = idx[-1] >= len(norms) - 2
    if ratio > 1.5:
        msg = f"Moyal series terms are growing (ratio {ratio:.3g} over the last orders)"
    elif ratio > 0.9 and reaches_end:
        msg = f"Moyal series terms are not decaying (ratio {ratio:.3g}, last term {norms[idx[-1]]:.3g})"
    else:
        return
    diag = {"term_norms": norms.tolist(), "growth_ratio": ratio}
    if mode == "raise":
        raise ConvergenceError(msg, diag)
    warnings.warn(msg, RuntimeWarning, stacklevel=3)


# -- output -----------------------------------------------------------------------------


def write_csv(f: GridFunction, path_or_file):
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q", "p", "re", "im"])
        for i, q in enumerate(f.spec.q):
            for j, p in enumerate(f.spec.p):
                v = f.values[i, j]
                w.writerow([repr(float(q)), repr(float(p)), repr(float(v.real)), repr(float(v.imag))])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def write_marginal_csv(x, values, path_or_file):
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "value"])
        for xi, v in zip(x, values):
            w.writerow([repr(float(xi)), repr(float(np.real(v)))])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)
