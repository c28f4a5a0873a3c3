"""The harmonic oscillator in phase space: projectors, spectra, star exponentials."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np
import scipy.sparse as sp

from .errors import BoundaryStencilWarning, ConvergenceError, SingularityError, UnsupportedOperationError
from .gaussian import GaussianPoly, gaussian_star
from .poly import CANONICAL, HOLOMORPHIC, HbarPoly, PhasePoly, PhysParams, convert
from .star import MOYAL, NORMAL, NORMAL_TO_MOYAL, TransitionOp, as_scheme, transition_apply

MAX_PROJECTOR_INDEX = 32


def hamiltonian(params: PhysParams, basis: str = CANONICAL) -> PhasePoly:
    """p^2/2m + m omega^2 q^2/2, or omega * a * abar in the holomorphic basis."""
    if basis == HOLOMORPHIC:
        return PhasePoly.monomial(1, 1, 0, params.omega, HOLOMORPHIC)
    m, w = params.mass, params.omega
    return PhasePoly({(0, 2, 0): 1 / (2 * m), (2, 0, 0): m * w * w / 2}, CANONICAL)


def _check_index(n, n_max):
    if not isinstance(n, (int, np.integer)) or n < 0 or n > n_max:
        raise ValueError(f"projector index must be an integer in [0, {n_max}], got {n!r}")


def _ground_state(scheme):
    if scheme == MOYAL:
        return GaussianPoly(2.0, -2.0)
    return GaussianPoly(1.0, -1.0)


def projector(n: int, scheme=MOYAL, method: str = "laguerre", n_max: int = MAX_PROJECTOR_INDEX) -> GaussianPoly:
    """Phase-space projector onto the n-th oscillator level.

    method:
      ``"laguerre"``   closed form; Moyal 2(-1)^n L_n(4 a abar/hbar) e^{-2 a abar/hbar},
                       normal (1/hbar^n n!) abar^n a^n e^{-a abar/hbar}
      ``"ladder"``     (1/hbar^n n!) abar^n * pi_0 * a^n with the scheme's own product
      ``"transition"`` (Moyal only) the normal projector mapped by the normal->Moyal operator
    """
    scheme = as_scheme(scheme)
    if scheme not in (MOYAL, NORMAL):
        raise UnsupportedOperationError(f"no projectors for the {scheme} product")
    _check_index(n, n_max)
    if method == "laguerre":
        if scheme == NORMAL:
            return GaussianPoly(PhasePoly({(n, n, -n): 1 / factorial(n)}, HOLOMORPHIC), -1.0)
        terms = {(m, m, -m): 2 * (-1) ** (n + m) * comb(n, m) * 4.0**m / factorial(m) for m in range(n + 1)}
        return GaussianPoly(PhasePoly(terms, HOLOMORPHIC), -2.0)
    if method == "ladder":
        a = PhasePoly.var("a")
        abar = PhasePoly.var("abar")
        out = _ground_state(scheme)
        for _ in range(n):
            out = gaussian_star(gaussian_star(abar, out, scheme), a, scheme)
        return out.times_hbar(-n) * (1 / factorial(n))
    if method == "transition":
        if scheme != MOYAL:
            raise ValueError("the transition construction produces Moyal projectors")
        return transition_apply(TransitionOp(NORMAL_TO_MOYAL), projector(n, NORMAL, "laguerre", n_max))
    raise ValueError(f"unknown projector method {method!r}")


def level_energy(n: int, scheme, params: PhysParams) -> float:
    scheme = as_scheme(scheme)
    shift = 0.5 if scheme == MOYAL else 0.0
    return (n + shift) * params.hbar * params.omega


def level_energy_formal(n: int, scheme, params: PhysParams) -> HbarPoly:
    """The level energy as a polynomial in the formal hbar."""
    shift = 0.5 if as_scheme(scheme) == MOYAL else 0.0
    return HbarPoly({1: (n + shift) * params.omega})


def genvalue_residual(H: PhasePoly, pi: GaussianPoly, E, scheme=MOYAL, params: PhysParams | None = None) -> GaussianPoly:
    """H * pi - E pi.

    ``E`` may be a number or an :class:`HbarPoly`.  A numeric ``E`` mixes a
    bound value of hbar with formal hbar, so inspect the result with
    ``coefficients_at(params.hbar)``.
    """
    scheme = as_scheme(scheme)
    H = convert(H, HOLOMORPHIC, params)
    lhs = gaussian_star(H, pi, scheme)
    if isinstance(E, HbarPoly):
        shifted = PhasePoly.zero(HOLOMORPHIC)
        for k, c in E.coeffs.items():
            shifted = shifted + pi.prefactor.times_hbar(k) * c
        rhs = GaussianPoly(shifted, pi.mu)
    else:
        rhs = pi * complex(E)
    return lhs - rhs


def residual_size(res: GaussianPoly, hbar_value: float, reference: GaussianPoly | None = None) -> float:
    """Largest residual coefficient with hbar bound, relative to the
    coefficient scale of ``reference`` when that exceeds one."""
    scale = 1.0 if reference is None else max(1.0, reference.max_coefficient(hbar_value))
    return res.max_coefficient(hbar_value) / scale


def expectation(f: PhasePoly, pi: GaussianPoly, scheme=MOYAL, params: PhysParams | None = None) -> HbarPoly:
    """(1/2 pi hbar) * integral of f * pi, exactly."""
    return gaussian_star(convert(f, HOLOMORPHIC, params), pi, scheme).integrate()


@dataclass
class SpectralLine:
    index: int
    energy: float
    projector: GaussianPoly = field(repr=False)
    residual: float = 0.0


def spectrum(scheme=MOYAL, n_max: int = 8, params: PhysParams | None = None, tol: float = 1e-12) -> list[SpectralLine]:
    """Levels 0..n_max, each checked against the *-genvalue equation."""
    scheme = as_scheme(scheme)
    params = params or PhysParams()
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    H = hamiltonian(params, HOLOMORPHIC)
    lines = []
    for n in range(n_max + 1):
        pi = projector(n, scheme)
        res = genvalue_residual(H, pi, level_energy_formal(n, scheme, params), scheme)
        size = residual_size(res, params.hbar, pi)
        if size >= tol:
            raise ConvergenceError(f"level {n} fails the genvalue check (residual {size:.3g})", {"residual": size})
        lines.append(SpectralLine(n, level_energy(n, scheme, params), pi, size))
    return lines


def spectral_sum(lines, a, abar, hbar_value: float = 1.0):
    """Sum of E_n pi_n over the given lines, evaluated at (a, abar)."""
    return sum(line.energy * line.projector.evaluate(a, abar, hbar_value) for line in lines)


# -- star exponentials ----------------------------------------------------------------


class StarExponential:
    """Closed-form star exponential Exp(Ht) of the oscillator Hamiltonian.

    Moyal:  sec(omega t/2) exp[(2H / i hbar omega) tan(omega t/2)]
    normal: exp[(e^{-i omega t} - 1) H / hbar omega]

    Both are functions of H alone.  Complex times are accepted.
    """

    def __init__(self, scheme=MOYAL, params: PhysParams | None = None):
        self.scheme = as_scheme(scheme)
        if self.scheme not in (MOYAL, NORMAL):
            raise UnsupportedOperationError(f"no closed-form star exponential for {self.scheme}")
        self.params = params or PhysParams()

    @property
    def period(self) -> float:
        return 4 * np.pi / self.params.omega

    def _cos_half(self, t):
        c = np.cos(0.5 * self.params.omega * np.asarray(t))
        if np.any(np.abs(c) < 1e-12):
            raise SingularityError(f"Moyal star exponential is singular at omega*t = {self.params.omega * t}")
        return c

    def exponent_mu(self, t) -> complex:
        """mu(t) such that Exp(Ht) = prefactor * exp(mu a abar / hbar)."""
        w = self.params.omega
        if self.scheme == MOYAL:
            self._cos_half(t)
            return complex(-2j * np.tan(0.5 * w * t))
        return complex(np.exp(-1j * w * t) - 1)

    def as_gaussian(self, t) -> GaussianPoly:
        mu = self.exponent_mu(t)
        pref = 1.0 / complex(self._cos_half(t)) if self.scheme == MOYAL else 1.0
        return GaussianPoly(pref, mu)

    def __call__(self, H, t):
        hw = self.params.hbar * self.params.omega
        H = np.asarray(H)
        t = np.asarray(t)
        if self.scheme == MOYAL:
            c = self._cos_half(t)
            tn = np.tan(0.5 * self.params.omega * t)
            return np.exp(-2j * H * tn / hw) / c
        return np.exp((np.exp(-1j * self.params.omega * t) - 1) * H / hw)


def star_exponential_closed(scheme, t, H=1.0, params: PhysParams | None = None):
    """Exp(Ht) evaluated at energies H and time t."""
    return StarExponential(scheme, params)(H, t)


def _stencils(n: int, h: float):
    """Fourth-order first/second derivative matrices, one-sided at both ends."""
    c1 = np.array([1, -8, 0, 8, -1]) / 12
    c2 = np.array([-1, 16, -30, 16, -1]) / 12
    offs = [-2, -1, 0, 1, 2]
    d1 = sp.diags([np.full(n - abs(o), c) for o, c in zip(offs, c1)], offs, shape=(n, n)).tolil()
    d2 = sp.diags([np.full(n - abs(o), c) for o, c in zip(offs, c2)], offs, shape=(n, n)).tolil()
    one_sided1 = (np.array([-25, 48, -36, 16, -3]) / 12, np.array([-3, -10, 18, -6, 1]) / 12)
    one_sided2 = (np.array([35, -104, 114, -56, 11]) / 12, np.array([11, -20, 6, 4, -1]) / 12)
    for r in range(2):
        for mat in (d1, d2):
            mat[r, :] = 0
            mat[n - 1 - r, :] = 0
        d1[r, :5] = one_sided1[r]
        d2[r, :5] = one_sided2[r]
        d1[n - 1 - r, -5:] = -one_sided1[r][::-1]
        d2[n - 1 - r, -5:] = one_sided2[r][::-1]
    return d1.tocsr() / h, d2.tocsr() / h**2


@dataclass
class ODEResult:
    H: np.ndarray
    values: np.ndarray
    t: float
    dt: float
    steps: int


def star_exponential_ode(
    t_final: float,
    h_max: float = 6.0,
    n_points: int = 256,
    dt: float = 1e-4,
    params: PhysParams | None = None,
    padding: float = 0.5,
    blowup: float = 1e8,
) -> ODEResult:
    """Integrate i hbar dE/dt = (H - (hbar w)^2/4 d_H - (hbar w)^2/4 H d_H^2) E from E = 1.

    Method of lines: fourth-order finite differences in H, classical RK4 in
    time.  The grid is extended by ``padding * h_max`` beyond the reported
    range so the one-sided stencil at the far end does not pollute the
    result; ``n_points`` covers the reported range [0, h_max].  ``dt`` is
    reduced automatically if it exceeds the RK4 stability bound.
    """
    params = params or PhysParams()
    hbar, w = params.hbar, params.omega
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if w * t_final >= np.pi - 1e-12:
        raise SingularityError(f"star exponential has its first singularity at omega*t = pi (got {w * t_final:g})")
    if padding <= 0:
        warnings.warn("no padding: one-sided stencil at H_max limits accuracy near the edge", BoundaryStencilWarning)
    h = h_max / (n_points - 1)
    n_total = n_points + int(np.ceil(padding * h_max / h))
    H = np.arange(n_total) * h
    d1, d2 = _stencils(n_total, h)
    k = 0.25 * (hbar * w) ** 2
    L = sp.diags(H) - k * d1 - k * sp.diags(H) @ d2
    A = (L * (-1j / hbar)).tocsr()

    # Gershgorin bound on the spectral radius; RK4 is stable on i*[-2.8, 2.8]
    radius = np.max(np.abs(A).sum(axis=1))
    steps = max(1, int(np.ceil(t_final / dt)))
    if t_final / steps * radius > 2.5:
        steps = int(np.ceil(t_final * radius / 2.5))
    step = t_final / steps if t_final > 0 else 0.0

    E = np.ones(n_total, dtype=complex)
    for s in range(steps if t_final > 0 else 0):
        k1 = A @ E
        k2 = A @ (E + 0.5 * step * k1)
        k3 = A @ (E + 0.5 * step * k2)
        k4 = A @ (E + step * k3)
        E = E + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(E)) or np.max(np.abs(E)) > blowup:
            raise ConvergenceError("star exponential integration blew up", {"t": (s + 1) * step})
    keep = n_points
    return ODEResult(H[:keep], E[:keep], t_final, step, steps if t_final > 0 else 0)


# -- Fourier-Dirichlet projection -------------------------------------------------------


def fd_project(
    exp: StarExponential,
    E: float,
    H,
    n_samples: int = 256,
    damping: float | None = None,
    n_max: int | None = None,
    reweight: bool = True,
):
    """(omega/4 pi) * integral over one period of Exp(Ht) e^{iEt/hbar} dt, at energies H.

    The Moyal star exponential has poles on the real time axis, so the
    contour is shifted to t - i*tau (tau = ``damping``/omega, default 1 for
    Moyal and 0 for normal).  For a periodic integrand this does not change
    the Fourier coefficients.  The periodic trapezoid rule on ``n_samples``
    points is exact for all harmonics below ``n_samples``.

    With ``reweight=False`` the phase factor is taken at real t, giving
    sum_n pi_n e^{-E_n tau/hbar} S(E_n - E) with S the finite-window
    kernel; peaks then sit exactly at the levels for any E.
    """
    params = exp.params
    hbar, w = params.hbar, params.omega
    if damping is None:
        damping = 1.0 if exp.scheme == MOYAL else 0.0
    if n_max is not None and 2 * n_max + 2 > n_samples // 2:
        raise ValueError(f"{n_samples} samples cannot resolve levels up to n = {n_max}")
    tau = damping / w
    T = exp.period
    t = np.arange(n_samples) * (T / n_samples) - 1j * tau
    H = np.asarray(H, dtype=float)
    vals = exp(H[..., None], t)
    phase = np.exp(1j * E * (t if reweight else t.real) / hbar)
    return np.mean(vals * phase, axis=-1)


def projector_on_energy(n: int, scheme, H, params: PhysParams):
    """pi_n as a function of H = omega a abar."""
    pi = projector(n, scheme)
    x = np.asarray(H, dtype=float) / params.omega
    return pi.evaluate(np.sqrt(x), np.sqrt(x), params.hbar)


def discover_spectrum(
    scheme=MOYAL,
    params: PhysParams | None = None,
    e_max: float | None = None,
    step: float | None = None,
    threshold: float = 1e-3,
    h_max: float | None = None,
    n_h: int = 400,
    damping: float | None = None,
):
    """Scan E and report energies where the projection is non-negligible.

    Candidates are local maxima of the unweighted projection norm on the E
    grid (contour damping 0.3/omega for Moyal, none for normal).  A candidate is a line when the plain projection
    there has L2 norm (over an H grid) above ``threshold`` times the
    ground-state norm.
    """
    params = params or PhysParams()
    scheme = as_scheme(scheme)
    hw = params.hbar * params.omega
    e_max = 8 * hw if e_max is None else e_max
    step = hw / 20 if step is None else step
    h_max = 4 * e_max + 10 * hw if h_max is None else h_max
    if damping is None:
        damping = 0.3 if scheme == MOYAL else 0.0
    exp = StarExponential(scheme, params)
    H = np.linspace(0, h_max, n_h)
    energies = np.arange(0, e_max + step / 2, step)

    def l2(values):
        return np.sqrt(np.trapezoid(np.abs(values) ** 2, H))

    # peaks are located on the unweighted projection, whose window kernel is
    # symmetric about each level; the threshold applies to the true projection
    shape = np.array([l2(fd_project(exp, e, H, 1024, damping, reweight=False)) for e in energies])
    ref = l2(projector_on_energy(0, scheme, H, params))
    found = []
    norms = np.zeros_like(shape)
    for i, v in enumerate(shape):
        left = shape[i - 1] if i > 0 else -np.inf
        right = shape[i + 1] if i + 1 < len(shape) else -np.inf
        if v >= left and v >= right:
            norms[i] = l2(fd_project(exp, energies[i], H))
            if norms[i] > threshold * ref:
                found.append(float(energies[i]))
    return found, energies, shape


def fd_partial_sum(scheme, n_terms: int, H, t, params: PhysParams | None = None):
    """Sum over n < n_terms of pi_n(H) exp(-i E_n t / hbar)."""
    params = params or PhysParams()
    out = 0j
    for n in range(n_terms):
        out = out + projector_on_energy(n, scheme, H, params) * np.exp(-1j * level_energy(n, scheme, params) * t / params.hbar)
    return out
