"""Named self-check suites; each returns a SuiteResult with evidence."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .gaussian import GaussianPoly, gaussian_star
from .grid import GridSpec, grid_star_series, integrate, marginal, moments, sample
from .kernel import convergence_order, hermite_laguerre_check, hermite_laguerre_scale, kernel_to_phase
from .orthopoly import oscillator_momentum_densities, oscillator_wavefunctions
from .oscillator import (
    StarExponential,
    fd_project,
    projector,
    projector_on_energy,
    spectrum,
    star_exponential_closed,
    star_exponential_ode,
)
from .poly import CANONICAL, HOLOMORPHIC, PhasePoly, PhysParams, poisson_bracket
from .star import MOYAL, NORMAL, STANDARD, STANDARD_TO_MOYAL, TransitionOp, star_commutator, star_poly, transition_apply
from .weyl import STANDARD_ORDER, homomorphism_residual, projector_matrix, theta_order, weyl_symbol


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0


def random_poly(rng, degree: int, basis: str = CANONICAL, density: float = 0.6, coeff: int = 3) -> PhasePoly:
    """Random polynomial with small Gaussian-integer coefficients."""
    terms = {}
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            if rng.random() < density:
                terms[(i, j, 0)] = complex(rng.integers(-coeff, coeff + 1), rng.integers(-coeff, coeff + 1))
    if not terms:
        terms[(degree, 0, 0)] = 1.0
    return PhasePoly(terms, basis)


def check_equivalence(n_pairs=100, degree=6, seed=0):
    """T(f *_S g) == T f *_M T g for the standard->Moyal operator."""
    rng = np.random.default_rng(seed)
    T = TransitionOp(STANDARD_TO_MOYAL)
    worst = 0.0
    exact = 0
    for _ in range(n_pairs):
        f, g = random_poly(rng, degree), random_poly(rng, degree)
        lhs = transition_apply(T, star_poly(f, g, STANDARD))
        rhs = star_poly(transition_apply(T, f), transition_apply(T, g), MOYAL)
        d = (lhs - rhs).max_abs() / max(1.0, lhs.max_abs())
        worst = max(worst, d)
        exact += lhs == rhs
    return worst < 1e-12, {"pairs": n_pairs, "max_rel_coeff_diff": worst, "bit_exact_pairs": int(exact)}


def check_projector_form(n_max=8):
    """Laguerre, ladder and transition constructions agree."""
    worst = 0.0
    for n in range(n_max + 1):
        ref = projector(n, MOYAL)
        for method in ("ladder", "transition"):
            d = (projector(n, MOYAL, method) - ref).prefactor.max_abs() / ref.prefactor.max_abs()
            worst = max(worst, d)
        d = (projector(n, NORMAL, "ladder") - projector(n, NORMAL)).prefactor.max_abs()
        worst = max(worst, d)
    return worst < 1e-13, {"n_max": n_max, "max_rel_diff": worst}


def check_idempotency(n_max=5):
    """Normalization, idempotency and orthogonality of the Moyal projectors."""
    pis = [projector(n, MOYAL) for n in range(n_max + 1)]
    norm_err = max(abs(p.integrate().evaluate(1.0) - 1) for p in pis)
    worst = 0.0
    for n, pn in enumerate(pis):
        for m, pm in enumerate(pis):
            prod = gaussian_star(pn, pm, MOYAL)
            target = pn if n == m else GaussianPoly(PhasePoly.zero(HOLOMORPHIC), pn.mu)
            worst = max(worst, (prod - target).max_coefficient(1.0))
    return worst < 1e-10 and norm_err < 1e-12, {"n_max": n_max, "max_residual": worst, "normalization_error": norm_err}


def check_weyl_inverse(dim=32, degree=4, n_states=3, seed=1, spec=None):
    """weyl_symbol(Theta_W(f) |n><n|) == f * pi_n on a grid."""
    rng = np.random.default_rng(seed)
    params = PhysParams()
    spec = spec or GridSpec(64, 64)
    worst = 0.0
    f = random_poly(rng, degree)
    for n in range(n_states):
        op = theta_order(f, "weyl", dim, params) @ projector_matrix(n, dim)
        got = weyl_symbol(op, spec)
        want = sample(gaussian_star(f, projector(n, MOYAL), MOYAL, params), spec)
        worst = max(worst, float(np.max(np.abs(got.values - want.values))) / max(1.0, want.max_abs()))
    return worst < 1e-8, {"dim": dim, "max_rel_diff": worst}


def check_hermite_laguerre(n_max=6, points=(0.0, 0.5, 1.0)):
    worst = 0.0
    for n in range(n_max + 1):
        for a in points:
            for b in points:
                lhs, rhs = hermite_laguerre_check(n, a, b)
                worst = max(worst, abs(lhs - rhs) / hermite_laguerre_scale(n))
    return worst < 1e-8, {"n_max": n_max, "max_rel_diff": worst}


def check_path_integral(t=0.5, slices=(64, 128, 256, 512)):
    slope, errs = convergence_order(t, slices)
    ok = abs(slope - 2.0) <= 0.1 and errs[-1] < 1e-4
    return ok, {"order": slope, "errors": errs, "slices": list(slices)}


def check_bridge(times=(0.3, 1.0, 2.0)):
    worst = 0.0
    q = np.linspace(-2, 2, 5)
    Q, P = np.meshgrid(q, q, indexing="ij")
    for t in times:
        got = kernel_to_phase(t, Q, P)
        want = star_exponential_closed(MOYAL, t, (Q**2 + P**2) / 2)
        worst = max(worst, float(np.max(np.abs(got - want) / np.abs(want))))
    return worst < 1e-5, {"times": list(times), "max_rel_diff": worst}


def check_spectrum(n_max=8):
    params = PhysParams()
    moyal = spectrum(MOYAL, n_max, params)
    normal = spectrum(NORMAL, n_max, params)
    ok = all(abs(l.energy - (l.index + 0.5)) < 1e-15 for l in moyal) and all(abs(l.energy - l.index) < 1e-15 for l in normal)
    res = max(l.residual for l in moyal + normal)
    return ok and res < 1e-12, {"moyal": [l.energy for l in moyal], "normal": [l.energy for l in normal], "max_residual": res}


def check_correspondence(n_pairs=100, degree=4, seed=2):
    """hbar^1 part of (1/i)[f, g]_* is the Poisson bracket; Moyal has no hbar^2 part."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    even_ok = True
    for _ in range(n_pairs):
        f, g = random_poly(rng, degree), random_poly(rng, degree)
        comm = star_commutator(f, g, MOYAL) * (-1j)
        worst = max(worst, (comm.hbar_part(1) - poisson_bracket(f, g)).max_abs())
        even_ok &= comm.hbar_part(0).is_zero() and comm.hbar_part(2).is_zero()
    return worst < 1e-12 and even_ok, {"pairs": n_pairs, "max_diff": worst, "even_orders_vanish": bool(even_ok)}


def check_homomorphism(n_pairs=3, degree=4, dim=32, seed=3):
    rng = np.random.default_rng(seed)
    worst = {}
    for pairing, basis in (("weyl", CANONICAL), ("normal", HOLOMORPHIC), ("standard", CANONICAL)):
        worst[pairing] = max(
            homomorphism_residual(random_poly(rng, degree, basis), random_poly(rng, degree, basis), pairing, dim)
            for _ in range(n_pairs)
        )
    q, p = PhasePoly.var("q"), PhasePoly.var("p")
    mismatch = homomorphism_residual(q, p, (STANDARD_ORDER, MOYAL), 16)
    ok = max(worst.values()) < 1e-9 and mismatch > 0.1
    return ok, {"residuals": worst, "mismatched_pairing_residual": mismatch}


def check_marginals(n_max=5, spec=None):
    params = PhysParams()
    spec = spec or GridSpec(256, 256, params=params)
    worst_q = worst_p = 0.0
    for n in range(n_max + 1):
        g = sample(projector(n, MOYAL), spec)
        q, mq = marginal(g, "q")
        p, mp = marginal(g, "p")
        worst_q = max(worst_q, float(np.max(np.abs(mq - oscillator_wavefunctions(n, q)[n] ** 2))))
        worst_p = max(worst_p, float(np.max(np.abs(mp - oscillator_momentum_densities(n, p)[n]))))
    m = moments(sample(projector(0, MOYAL), spec))
    unc = float(np.sqrt(m["var_q"] * m["var_p"]))
    ok = worst_q < 1e-6 and worst_p < 1e-6 and abs(unc - params.hbar / 2) < 1e-8
    return ok, {"position_max_diff": worst_q, "momentum_max_diff": worst_p, "sigma_q_sigma_p": unc}


def check_star_exponential(t=0.3, n_max=5):
    params = PhysParams()
    r = star_exponential_ode(t, params=params)
    exact = star_exponential_closed(MOYAL, t, r.H, params)
    ode_err = float(np.max(np.abs(r.values - exact) / np.abs(exact)))
    exp = StarExponential(MOYAL, params)
    H = np.linspace(0, 40, 2001)
    fd_err = 0.0
    for n in range(n_max + 1):
        got = fd_project(exp, (n + 0.5) * params.hbar * params.omega, H)
        want = projector_on_energy(n, MOYAL, H, params)
        fd_err = max(fd_err, float(np.sqrt(np.trapezoid(np.abs(got - want) ** 2, H))))
    return ode_err < 1e-6 and fd_err < 1e-8, {"ode_max_rel_err": ode_err, "fd_max_l2_err": fd_err, "ode_steps": r.steps}


def check_grid_star(K=40, window=1.5):
    """Truncated-series grid product of pi_0 with itself against the closed form.

    The series is summed to order K regardless of the divergence detector so
    the reported error is the actual partial-sum error.
    """
    params = PhysParams()
    spec = GridSpec(256, 256, params=params)
    pi0 = projector(0, MOYAL)
    g = sample(pi0, spec)
    exact = sample(gaussian_star(pi0, pi0), spec)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        res = grid_star_series(g, g, K, window=window, on_divergence="warn")
    err = float(np.nanmax(np.abs(res.value.values - exact.values)))
    flagged = [str(w.message) for w in caught if issubclass(w.category, RuntimeWarning)]
    return err < 1e-6, {"K": K, "max_abs_err": err, "tail": res.tail, "divergence": flagged}


SUITES = {
    "equivalence": check_equivalence,
    "projector-form": check_projector_form,
    "idempotency": check_idempotency,
    "weyl-inverse": check_weyl_inverse,
    "hermite-laguerre": check_hermite_laguerre,
    "path-integral": check_path_integral,
    "bridge": check_bridge,
    "spectrum": check_spectrum,
    "correspondence": check_correspondence,
    "homomorphism": check_homomorphism,
    "marginals": check_marginals,
    "star-exponential": check_star_exponential,
    "grid-star": check_grid_star,
}


def run_suite(name: str) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; expected one of {sorted(SUITES)} or 'all'")
    start = time.perf_counter()
    try:
        ok, details = SUITES[name]()
    except Exception as exc:  # a crashing suite is a failing suite
        ok, details = False, {"error": f"{type(exc).__name__}: {exc}"}
    return SuiteResult(name, bool(ok), details, time.perf_counter() - start)


def run_all() -> list[SuiteResult]:
    return [run_suite(name) for name in SUITES]
