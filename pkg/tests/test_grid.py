import io
import warnings

import numpy as np
import pytest

from starquant.errors import AliasingWarning, BoundaryDecayError, ConvergenceError
from starquant.gaussian import GaussianPoly, gaussian_star
from starquant.grid import (
    GridFunction,
    GridSpec,
    check_decay,
    grid_star_poly,
    grid_star_series,
    integrate,
    marginal,
    moments,
    sample,
    spectral_derivative,
    write_csv,
    write_marginal_csv,
)
from starquant.oscillator import hamiltonian, projector
from starquant.orthopoly import oscillator_momentum_densities, oscillator_wavefunctions
from starquant.poly import HOLOMORPHIC, PhasePoly, PhysParams
from starquant.star import MOYAL, star_poly

UNIT = PhysParams()
SPEC = GridSpec(256, 256, params=UNIT)
q, p = PhasePoly.var("q"), PhasePoly.var("p")


@pytest.fixture(scope="module")
def pi0():
    return sample(projector(0, MOYAL), SPEC)


def test_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(100, 128)
    with pytest.raises(ValueError):
        GridSpec(8, 8)
    with pytest.raises(ValueError):
        GridSpec(16, 16, l_q=-1.0)
    assert GridSpec(params=PhysParams(hbar=4.0)).l_q == pytest.approx(16.0)


def test_sampling_examples(pi0):
    ones = sample(PhasePoly.constant(1.0), SPEC)
    assert np.all(ones.values == 1)
    i0 = SPEC.n_q // 2
    assert SPEC.q[i0] == 0 and SPEC.p[i0] == 0
    assert pi0.values[i0, i0] == pytest.approx(2.0)
    H = sample(hamiltonian(UNIT), SPEC)
    L = SPEC.l_q
    assert H.values[0, 0] == pytest.approx(L**2)


def test_grid_functions_are_immutable(pi0):
    with pytest.raises(ValueError):
        pi0.values[0, 0] = 1.0


def test_shape_check():
    with pytest.raises(ValueError):
        GridFunction(SPEC, np.zeros((3, 3)))


def test_normalization(pi0):
    assert integrate(pi0) == pytest.approx(1.0, abs=1e-8)


def test_boundary_decay_enforced():
    with pytest.raises(BoundaryDecayError):
        integrate(sample(PhasePoly.constant(1.0), SPEC))
    with pytest.raises(BoundaryDecayError):
        check_decay(sample(lambda Q, P: np.exp(-0.01 * (Q**2 + P**2)), SPEC))


def test_gaussian_moments_exact(pi0):
    # (1/2 pi hbar) integral q^2 pi_0 = hbar/(2 m w); the q^4 moment is 3 (hbar/2)^2
    q2 = integrate(pi0 * sample(q**2, SPEC))
    q4 = integrate(pi0 * sample(q**4, SPEC))
    assert q2 == pytest.approx(0.5, abs=1e-10)
    assert q4 == pytest.approx(0.75, abs=1e-10)


def test_position_marginal_ground_state(pi0):
    x, m = marginal(pi0, "q")
    want = np.sqrt(1 / np.pi) * np.exp(-(x**2))
    assert np.max(np.abs(m - want)) < 1e-6


def test_momentum_marginal_first_excited():
    g = sample(projector(1, MOYAL), SPEC)
    x, m = marginal(g, "p")
    assert np.max(np.abs(m - oscillator_momentum_densities(1, x)[1])) < 1e-6


@pytest.mark.parametrize("n", range(6))
def test_marginals_normalized(n):
    g = sample(projector(n, MOYAL), SPEC)
    for axis in ("q", "p"):
        x, m = marginal(g, axis)
        assert np.sum(m) * (x[1] - x[0]) == pytest.approx(1.0, abs=1e-8)


def test_marginal_general_units():
    params = PhysParams(hbar=0.5, mass=2.0, omega=1.5)
    spec = GridSpec(256, 256, params=params)
    g = sample(projector(2, MOYAL), spec)
    x, m = marginal(g, "q")
    assert np.max(np.abs(m - oscillator_wavefunctions(2, x, 0.5, 2.0, 1.5)[2] ** 2)) < 1e-6


def test_marginal_axis_check(pi0):
    with pytest.raises(ValueError):
        marginal(pi0, "r")


@pytest.mark.parametrize("hbar", [1.0, 0.3])
def test_minimum_uncertainty(hbar):
    params = PhysParams(hbar=hbar)
    m = moments(sample(projector(0, MOYAL), GridSpec(256, 256, params=params)))
    assert np.sqrt(m["var_q"] * m["var_p"]) == pytest.approx(hbar / 2, abs=1e-8)


def _fwhm(x, y):
    half = y.max() / 2
    above = np.flatnonzero(y >= half)
    lo, hi = above[0], above[-1]
    left = np.interp(half, [y[lo - 1], y[lo]], [x[lo - 1], x[lo]])
    right = np.interp(half, [y[hi + 1], y[hi]], [x[hi + 1], x[hi]])
    return right - left


def test_classical_limit_concentrates():
    spec = GridSpec(512, 16, l_q=4.0, l_p=4.0)
    i0 = spec.n_p // 2
    widths = []
    for hbar in (1.0, 0.25, 1 / 16):
        g = sample(projector(0, MOYAL), spec, hbar_value=hbar)
        widths.append(_fwhm(spec.q, g.values[:, i0].real) / np.sqrt(hbar))
    assert max(widths) / min(widths) < 1.05


def test_spectral_derivative(pi0):
    d = spectral_derivative(pi0, 1, 0)
    Q, P = SPEC.mesh()
    assert np.max(np.abs(d.values - (-2 * Q) * pi0.values)) < 1e-10


def test_aliasing_report():
    narrow = sample(lambda Q, P: np.exp(-50 * (Q**2 + P**2)), SPEC)
    with pytest.warns(AliasingWarning):
        spectral_derivative(narrow, 1, 0)


def test_shift_formula_eigenvalue(pi0):
    out = grid_star_poly(hamiltonian(UNIT), pi0)
    assert np.max(np.abs(out.values - 0.5 * pi0.values)) < 1e-7


def test_shift_formula_identity_and_annihilator(pi0):
    assert np.max(np.abs(grid_star_poly(PhasePoly.constant(1.0), pi0).values - pi0.values)) == 0
    a = PhasePoly.var("a")
    assert np.max(np.abs(grid_star_poly(a, pi0).values)) < 1e-7


def test_shift_formula_against_gaussian_engine(pi0):
    f = q**2 * p + 2 * p
    want = sample(gaussian_star(f, projector(0, MOYAL), MOYAL, UNIT), SPEC)
    assert np.max(np.abs(grid_star_poly(f, pi0).values - want.values)) < 1e-7


def test_series_order_zero_is_pointwise(pi0):
    g = sample(projector(1, MOYAL), SPEC)
    res = grid_star_series(pi0, g, 0)
    assert np.array_equal(res.value.values, (pi0 * g).values)


def test_series_exact_for_polynomials():
    spec = GridSpec(32, 32, l_q=3.0, l_p=3.0)
    f, g = q**2 * p + q, p**2 - 3 * q * p
    want = sample(star_poly(f, g), spec)
    for K in (3, 5):
        res = grid_star_series(f, g, K, spec=spec)
        assert np.max(np.abs(res.value.values - want.values)) < 1e-12


def test_series_converges_for_wide_gaussians():
    spec = GridSpec(64, 64, params=UNIT)
    g = GaussianPoly(1.0, -0.5)
    res = grid_star_series(g, g, 30, spec=spec, window=1.0)
    closed = sample(gaussian_star(g, g), spec)
    assert np.max(np.abs(res.value.values[res.mask] - closed.values[res.mask])) < 1e-6
    assert res.tail < 1e-12
    assert np.isnan(res.value.values[0, 0])


def test_divergence_detector_on_projector_series():
    pi0 = projector(0, MOYAL)
    spec = GridSpec(64, 64, params=UNIT)
    with pytest.raises(ConvergenceError) as info:
        grid_star_series(pi0, pi0, 40, spec=spec, window=1.5)
    assert len(info.value.diagnostics["term_norms"]) == 41
    with pytest.warns(RuntimeWarning):
        res = grid_star_series(pi0, pi0, 40, spec=spec, window=1.5, on_divergence="warn")
    assert res.tail > 1


def test_series_order_bound(pi0):
    with pytest.raises(ValueError):
        grid_star_series(pi0, pi0, 41)


def test_csv_layout():
    spec = GridSpec(16, 16)
    g = sample(projector(0, MOYAL), spec)
    buf = io.StringIO()
    write_csv(g, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "q,p,re,im"
    assert len(lines) == 1 + 16 * 16
    first, second = lines[1].split(","), lines[2].split(",")
    assert first[0] == second[0] and first[1] != second[1]
    buf = io.StringIO()
    write_marginal_csv(spec.q, np.ones(16), buf)
    assert buf.getvalue().splitlines()[0] == "x,value"
