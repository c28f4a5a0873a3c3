import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import assert_poly_close, holo_polys, polys
from starquant.errors import BasisMismatchError, ExponentOverflowError
from starquant.oscillator import hamiltonian
from starquant.poly import (
    CANONICAL,
    HOLOMORPHIC,
    HbarPoly,
    PhasePoly,
    PhysParams,
    differentiate,
    evaluate,
    poisson_bracket,
    to_canonical,
    to_holomorphic,
)

q, p = PhasePoly.var("q"), PhasePoly.var("p")
a, abar = PhasePoly.var("a"), PhasePoly.var("abar")


def test_params_must_be_positive():
    with pytest.raises(ValueError):
        PhysParams(hbar=0.0)
    with pytest.raises(ValueError):
        PhysParams(mass=-1.0)


def test_hbar_poly_drops_zeros():
    h = HbarPoly({0: 1.0, 2: 0.0})
    assert h.coeffs == {0: 1.0}
    assert (h - h).coeffs == {}


def test_bracket_of_canonical_pair():
    assert poisson_bracket(q, p) == PhasePoly.constant(1.0)


def test_bracket_of_squares():
    assert poisson_bracket(q**2, p**2) == 4 * q * p


def test_holomorphic_bracket_is_transported():
    assert poisson_bracket(a, abar) == PhasePoly.constant(-1j, HOLOMORPHIC)


def test_bracket_basis_mismatch():
    with pytest.raises(BasisMismatchError):
        poisson_bracket(q, a)


@given(polys())
def test_bracket_antisymmetric_self(f):
    assert poisson_bracket(f, f).is_zero()


@given(polys(3), polys(3), polys(3))
def test_jacobi_identity(f, g, h):
    total = (
        poisson_bracket(f, poisson_bracket(g, h))
        + poisson_bracket(g, poisson_bracket(h, f))
        + poisson_bracket(h, poisson_bracket(f, g))
    )
    assert total.is_zero()


@given(polys(3), polys(3), polys(3))
def test_leibniz(f, g, h):
    assert poisson_bracket(f, g * h) == poisson_bracket(f, g) * h + g * poisson_bracket(f, h)


@given(polys(3), polys(3), polys(3))
def test_ring_axioms(f, g, h):
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f + g == g + f


def test_hamiltonian_becomes_omega_a_abar():
    for params in (PhysParams(), PhysParams(hbar=0.7, mass=2.0, omega=3.0)):
        got = to_holomorphic(hamiltonian(params), params)
        assert_poly_close(got, PhasePoly.monomial(1, 1, 0, params.omega, HOLOMORPHIC))


def test_a_abar_in_canonical_variables():
    params = PhysParams(mass=2.0, omega=0.5)
    mw = params.mass * params.omega
    want = PhasePoly({(2, 0, 0): mw / 2, (0, 2, 0): 1 / (2 * mw)})
    assert_poly_close(to_canonical(a * abar, params), want)


@given(polys(4), st.sampled_from([PhysParams(), PhysParams(1.3, 0.4, 2.5)]))
def test_coordinate_round_trip(f, params):
    assert_poly_close(to_canonical(to_holomorphic(f, params), params), f, 1e-12)


@given(holo_polys(4))
def test_coordinate_round_trip_holomorphic(f):
    params = PhysParams(0.5, 2.0, 1.5)
    assert_poly_close(to_holomorphic(to_canonical(f, params), params), f, 1e-12)


def test_derivatives():
    assert differentiate(q**2 * p, "q") == 2 * q * p
    assert differentiate(q**2 * p, "p", 2).is_zero()
    assert (a**2 * abar**2).differentiate("a").differentiate("abar") == 4 * a * abar


@given(polys(4))
def test_derivatives_commute(f):
    assert f.differentiate("q").differentiate("p") == f.differentiate("p").differentiate("q")


def test_evaluate():
    assert evaluate(q * p, (2, 3)) == 6
    assert evaluate(PhasePoly.hbar() * q, (1, 0), 0.5) == 0.5
    assert evaluate(hamiltonian(PhysParams()), (1, 1)) == pytest.approx(1.0)


def test_evaluate_broadcasts():
    Q = np.linspace(-1, 1, 5)
    np.testing.assert_allclose((q * q + p).evaluate((Q, 2 * Q)), Q**2 + 2 * Q)


def test_exponent_bound():
    with pytest.raises(ExponentOverflowError):
        q**70


def test_basis_mismatch_on_addition():
    with pytest.raises(BasisMismatchError):
        q + a


def test_hbar_grading():
    f = q * p + PhasePoly.hbar(2) * 3
    assert f.hbar_part(2) == PhasePoly.constant(3.0)
    assert f.hbar_part(1).is_zero()
    assert f.basis == CANONICAL
