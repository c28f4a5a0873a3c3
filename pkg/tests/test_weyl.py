import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import holo_polys, polys
from starquant.errors import TruncationWarning
from starquant.grid import GridSpec, sample
from starquant.oscillator import expectation, hamiltonian, projector
from starquant.poly import CANONICAL, HOLOMORPHIC, PhasePoly, PhysParams, to_holomorphic
from starquant.star import MOYAL, NORMAL, STANDARD
from starquant.weyl import (
    ANTINORMAL_ORDER,
    ANTISTANDARD_ORDER,
    NORMAL_ORDER,
    STANDARD_ORDER,
    WEYL,
    FockMatrix,
    OrderingSpec,
    coherent_symbol,
    fock_operators,
    homomorphism_residual,
    projector_matrix,
    theta_order,
    theta_weyl_enumerated,
    weyl_symbol,
)

q, p = PhasePoly.var("q"), PhasePoly.var("p")
a, abar = PhasePoly.var("a"), PhasePoly.var("abar")
PARAMS = PhysParams(hbar=0.7, mass=1.3, omega=0.8)
D = 12


def ops(params=PARAMS, dim=D + 4):
    o = fock_operators(params, dim)
    return {k: v.entries for k, v in o.items()}


def block(M, k=D):
    return np.asarray(M)[:k, :k]


def test_ladder_commutator():
    o = ops()
    comm = o["a"] @ o["adag"] - o["adag"] @ o["a"]
    np.testing.assert_allclose(comm[:-1, :-1], PARAMS.hbar * np.eye(D + 3), atol=1e-13)


def test_weyl_hamiltonian_diagonal():
    o = ops()
    n = np.arange(D + 3)
    np.testing.assert_allclose(o["H"][:-1, :-1], np.diag((n + 0.5) * PARAMS.hbar * PARAMS.omega), atol=1e-13)


def test_position_momentum_hermitian():
    o = ops()
    np.testing.assert_allclose(o["Q"], o["Q"].conj().T)
    np.testing.assert_allclose(o["P"], o["P"].conj().T)
    comm = o["Q"] @ o["P"] - o["P"] @ o["Q"]
    np.testing.assert_allclose(comm[:-1, :-1], 1j * PARAMS.hbar * np.eye(D + 3), atol=1e-13)


def test_fock_dimension_check():
    with pytest.raises(ValueError):
        fock_operators(PARAMS, 1)


def test_ordering_examples():
    o = ops()
    Q, P, A, Ad = o["Q"], o["P"], o["a"], o["adag"]
    np.testing.assert_allclose(block(theta_order(q * p, STANDARD_ORDER, D, PARAMS)), block(Q @ P), atol=1e-13)
    np.testing.assert_allclose(block(theta_order(q * p, ANTISTANDARD_ORDER, D, PARAMS)), block(P @ Q), atol=1e-13)
    np.testing.assert_allclose(block(theta_order(q * p, WEYL, D, PARAMS)), block((Q @ P + P @ Q) / 2), atol=1e-13)
    np.testing.assert_allclose(block(theta_order(a * abar, NORMAL_ORDER, D, PARAMS)), block(Ad @ A), atol=1e-13)
    np.testing.assert_allclose(block(theta_order(a * abar, ANTINORMAL_ORDER, D, PARAMS)), block(A @ Ad), atol=1e-13)


def test_weyl_points_agree():
    assert OrderingSpec(CANONICAL, 0) == OrderingSpec(HOLOMORPHIC, 0)
    f = q**2 * p + 3 * p**3
    lhs = theta_order(f, WEYL, D, PARAMS)
    rhs = theta_order(to_holomorphic(f, PARAMS), OrderingSpec(HOLOMORPHIC, 0), D, PARAMS)
    np.testing.assert_allclose(lhs.entries, rhs.entries, atol=1e-12)


def test_ordering_spec_validation():
    with pytest.raises(ValueError):
        OrderingSpec(CANONICAL, 2)


@settings(max_examples=30)
@given(st.integers(0, 6).flatmap(lambda m: st.tuples(st.just(m), st.integers(0, 6 - m))), st.sampled_from([CANONICAL, HOLOMORPHIC]))
def test_weyl_recursion_matches_enumeration(mn, basis):
    m, n = mn
    f = PhasePoly.monomial(m, n, 0, 1.0, basis)
    lhs = theta_order(f, WEYL, 10, PARAMS)
    rhs = theta_weyl_enumerated(f, 10, PARAMS)
    np.testing.assert_allclose(lhs.entries, rhs.entries, atol=1e-11)


@given(polys(3), polys(3), st.builds(complex, st.integers(-3, 3), st.integers(-3, 3)))
def test_theta_linear(f, g, c):
    lhs = theta_order(f + g * c, STANDARD_ORDER, 8, PARAMS)
    rhs = theta_order(f, STANDARD_ORDER, 8, PARAMS) + theta_order(g, STANDARD_ORDER, 8, PARAMS) * c
    np.testing.assert_allclose(lhs.entries, rhs.entries, atol=1e-11)


@given(polys(4))
def test_real_structure_weyl(f):
    np.testing.assert_allclose(theta_order(f.conj(), WEYL, D).entries, theta_order(f, WEYL, D).dagger().entries, atol=1e-11)


@given(holo_polys(4))
def test_real_structure_normal_orderings(f):
    for ordering in (NORMAL_ORDER, ANTINORMAL_ORDER):
        np.testing.assert_allclose(
            theta_order(f.conj(), ordering, D).entries, theta_order(f, ordering, D).dagger().entries, atol=1e-11
        )


@given(polys(4))
def test_real_structure_standard_pair(f):
    """Conjugation swaps the standard and antistandard orderings."""
    lhs = theta_order(f.conj(), STANDARD_ORDER, D).entries
    rhs = theta_order(f, ANTISTANDARD_ORDER, D).dagger().entries
    np.testing.assert_allclose(lhs, rhs, atol=1e-11)


def test_standard_ordering_is_not_self_adjoint():
    lhs = theta_order((q * p).conj(), STANDARD_ORDER, D).entries
    rhs = theta_order(q * p, STANDARD_ORDER, D).dagger().entries
    assert np.max(np.abs(lhs - rhs)) > 0.1


def test_degree_warning():
    with pytest.warns(TruncationWarning):
        theta_order(q**5, WEYL, 4)


def test_weyl_symbol_of_projectors():
    spec = GridSpec(32, 32)
    for n in (0, 1):
        got = weyl_symbol(projector_matrix(n, 16), spec)
        want = sample(projector(n, MOYAL), spec)
        assert np.max(np.abs(got.values - want.values)) < 1e-10


def test_weyl_symbol_of_truncated_identity():
    spec = GridSpec(32, 32, l_q=4.0, l_p=4.0)
    dim = 12
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        got = weyl_symbol(FockMatrix(np.eye(dim)), spec)
    want = sum(sample(projector(n, MOYAL), spec).values for n in range(dim))
    assert np.max(np.abs(got.values - want)) < 1e-9
    Q, P = spec.mesh()
    centre = (Q**2 + P**2) < 1
    # well inside the classically allowed disc the truncated identity is already ~ 1
    assert np.max(np.abs(got.values[centre] - 1)) < 1.1


def test_weyl_symbol_truncation_warning():
    with pytest.warns(TruncationWarning):
        weyl_symbol(projector_matrix(7, 8), GridSpec(16, 16))


def test_weyl_inverse_on_random_polynomial(rng):
    from starquant.gaussian import gaussian_star
    from starquant.verify import random_poly

    spec = GridSpec(32, 32)
    f = random_poly(rng, 4)
    op = theta_order(f, WEYL, 32) @ projector_matrix(1, 32)
    got = weyl_symbol(op, spec)
    want = sample(gaussian_star(f, projector(1, MOYAL), MOYAL, PhysParams()), spec)
    assert np.max(np.abs(got.values - want.values)) < 1e-8 * max(1.0, want.max_abs())


def test_coherent_symbols():
    params = PhysParams(hbar=0.5)
    dim = 60
    o = fock_operators(params, dim)
    z = 0.6 - 0.3j
    number = o["adag"] @ o["a"]
    assert coherent_symbol(number, z, params) == pytest.approx(abs(z) ** 2, abs=1e-12)
    assert coherent_symbol(FockMatrix(np.eye(dim)), z, params) == pytest.approx(1.0, abs=1e-12)
    for n in range(4):
        want = projector(n, NORMAL).evaluate(z, np.conj(z), params.hbar)
        assert coherent_symbol(projector_matrix(n, dim), z, params) == pytest.approx(want, abs=1e-12)


def test_homomorphism_examples():
    assert homomorphism_residual(q, p, "weyl", 16) < 1e-12
    assert homomorphism_residual(q**2 * p, q * p**2, "weyl", 32) < 1e-9
    mismatch = homomorphism_residual(q, p, (STANDARD_ORDER, MOYAL), 16, PARAMS)
    assert mismatch == pytest.approx(PARAMS.hbar / 2, rel=1e-12)


@settings(max_examples=15)
@given(polys(4), polys(4), st.sampled_from(["weyl", "standard"]))
def test_homomorphism_canonical(f, g, pairing):
    assert homomorphism_residual(f, g, pairing, 32) < 1e-9


@settings(max_examples=15)
@given(holo_polys(4), holo_polys(4), st.sampled_from(["weyl", "normal"]))
def test_homomorphism_holomorphic(f, g, pairing):
    assert homomorphism_residual(f, g, pairing, 32) < 1e-9


def test_pairing_sensitivity():
    assert homomorphism_residual(q, p, (STANDARD_ORDER, STANDARD), 16) > 0.5
    assert homomorphism_residual(a, abar, (ANTINORMAL_ORDER, NORMAL), 16) > 0.5
    assert homomorphism_residual(a, abar, (WEYL, NORMAL), 16) > 0.1


@pytest.mark.parametrize("n", range(5))
def test_trace_identity(n):
    params = PhysParams()
    dim = 24
    H = fock_operators(params, dim)["H"].entries
    rho = projector_matrix(n, dim).entries
    trace = np.trace(H @ rho)
    phase = expectation(hamiltonian(params, HOLOMORPHIC), projector(n, MOYAL), MOYAL, params).evaluate(params.hbar)
    assert abs(trace - phase) < 1e-9
