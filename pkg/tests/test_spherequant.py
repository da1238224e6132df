from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semiclab import spherequant as sq

N = 24
coeff = st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=N, max_size=N)


@settings(max_examples=30, deadline=None)
@given(coeff, coeff)
def test_inner_product_matches_coefficients(p, q):
    P, Q = sq.SpherePoly(N, p), sq.SpherePoly(N, q)
    assert abs(sq.sphere_inner(P, Q) - np.sum(P.coeffs * Q.coeffs.conj())) <= 1e-12 * (1 + np.sum(abs(P.coeffs) * abs(Q.coeffs)))


def test_inner_product_dimension_mismatch():
    with pytest.raises(ValueError):
        sq.sphere_inner(sq.basis_vector(0, 4), sq.basis_vector(0, 5))


@pytest.mark.parametrize("z0", [0.0, 0.7 + 0.2j, -1.3j])
def test_coherent_states_reproduce(z0):
    f = sq.SpherePoly(N, np.r_[0.2, 0.5j, 0, 1.0, np.zeros(N - 4)])
    assert abs(sq.sphere_inner(f, sq.sphere_coherent(z0, N)) - f(z0)) < 1e-10


def test_constant_and_height_quantize_in_closed_form():
    assert np.max(abs(sq.sphere_toeplitz(lambda t, th: 1.0 + 0 * t, N) - np.eye(N))) < 1e-12
    T = sq.sphere_toeplitz(lambda t, th: t + 0 * th, N)
    # beta integral: the height weight on level n averages to (n + 1)/(N + 1)
    assert np.max(abs(T - np.diag((np.arange(N) + 1) / (N + 1)))) < 1e-12


def test_envelope_support_is_enforced():
    env = sq.plateau_envelope(20, 5)
    with pytest.raises(sq.SupportError):
        sq.compute_CnN(env, 16)
    C = sq.compute_CnN(env, 32)
    assert np.all(C.values > 0)


def test_resolution_of_identity_is_diagonal():
    env = sq.plateau_envelope(8, 4)
    C = sq.compute_CnN(env, 32)
    R = sq.resolution_matrix(env, 32)
    assert np.max(abs(R - np.diag(C.values))) < 1e-8


def test_identity_symbol_quantizes_to_identity():
    C = sq.compute_CnN(sq.plateau_envelope(8, 4), 32)
    assert np.max(abs(sq.a_toeplitz(sq.identity_symbol(), C) - np.eye(32))) < 1e-8


def test_renormalized_inner_product_on_basis():
    C = sq.compute_CnN(sq.plateau_envelope(8, 4), 32)
    f = sq.basis_vector(5, 32)
    assert sq.a_inner(f, f, C) == pytest.approx(1 / C.values[5])


GAMMA = sq.TrigMatrix({1: lambda t: np.sqrt(t * (1 - t)) / 2, -1: lambda t: np.sqrt(t * (1 - t)) / 2})


def test_fixed_argument_convention_fails_round_trip():
    literal = sq.TrigMatrix(dict(GAMMA.modes), shift="literal")
    env = sq.plateau_envelope(8, 4)
    assert sq.theorem5_verify(GAMMA, GAMMA, env, 32)["first"] < 1e-8
    assert sq.theorem5_verify(literal, literal, env, 32)["first"] > 1e-2


def test_trig_matrix_errors():
    with pytest.raises(ValueError):
        sq.TrigMatrix({0: np.cos}, shift="other").matrix(8)
    with pytest.raises(sq.OrderOverflowError):
        sq.TrigMatrix({9: np.cos}).matrix(8)
    with pytest.raises(sq.OrderOverflowError):
        sq.theorem5_verify(sq.TrigMatrix({5: np.cos}), sq.TrigMatrix({4: np.cos}), sq.plateau_envelope(4, 2), 16)


def test_symbol_composition_is_lattice_product():
    s1 = sq.symbol_of(GAMMA, 32)
    s2 = sq.symbol_of(sq.TrigMatrix({1: lambda t: 0.3 + t, 0: np.cos}), 32)
    assert sq.symbol_composition_check(s1, s2, 32) < 1e-12


U, PHI, TAU = (1, 0, 0), (0, 1, 0), (0, 0, 1)
H0 = Fraction(1, 7)


def test_blowup_product_units_and_commutative_case():
    S = sq.GaussPoly({(2, 1, 0): 3, (0, 2, 1): (1, 2)})
    one = sq.GaussPoly({(0, 0, 0): 1})
    assert sq.blowup_product(S, one, H0) == S
    a = sq.GaussPoly({(0, 2, 1): 1, (0, 0, 0): 2})
    b = sq.GaussPoly({(0, 1, 3): (0, 1)})
    assert sq.blowup_product(a, b, H0) == a * b == sq.blowup_product(b, a, H0)


def test_blowup_product_is_noncommutative():
    xi_linear = sq.GaussPoly({U: 1})
    angular = sq.GaussPoly({PHI: 1})
    gap = sq.blowup_product(angular, xi_linear, H0) - sq.blowup_product(xi_linear, angular, H0)
    assert gap == sq.GaussPoly({(0, 0, 0): (0, -H0)})


poly = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 1)),
                       st.tuples(st.integers(-3, 3), st.integers(-3, 3)), max_size=3).map(sq.GaussPoly)


@settings(max_examples=40, deadline=None)
@given(poly, poly, poly)
def test_blowup_product_is_associative(a, b, c):
    left = sq.blowup_product(sq.blowup_product(a, b, H0), c, H0)
    right = sq.blowup_product(a, sq.blowup_product(b, c, H0), H0)
    assert left == right


def test_blowup_product_degree_overflow():
    big = sq.GaussPoly({(3, 3, 3): 1})
    with pytest.raises(sq.DegreeOverflowError):
        sq.blowup_product(big, big, H0, max_degree=10)


@pytest.mark.parametrize("N", [24, 32, 48])
def test_product_rule_is_exact_at_every_size(N):
    gp = sq.TrigMatrix({1: lambda t: 0.3 + 0.5 * t, 0: lambda t: -0.7 * t**2})
    out = sq.theorem5_verify(GAMMA, gp, sq.plateau_envelope(N / 4, N / 8), N)
    assert max(out["first"], out["second"], out["product"]) <= 1e-8
