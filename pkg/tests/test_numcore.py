import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semiclab.numcore import (
    ConvergenceError, GeometryError, GridSpec, PoleError, complex_gamma, complex_loggamma, default_grid,
    hermite_basis, hermite_functions, oscillator_matrix, power_ft_closed_form, regularized_power_ft,
)


def test_grid_geometry():
    g = GridSpec(4.0, 64, 0.5)
    assert g.dx == pytest.approx(0.125)
    assert g.x[0] == -4.0 and g.x[-1] == pytest.approx(4.0 - 0.125)
    assert len(g.k) == 64


@pytest.mark.parametrize("args", [(0.0, 64, 0.1), (1.0, 63, 0.1), (1.0, 8, 0.1), (1.0, 64, 0.0)])
def test_grid_rejects_bad_geometry(args):
    with pytest.raises(GeometryError):
        GridSpec(*args)


def test_default_grid_widens_for_broad_widths():
    assert default_grid(0.1, alphas=(4j,)).L > default_grid(0.1).L


def test_hermite_orthonormal_and_oscillator_spectrum():
    g = GridSpec(6.0, 256, 0.2)
    basis = hermite_basis(g, 20)
    assert np.max(abs(basis.gram() - np.eye(20))) < 1e-12
    H = basis.restrict(oscillator_matrix(g))
    assert np.max(abs(H - np.diag((np.arange(20) + 0.5) * 0.2))) < 1e-10


def test_hermite_ground_state_closed_form():
    x = np.linspace(-2, 2, 11)
    h0 = hermite_functions(x, 0.3, 1)[0]
    assert np.allclose(h0, (math.pi * 0.3) ** -0.25 * np.exp(-x**2 / 0.6))


def test_hermite_basis_rejects_escaping_functions():
    with pytest.raises(GeometryError):
        hermite_basis(GridSpec(1.0, 256, 0.2), 40)


@settings(max_examples=60, deadline=None)
@given(st.floats(-8, 8), st.floats(-12, 12))
def test_gamma_matches_mpmath(re, im):
    s = complex(re, im)
    if min(abs(s - n) for n in range(-9, 1)) < 1e-3:
        return
    ref = complex(mpmath.gamma(mpmath.mpc(re, im)))
    assert abs(complex_gamma(s) - ref) <= 1e-10 * abs(ref) + 1e-300


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 30), st.floats(-40, 40))
def test_loggamma_matches_principal_branch(re, im):
    ref = complex(mpmath.loggamma(mpmath.mpc(re, im)))
    assert abs(complex_loggamma(complex(re, im)) - ref) < 1e-10 * max(1, abs(ref))


@settings(max_examples=40, deadline=None)
@given(st.floats(-6, 6))
def test_gamma_half_line_modulus(w):
    # |Gamma(1/2 + i w)|^2 = pi / cosh(pi w)
    assert abs(complex_gamma(0.5 + 1j * w)) ** 2 == pytest.approx(math.pi / math.cosh(math.pi * w), rel=1e-12)


@pytest.mark.parametrize("s", [0, -1, -7])
def test_gamma_poles_raise(s):
    with pytest.raises(PoleError):
        complex_gamma(s)


def test_power_ft_closed_form_fresnel_value():
    # int_0^inf x^{-1/2} e^{i x} dx = sqrt(pi) e^{i pi/4}
    val = power_ft_closed_form(-0.5, 1.0, 1.0) * math.sqrt(2 * math.pi)
    assert abs(val - math.sqrt(math.pi) * cmath.exp(1j * math.pi / 4)) < 1e-12


@pytest.mark.parametrize("lam", [-0.5 + 0.7j, -0.3 - 0.4j])
@pytest.mark.parametrize("sigma", [1.3, -0.8])
@pytest.mark.parametrize("sign", [1, -1])
def test_regularized_transform_matches_closed_form(lam, sigma, sign):
    num = regularized_power_ft(lam, sigma, 0.2, sign)
    ref = power_ft_closed_form(lam, sigma, 0.2, sign)
    assert abs(num - ref) / abs(ref) < 1e-3


def test_regularized_transform_input_errors():
    with pytest.raises(ValueError):
        regularized_power_ft(2.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        regularized_power_ft(-0.5, 0.0, 0.1)


def test_regularized_transform_reports_poor_extrapolation():
    with pytest.raises(ConvergenceError):
        regularized_power_ft(-0.5 + 0.3j, 1.0, 0.1, eps_values=(0.5, 0.4, 0.3), tol=1e-12)


def test_gamma_half_line_modulus_on_sampled_range():
    w = np.arange(0, 20.05, 0.1)
    got = np.array([abs(complex_gamma(0.5 + 1j * v)) ** 2 for v in w])
    assert np.max(abs(got * np.cosh(np.pi * w) / np.pi - 1)) <= 1e-12


def test_gamma_argument_large_frequency_asymptotic():
    w = 50.0
    assert abs(complex_loggamma(0.5 + 1j * w).imag - (w * math.log(w) - w + 1 / (24 * w))) <= 1e-3


def test_coherent_family_resolves_identity():
    from semiclab.flatstates import toeplitz

    g = GridSpec(8.0, 256, 0.2)
    basis = hermite_basis(g, 17)
    T = toeplitz(lambda q, p: np.ones_like(q), 1j, g, box=6.0, n=121).matrix
    R = basis.restrict(T)[:9, :9]
    assert np.linalg.norm(R - np.eye(9), 2) <= 1e-6
