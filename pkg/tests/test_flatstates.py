import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semiclab.flatstates import (
    CoverageError, DensityOp, GaussianSymbol, QuadratureError, coherent, coherent_overlap, gaussian_symbol,
    gaussian_toeplitz_kernel, husimi, m1_commutator_demo, mixed_state, momentum_matrix, position_matrix,
    pure_state, quantize, random_state, reweight_gaussian, toeplitz, weyl, weyl_polynomial, weyl_symbol,
    wigner,
)
from semiclab.numcore import GridSpec, hermite_functions

GRID = GridSpec(6.0, 256, 0.2)

phase_point = st.tuples(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
width = st.builds(complex, st.floats(-0.8, 0.8), st.floats(0.5, 2.0))


@settings(max_examples=40, deadline=None)
@given(phase_point, width)
def test_coherent_state_is_normalized(z, alpha):
    assert GRID.norm(coherent(z, alpha, GRID)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(phase_point, width, phase_point, width)
def test_overlap_closed_form_matches_grid(z1, a1, z2, a2):
    grid_value = GRID.inner(coherent(z1, a1, GRID), coherent(z2, a2, GRID))
    assert abs(coherent_overlap(z1, a1, z2, a2, GRID.hbar) - grid_value) < 1e-11


def test_coherent_rejects_bad_width_and_escaping_centre():
    with pytest.raises(ValueError):
        coherent((0, 0), -1j, GRID)
    with pytest.raises(CoverageError):
        coherent((5.9, 0.0), 1j, GRID)


def _ground_state(grid):
    return pure_state(hermite_functions(grid.x, grid.hbar, 1)[0].astype(complex), grid)


def test_husimi_of_ground_state():
    Z = np.array([[0.0, 0.0], [0.4, -0.3], [1.0, 0.5]])
    expected = np.exp(-(Z**2).sum(1) / (2 * GRID.hbar)) / (2 * math.pi * GRID.hbar)
    assert np.allclose(husimi(_ground_state(GRID), Z), expected, atol=1e-12)


def test_wigner_of_ground_state():
    x = GRID.x
    Z = np.array([[x[128], 0.0], [x[136], 0.3], [x[120], -0.5]])
    expected = 2 * np.exp(-(Z**2).sum(1) / GRID.hbar)
    assert np.allclose(wigner(_ground_state(GRID), Z), expected, atol=1e-10)


def test_wigner_integrates_to_trace():
    rho = random_state(GRID, 3, np.random.default_rng(1))
    x = GRID.x[::2]
    xi = np.linspace(-4, 4, 161)
    Z = np.array([[a, b] for a in x for b in xi])
    W = np.real(wigner(rho, Z))
    total = W.sum() * (2 * GRID.dx) * (xi[1] - xi[0]) / (2 * math.pi * GRID.hbar)
    assert total == pytest.approx(rho.trace().real, abs=1e-6)


def test_closed_form_toeplitz_kernel_matches_quadrature():
    h = GaussianSymbol(np.array([[2.0, 0.3], [0.3, 1.5]]), np.array([0.3, -0.2]), 1.0)
    closed = gaussian_toeplitz_kernel(h, GRID).matrix
    quad = toeplitz(h, 1j, GRID, box=5.0, n=161, center=(0.3, -0.2)).matrix
    assert np.linalg.norm(closed - quad) / np.linalg.norm(closed) < 1e-8


def test_weyl_symbol_of_toeplitz_is_heat_flow():
    h = gaussian_symbol(0.4, (0.2, -0.1))
    T = gaussian_toeplitz_kernel(h, GRID)
    x = GRID.x
    Z = np.array([[x[j], s] for j in (120, 128, 134) for s in (-0.3, 0.0, 0.2)])
    expected = h.heat(GRID.hbar / 4)(Z[:, 0], Z[:, 1])
    assert np.max(abs(weyl_symbol(T, Z) - expected)) < 1e-10


def test_reweighting_preserves_the_operator():
    h = gaussian_symbol(0.5, (0.1, 0.2))
    wide = toeplitz(h, 2j, GRID, box=4.0, n=161, center=(0.1, 0.2)).matrix
    g = reweight_gaussian(h, 2j, 1j, GRID.hbar)
    narrow = toeplitz(g, 1j, GRID, box=4.0, n=161, center=(0.1, 0.2)).matrix
    assert np.linalg.norm(wide - narrow) / np.linalg.norm(wide) < 1e-8


def test_weyl_quantization_round_trip():
    h = gaussian_symbol(0.6, (0.3, 0.1))
    op = weyl(h, GRID)
    x = GRID.x
    Z = np.array([[x[j], s] for j in (118, 128, 140) for s in (-0.4, 0.1, 0.5)])
    assert np.max(abs(weyl_symbol(op, Z) - h(Z[:, 0], Z[:, 1]))) < 1e-8


def test_weyl_polynomial_orders_symmetrically():
    dx = GRID.dx
    X, P = position_matrix(GRID) * dx, momentum_matrix(GRID) * dx
    op = weyl_polynomial({(1, 1): 1.0}, GRID).matrix * dx
    assert np.max(abs(op - (X @ P + P @ X) / 2)) < 1e-10
    assert np.max(abs(weyl_polynomial({(1, 0): 1.0}, GRID).matrix - position_matrix(GRID))) < 1e-12


def test_quantize_dispatch_and_refinement_check():
    h = gaussian_symbol(0.5)
    with pytest.raises(ValueError):
        quantize(h, "wick", GRID)
    with pytest.raises(QuadratureError):
        quantize(h, "toeplitz", GRID, check=True, box=2.0, n=9)
    ok = quantize(h, "toeplitz", GRID, check=True, box=3.0, n=121)
    assert ok.is_hermitian()


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 0.3), st.floats(0.01, 0.3))
def test_heat_flow_semigroup(a, b):
    h = GaussianSymbol(np.array([[2.0, 0.4], [0.4, 1.0]]), np.array([0.1, -0.3]), 1.5)
    one, two = h.heat(a).heat(b), h.heat(a + b)
    pts = np.array([[0.0, 0.0], [0.5, -0.2], [-0.7, 0.9]])
    assert np.allclose(one(pts[:, 0], pts[:, 1]), two(pts[:, 0], pts[:, 1]), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_symbol_product_and_pullback_evaluate_pointwise(q, p):
    h1 = gaussian_symbol(0.7, (0.2, 0.1), 2.0)
    h2 = GaussianSymbol(np.array([[1.0, 0.2], [0.2, 3.0]]), np.array([-0.1, 0.4]), 0.5)
    assert (h1 * h2)(q, p) == pytest.approx(h1(q, p) * h2(q, p), rel=1e-12, abs=1e-300)
    T = np.array([[0.8, 0.3], [-0.2, 1.1]])
    tq, tp = T @ np.array([q, p])
    assert h2.pullback(T)(q, p) == pytest.approx(h2(tq, tp), rel=1e-12)


def test_density_operator_save_load(tmp_path):
    rho = random_state(GRID, 2, np.random.default_rng(3))
    rho.save(tmp_path / "rho")
    back = DensityOp.load(tmp_path / "rho")
    assert back.grid == rho.grid
    assert np.array_equal(back.matrix, rho.matrix)


def test_mixed_state_properties():
    psi = [coherent((0.3, 0.1), 1j, GRID), coherent((-0.4, 0.2), 1j, GRID)]
    rho = mixed_state(psi, [0.25, 0.75], GRID)
    assert rho.trace() == pytest.approx(1.0, abs=1e-12)
    assert rho.is_hermitian()
    assert rho.eigvals().min() > -1e-12


def test_ladder_counterexample():
    demo = m1_commutator_demo(D=12, hbar=0.5)
    assert max(demo.values()) < 1e-12
    with pytest.raises(ValueError):
        m1_commutator_demo(D=3)


nonneg_symbol = st.builds(
    lambda w, q, p, a: gaussian_symbol(w, (q, p), a),
    st.floats(0.3, 1.0), st.floats(-1, 1), st.floats(-1, 1), st.floats(0.1, 3.0),
)


@settings(max_examples=10, deadline=None)
@given(nonneg_symbol, nonneg_symbol)
def test_nonnegative_symbols_quantize_to_positive_operators(h1, h2):
    op = gaussian_toeplitz_kernel(h1, GRID).matrix + gaussian_toeplitz_kernel(h2, GRID).matrix
    assert np.linalg.eigvalsh(op * GRID.dx).min() >= -1e-10


def test_husimi_of_toeplitz_operator_converges_linearly():
    hbars = [0.2, 0.1, 0.05, 0.025]
    h = gaussian_symbol(0.7, (0.3, -0.2))
    Z = np.array([[a, b] for a in np.linspace(-1, 1.5, 11) for b in np.linspace(-1.3, 0.9, 11)])
    errs = []
    for hb in hbars:
        g = GridSpec(6.0, 512, hb)
        smoothed = husimi(gaussian_toeplitz_kernel(h, g), Z) * 2 * math.pi * hb
        errs.append(np.max(abs(smoothed - h(Z[:, 0], Z[:, 1]))))
    slope = np.polyfit(np.log(hbars), np.log(errs), 1)[0]
    assert 0.8 <= slope <= 1.2
