import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semiclab import statistics as stats
from semiclab.flatstates import GaussianSymbol, gaussian_symbol, random_state
from semiclab.numcore import GridSpec

SMALL = GridSpec(4.0, 16, 0.3)


def _random_two_body(seed):
    rng = np.random.default_rng(seed)
    n = SMALL.M**2
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return stats.TwoBodyDensity(SMALL, A)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_exchanges_are_commuting_involutions(seed):
    rho = _random_two_body(seed)
    U, V = stats.exchange_U, stats.exchange_V
    assert np.array_equal(U(U(rho)).matrix, rho.matrix)
    assert np.array_equal(V(V(rho)).matrix, rho.matrix)
    assert np.array_equal(U(V(rho)).matrix, V(U(rho)).matrix)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_exchange_sectors_decompose(seed):
    rho = _random_two_body(seed)
    parts = stats.exchange_sectors(rho)
    assert np.allclose(sum(p.matrix for p in parts.values()), rho.matrix, atol=1e-12)
    for (su, sv), part in parts.items():
        assert np.allclose(stats.exchange_U(part).matrix, su * part.matrix, atol=1e-12)
        assert np.allclose(stats.exchange_V(part).matrix, sv * part.matrix, atol=1e-12)


def test_two_body_grid_limit():
    with pytest.raises(ValueError):
        stats.TwoBodyDensity(GridSpec(4.0, 128, 0.3), np.zeros((1, 1)))


def test_standard_state_is_rescaled_bargmann_state():
    g = GridSpec(6.0, 128, 0.2)
    z = 0.4 - 0.3j
    phase = np.exp(1j * z.real * z.imag / (2 * g.hbar) - abs(z) ** 2 / (4 * g.hbar))
    assert np.allclose(stats.standard_state(z, g), phase * stats.bargmann_state(z, g), atol=1e-12)


def test_full_swap_exchanges_husimi_arguments():
    rho = stats.product_dyads([(1.0, (0.3 + 0.2j, -0.4j), (0.3 + 0.2j, -0.4j)),
                               (0.5, (0.1, 0.5), (-0.2j, 0.2))], SMALL)
    swapped = stats.exchange_U(stats.exchange_V(rho))
    Z = np.array([[0.2 + 0.1j, -0.3 + 0.2j], [0.0, 0.4j]])
    assert np.allclose(stats.husimi_two(swapped, Z), stats.husimi_two(rho, Z[:, ::-1]), atol=1e-12)


def test_exchange_map_determinants():
    E = stats.exchange_matrices()
    assert np.linalg.det(E["husimi"]) == pytest.approx(-1)
    assert np.linalg.det(E["wigner"]) == pytest.approx(1)
    assert stats.symplectic_residual(E["relative_block"], [(0, 1), (2, 3)]) == 0
    assert stats.symplectic_residual(E["full"], [(i, i + 4) for i in range(4)]) > 0


def test_husimi_pairs_with_toeplitz_trace():
    g = GridSpec(6.0, 128, 0.2)
    rho = random_state(g, 2, np.random.default_rng(0))
    out = stats.husimi_toeplitz_pairing(rho, gaussian_symbol(0.5, (0.1, 0.2)))
    assert out["residual"] < 1e-5


@pytest.mark.parametrize("z0", [0.8 + 0.3j, -0.5 + 0.6j])
def test_exchange_weight_closed_form(z0):
    hbar, kappa, amp = 0.2, 0.5, 2.0
    h = GaussianSymbol(np.eye(2) / (kappa * hbar), np.array([z0.real, z0.imag]), amp)
    numeric = stats.exchange_weight(h, GridSpec(6.0, 256, hbar))
    assert numeric == pytest.approx(stats.exchange_weight_closed(amp, kappa, z0, hbar), rel=1e-8)


def test_exchange_weight_decays_exponentially():
    out = stats.exchange_weight_decay(0.8 + 0.3j, 0.5, [0.4, 0.2, 0.1])
    assert out["c"] > 0
    assert out["c"] == pytest.approx(out["c_expected"], rel=0.05)
