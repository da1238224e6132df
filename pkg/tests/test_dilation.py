import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semiclab import dilation as dl
from semiclab.flatstates import coherent
from semiclab.numcore import GridSpec

GRID = GridSpec(8.0, 512, 0.05)


def _moments(values, grid):
    dens = abs(values) ** 2 * grid.dx
    k = np.fft.fftfreq(grid.M, d=grid.dx) * 2 * np.pi
    deriv = np.fft.ifft(1j * k * np.fft.fft(values))
    p = grid.hbar * float(np.imag(np.sum(values.conj() * deriv) * grid.dx))
    return float(np.sum(grid.x * dens)), p


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.7, 0.7), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_propagator_preserves_norm(t, q, p):
    psi = coherent((q, p), 1j, GRID)
    assert GRID.norm(dl.dilation_propagator(psi, GRID, t)) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4))
def test_propagator_is_a_one_parameter_group(t1, t2):
    psi = coherent((0.3, -0.2), 1j, GRID)
    two = dl.dilation_propagator(dl.dilation_propagator(psi, GRID, t1), GRID, t2)
    one = dl.dilation_propagator(psi, GRID, t1 + t2)
    assert np.max(abs(two - one)) < 1e-9


@pytest.mark.parametrize("t", [0.2, 0.6])
def test_spreading_follows_classical_flow(t):
    z = (0.4, 0.3)
    state = dl.DilationState(0.0, GRID.hbar, GRID, coherent(z, 1j, GRID))
    moved = dl.evolve_dilation(state, t)
    assert moved.t == t
    q, p = _moments(moved.values, GRID)
    assert (q, p) == pytest.approx(dl.classical_dilation_flow(z, t), abs=1e-9)
    assert np.allclose(dl.flow_jacobian(t) @ np.array(z), dl.classical_dilation_flow(z, t))


@pytest.mark.parametrize("t", [0.5, 1.0])
def test_spreading_variance_law(t):
    hbar = 0.02
    grid = dl.demo_grid(hbar, t)
    end = dl.evolve_dilation(dl.origin_coherent(grid), t)
    assert dl.position_variance(end.values, grid) == pytest.approx(dl.variance_law(hbar, t, propagator=False),
                                                                   rel=1e-8)


def test_ehrenfest_width_is_hbar_independent():
    for hbar in (0.01, 0.001):
        out = dl.dilation_demo(hbar=hbar, samples=500, seed=1)
        assert out["t"] == pytest.approx(-math.log(hbar) / 2)
        assert out["variance"] == pytest.approx(0.5, rel=1e-8)
        assert out["pointwise_delocalized"] < 1e-8


def test_escaping_state_is_reported():
    psi = coherent((0.0, 0.0), 1j, GRID)
    with pytest.raises(dl.SupportEscapeError):
        dl.dilation_propagator(psi, GRID, -3.0)
    wide = np.exp(-GRID.x**2 / 40) + 0j
    with pytest.raises(dl.SupportEscapeError):
        dl.dilation_propagator(wide, GRID, 0.0)


def test_resampling_is_exact_on_grid_nodes():
    psi = coherent((0.2, 0.4), 1j, GRID)
    assert np.max(abs(dl.fourier_resample(psi, GRID, GRID.x[::7]) - psi[::7])) < 1e-12


def test_position_measurement_is_seeded():
    grid = dl.demo_grid(0.01)
    end = dl.evolve_dilation(dl.origin_coherent(grid), dl.ehrenfest_time(0.01))
    a, ks = dl.measure_position(end.values, grid, 2000, seed=7, reference_cdf=dl.delocalized_cdf)
    b, _ = dl.measure_position(end.values, grid, 2000, seed=7)
    assert np.array_equal(a, b)
    assert ks.pvalue > 0.01
    with pytest.raises(ValueError):
        dl.measure_position(2 * end.values, grid, 10, seed=0)


def test_delocalized_density_integrates_to_cdf():
    x = np.linspace(-6, 6, 4001)
    integral = np.cumsum(dl.delocalized_density(x)) * (x[1] - x[0])
    assert np.max(abs(integral - dl.delocalized_cdf(x))) < 5e-3
