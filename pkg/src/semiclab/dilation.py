"""Dilation dynamics around the hyperbolic fixed point of H = q p.

The propagator e^{itH/hbar} acts as psi -> e^{t/2} psi(e^t x).  Running it backwards
spreads a coherent state at the origin until, at t_hbar = -log(hbar)/2, its width no
longer depends on hbar.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .numcore import GeometryError, GridSpec


class SupportEscapeError(GeometryError):
    pass


@dataclass(frozen=True)
class DilationState:
    t: float
    hbar: float
    grid: GridSpec
    values: np.ndarray

    def norm(self) -> float:
        return self.grid.norm(self.values)


def ehrenfest_time(hbar: float) -> float:
    return -math.log(hbar) / 2


def fourier_resample(values: np.ndarray, grid: GridSpec, points: np.ndarray) -> np.ndarray:
    """Band-limited (trigonometric) interpolation of grid samples at arbitrary points."""
    M = grid.M
    coeffs = np.fft.fft(values) / M
    freqs = np.fft.fftfreq(M, d=grid.dx) * 2 * np.pi
    # split the Nyquist mode symmetrically so real data stays real
    out = np.zeros(len(points), complex)
    shifted = np.asarray(points) - grid.x[0]
    for chunk in range(0, len(points), 512):
        sl = slice(chunk, chunk + 512)
        phase = np.exp(1j * np.outer(shifted[sl], freqs))
        out[sl] = phase @ coeffs
    nyq = M // 2
    out -= coeffs[nyq] * (np.exp(1j * freqs[nyq] * shifted) - np.cos(freqs[nyq] * shifted))
    # the state vanishes off the grid; do not let the periodic extension wrap around
    out[(shifted < 0) | (shifted >= 2 * grid.L)] = 0.0
    return out


def _edge_mass(values, grid, frac=0.05):
    k = max(1, int(frac * grid.M))
    return float((np.sum(abs(values[:k]) ** 2) + np.sum(abs(values[-k:]) ** 2)) * grid.dx)


def dilation_propagator(values: np.ndarray, grid: GridSpec, t: float, tol: float = 1e-12) -> np.ndarray:
    """e^{itH/hbar} psi = e^{t/2} psi(e^t x) by Fourier resampling."""
    if _edge_mass(values, grid) > tol:
        raise SupportEscapeError("input state is not contained in the grid")
    out = math.exp(t / 2) * fourier_resample(values, grid, math.exp(t) * grid.x)
    if _edge_mass(out, grid) > tol:
        raise SupportEscapeError(f"dilated state leaves the grid at t={t:g}")
    return out


def evolve_dilation(state: DilationState, t: float) -> DilationState:
    """Spread the state: psi -> e^{-t/2} psi(e^{-t} x), i.e. the propagator at time -t."""
    vals = dilation_propagator(state.values, state.grid, -t)
    return DilationState(state.t + t, state.hbar, state.grid, vals)


def origin_coherent(grid: GridSpec) -> DilationState:
    h = grid.hbar
    vals = (math.pi * h) ** -0.25 * np.exp(-grid.x**2 / (2 * h)) + 0j
    return DilationState(0.0, h, grid, vals)


def demo_grid(hbar: float, t: float | None = None) -> GridSpec:
    """Grid resolving the initial width sqrt(hbar) and holding the spread state at time t."""
    t = ehrenfest_time(hbar) if t is None else t
    final_width = math.sqrt(hbar) * math.exp(max(t, 0.0))
    L = 10 * max(final_width, math.sqrt(hbar)) + 2
    initial_width = math.sqrt(hbar) * math.exp(min(t, 0.0))
    M = int(2 * L / (initial_width / 6))
    M = max(256, M + M % 2)
    return GridSpec(L, M, hbar)


def position_variance(values: np.ndarray, grid: GridSpec) -> float:
    dens = abs(values) ** 2 * grid.dx
    mean = float(np.sum(grid.x * dens))
    return float(np.sum((grid.x - mean) ** 2 * dens))


def variance_law(hbar: float, t: float, propagator: bool = True) -> float:
    """Closed variance of the origin coherent state after e^{itH/hbar} (or the spreading map)."""
    return hbar * math.exp(-2 * t if propagator else 2 * t) / 2


def classical_dilation_flow(z, t: float):
    q, p = z
    return (math.exp(t) * q, math.exp(-t) * p)


def flow_jacobian(t: float) -> np.ndarray:
    return np.diag([math.exp(t), math.exp(-t)])


def delocalized_density(x):
    return np.exp(-np.asarray(x) ** 2) / math.sqrt(math.pi)


def delocalized_cdf(x):
    return stats.norm(scale=1 / math.sqrt(2)).cdf(x)


def measure_position(values: np.ndarray, grid: GridSpec, samples: int, seed: int, reference_cdf=None):
    """Inverse-CDF samples from |psi|^2 dx (uniform within each cell) and the KS test
    against ``reference_cdf`` when given."""
    prob = abs(values) ** 2 * grid.dx
    total = prob.sum()
    if abs(total - 1) > 1e-8:
        raise ValueError(f"state norm {total:.6f} is not 1")
    cdf = np.cumsum(prob / total)
    rng = np.random.default_rng(seed)
    u = rng.random(samples)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), grid.M - 1)
    draws = grid.x[idx] + (rng.random(samples) - 0.5) * grid.dx
    if reference_cdf is None:
        return draws, None
    return draws, stats.kstest(draws, reference_cdf)


def dilation_demo(hbar: float = 0.01, t: float | None = None, samples: int = 10_000, seed: int = 0) -> dict:
    t = ehrenfest_time(hbar) if t is None else t
    grid = demo_grid(hbar, t)
    start = origin_coherent(grid)
    end = evolve_dilation(start, t)
    pointwise = float(np.max(abs(end.values - math.pi**-0.25 * np.exp(-grid.x**2 / 2)))) if math.isclose(
        t, ehrenfest_time(hbar)) else None
    draws, ks = measure_position(end.values, grid, samples, seed, delocalized_cdf)
    return {
        "hbar": hbar,
        "t": t,
        "norm_drift": abs(end.norm() - 1),
        "variance": position_variance(end.values, grid),
        "variance_expected": variance_law(hbar, t, propagator=False),
        "pointwise_delocalized": pointwise,
        "ks_statistic": float(ks.statistic),
        "ks_pvalue": float(ks.pvalue),
        "samples": draws,
    }
