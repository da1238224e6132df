"""Shared numerical substrate: position grids, Hermite functions, complex gamma,
and regularized Fourier transforms of homogeneous distributions."""

from __future__ import annotations

import math
import cmath
from dataclasses import dataclass

import numpy as np
from scipy import integrate


class GeometryError(ValueError):
    """Grid too small or too coarse for the requested objects."""


class PoleError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L, L) with M points, carrying hbar."""

    L: float
    M: int
    hbar: float

    def __post_init__(self):
        if not self.L > 0:
            raise GeometryError("half width must be positive")
        if self.M < 16 or self.M % 2:
            raise GeometryError("M must be even and >= 16")
        if not self.hbar > 0:
            raise GeometryError("hbar must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.M

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.M)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.M, d=self.dx)

    def inner(self, f, g) -> complex:
        """<f, g>, antilinear in the first slot."""
        return complex(np.vdot(f, g) * self.dx)

    def norm(self, f) -> float:
        return float(np.sqrt(np.real(np.vdot(f, f)) * self.dx))


def default_grid(hbar: float, q_span: float = 3.0, alphas=(1j,), M: int = 512) -> GridSpec:
    """Half width q_span + 10 sqrt(hbar max |a|^2/Im a): Gaussian tails below 1e-16."""
    spread = max(abs(a) ** 2 / a.imag for a in np.atleast_1d(alphas))
    return GridSpec(q_span + 10.0 * math.sqrt(hbar * spread), M, hbar)


@dataclass(frozen=True)
class HermiteBasis:
    grid: GridSpec
    vectors: np.ndarray  # shape (D, M)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def gram(self) -> np.ndarray:
        return self.vectors.conj() @ self.vectors.T * self.grid.dx

    def coefficients(self, f) -> np.ndarray:
        return self.vectors.conj() @ np.asarray(f) * self.grid.dx

    def restrict(self, op: np.ndarray, n: int | None = None) -> np.ndarray:
        """Matrix elements <h_i|op|h_j> for i, j < n of a grid operator (kernel matrix)."""
        V = self.vectors[: (n or self.dim)]
        return V.conj() @ op @ V.T * self.grid.dx**2


def hermite_functions(x, hbar: float, D: int) -> np.ndarray:
    """Normalized oscillator eigenfunctions h_0..h_{D-1} by the stable three-term recurrence."""
    u = np.asarray(x, dtype=float) / math.sqrt(hbar)
    out = np.empty((D,) + u.shape)
    out[0] = math.pi**-0.25 * np.exp(-u * u / 2) / hbar**0.25
    if D > 1:
        out[1] = math.sqrt(2.0) * u * out[0]
    for n in range(1, D - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * u * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_basis(grid: GridSpec, D: int) -> HermiteBasis:
    if D > grid.M // 4:
        raise GeometryError(f"D={D} exceeds M/4={grid.M // 4}")
    vecs = hermite_functions(grid.x, grid.hbar, D)
    last = vecs[-1]
    tail = (abs(last[0]) ** 2 + abs(last[-1]) ** 2) * grid.dx
    if tail > 1e-12:
        raise GeometryError(f"h_{D - 1} not contained in [-L, L] (edge mass {tail:.2e})")
    return HermiteBasis(grid, vecs.astype(complex))


def oscillator_matrix(grid: GridSpec) -> np.ndarray:
    """(P^2 + X^2)/2 on the grid, P spectral, as a kernel matrix (acts by @ with dx weight)."""
    M = grid.M
    F = np.fft.fft(np.eye(M), axis=0)
    P2 = np.fft.ifft((grid.hbar * grid.k)[:, None] ** 2 * F, axis=0)
    return (P2 + np.diag(grid.x**2)) / (2.0 * grid.dx)


# --- complex gamma ---------------------------------------------------------

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _check_pole(s: complex):
    if s.imag == 0 and s.real <= 0 and s.real == math.floor(s.real):
        raise PoleError(f"gamma has a pole at {s.real:g}")


def _loggamma_right(s: complex) -> complex:
    # continuous branch for Re s >= 1/2
    z = s - 1
    acc = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        acc += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2 * math.pi) + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def complex_loggamma(s: complex) -> complex:
    """log Gamma(s). Continuous (Stirling) branch for Re s >= 1/2; reflection otherwise."""
    s = complex(s)
    _check_pole(s)
    if s.real >= 0.5:
        return _loggamma_right(s)
    return cmath.log(math.pi / cmath.sin(math.pi * s)) - _loggamma_right(1 - s)


def complex_gamma(s: complex) -> complex:
    """Gamma(s) for complex s, Lanczos approximation plus reflection for Re s < 1/2."""
    s = complex(s)
    _check_pole(s)
    if s.real >= 0.5:
        return cmath.exp(_loggamma_right(s))
    return math.pi / (cmath.sin(math.pi * s) * cmath.exp(_loggamma_right(1 - s)))


# --- distributional Fourier pair -------------------------------------------

def power_ft_closed_form(lam: complex, sigma: float, hbar: float, sign: int = +1) -> complex:
    """Closed form of  int x_(+/-)^lam e^{i x sigma/hbar} dx / sqrt(2 pi hbar)."""
    if sigma == 0:
        raise ValueError("sigma must be nonzero")
    g = complex_gamma(lam + 1)
    plus = abs(sigma) ** (-lam - 1) if sigma > 0 else 0.0
    minus = abs(sigma) ** (-lam - 1) if sigma < 0 else 0.0
    if sign < 0:
        plus, minus = minus, plus
    val = 1j * g * (cmath.exp(1j * lam * math.pi / 2) * plus - cmath.exp(-1j * lam * math.pi / 2) * minus)
    return val * hbar ** (lam + 1) / math.sqrt(2 * math.pi * hbar)


def _damped_half_line(lam: complex, eps: float, freq_sign: int) -> complex:
    """int_0^inf u^lam e^{i s u} e^{-eps u^2} du with s = +/-1, by oscillatory quadrature."""
    umax = math.sqrt(745.0 / eps) if eps > 0 else None
    a = min(1.0, umax)
    re, im = lam.real, lam.imag

    def amp(u):
        return u**re * math.exp(-eps * u * u)

    def ph(u):
        return im * math.log(u)

    # near the origin: substitute u = v^2 to tame u^(Re lam)
    def near(v, part):
        u = v * v
        w = 2 * v * v ** (2 * re) * math.exp(-eps * u * u)
        arg = im * (2 * math.log(v)) + freq_sign * u if v > 0 else 0.0
        return w * (math.cos(arg) if part == 0 else math.sin(arg))

    opts = dict(limit=400, epsabs=1e-13, epsrel=1e-12)
    r0 = integrate.quad(near, 0, math.sqrt(a), args=(0,), **opts)[0]
    i0 = integrate.quad(near, 0, math.sqrt(a), args=(1,), **opts)[0]

    def fc(u):
        return amp(u) * math.cos(ph(u))

    def fs(u):
        return amp(u) * math.sin(ph(u))

    qo = dict(limit=2000, epsabs=1e-13, epsrel=1e-12)
    cc = integrate.quad(fc, a, umax, weight="cos", wvar=1.0, **qo)[0]
    cs = integrate.quad(fc, a, umax, weight="sin", wvar=1.0, **qo)[0]
    sc = integrate.quad(fs, a, umax, weight="cos", wvar=1.0, **qo)[0]
    ss = integrate.quad(fs, a, umax, weight="sin", wvar=1.0, **qo)[0]
    # (fc + i fs)(cos + i s sin)
    real = cc - freq_sign * ss
    imag = sc + freq_sign * cs
    return complex(r0 + real, i0 + imag)


def regularized_power_ft(lam: complex, sigma: float, hbar: float, sign: int = +1,
                         eps_values=(1e-2, 1e-3, 1e-4), tol: float = 1e-3,
                         return_residual: bool = False):
    """int x_(+/-)^lam e^{i x sigma/hbar} dx/sqrt(2 pi hbar) via Gaussian damping and extrapolation.

    The damping e^{-eps u^2} acts in the scaled variable u = |sigma| x / hbar.
    Values for the listed eps are Richardson-extrapolated (polynomial in eps) to eps = 0.
    """
    lam = complex(lam)
    if lam.imag == 0 and lam.real == round(lam.real) and lam.real != 0:
        raise ValueError("lambda must not be a nonzero integer")
    if sigma == 0:
        raise ValueError("sigma must be nonzero")
    # x_- integrates over negative x: x -> -x flips the oscillation sign
    freq_sign = (1 if sigma > 0 else -1) * (1 if sign > 0 else -1)
    scale = (hbar / abs(sigma)) ** (lam + 1) / math.sqrt(2 * math.pi * hbar)
    eps = np.asarray(eps_values, dtype=float)
    vals = np.array([_damped_half_line(lam, e, freq_sign) for e in eps]) * scale
    # Neville extrapolation to eps = 0
    table = list(vals)
    n = len(eps)
    for level in range(1, n):
        table = [
            (eps[i + level] * table[i] - eps[i] * table[i + 1]) / (eps[i + level] - eps[i])
            for i in range(n - level)
        ]
    extrap = table[0]
    lower = vals[-1] if n < 3 else ((eps[2] * vals[1] - eps[1] * vals[2]) / (eps[2] - eps[1]))
    resid = abs(extrap - lower) / max(abs(extrap), 1e-300)
    if resid > tol:
        raise ConvergenceError(f"extrapolation residual {resid:.2e} exceeds {tol:g}")
    return (extrap, resid) if return_residual else extrap
