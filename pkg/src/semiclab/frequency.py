"""Oscillator frequency operators, the noncommutative torus and the homoclinic
Bohr-Sommerfeld spectrum.

Coherent states follow the flat convention psi_z with z = q + i p, whose Hermite
expansion is exp(-|z|^2/(4 hbar)) sum_j (z/sqrt(2 hbar))^j / sqrt(j!) h_j.  In this
convention angular averages over a circle |z| = r pick out a single Hermite
function, and the operators built on Bohr-Sommerfeld circles raise the level.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .numcore import (
    GridSpec,
    complex_gamma,
    complex_loggamma,
    hermite_basis,
    power_ft_closed_form,
    regularized_power_ft,
)
from .flatstates import coherent, coherent_columns

SQRT2_CONVERGENT = 1393 / 985
EULER_GAMMA = 0.5772156649015329


class TruncationError(RuntimeError):
    pass


class KernelClassError(ValueError):
    pass


# --- coherent states in the Hermite basis ------------------------------------

def coherent_series(z, hbar: float, D: int, listed: bool = False) -> np.ndarray:
    """Hermite coefficients of the standard coherent state at z = (q, p).

    ``listed=True`` returns the alternative normalization
    exp(-|z|^2/hbar) (sqrt(2/hbar) z)^j / sqrt(j!), kept for comparison only.
    """
    w = complex(z[0], z[1])
    j = np.arange(D)
    logfact = np.array([math.lgamma(k + 1) for k in j]) / 2
    if listed:
        base, pref = math.sqrt(2 / hbar) * w, -abs(w) ** 2 / hbar
    else:
        base, pref = w / math.sqrt(2 * hbar), -abs(w) ** 2 / (4 * hbar)
    if base == 0:
        out = np.zeros(D, complex)
        out[0] = math.exp(pref)
        return out
    return np.exp(pref + j * np.log(complex(base)) - logfact)


def oscillator_grid(hbar: float, D: int, radius: float = 0.0) -> GridSpec:
    """Grid holding h_0..h_{D-1} and coherent states centred within ``radius``."""
    reach = math.sqrt(2 * D * hbar) + radius + 10 * math.sqrt(hbar)
    M = max(256, 4 * D, int(1.5 * 2 * reach * reach / (math.pi * hbar)))
    M += M % 2
    return GridSpec(reach, M, hbar)


def coherent_hermite_expansion_check(z, hbar: float, D: int, listed: bool = False) -> float:
    """Grid norm of coherent(z, i) minus its truncated Hermite series."""
    if abs(complex(z[0], z[1])) ** 2 / hbar > D / 4:
        raise ValueError("need |z|^2/hbar <= D/4")
    coeffs = coherent_series(z, hbar, D, listed)
    tail = 1.0 - float(np.sum(abs(coherent_series(z, hbar, D)) ** 2))
    if tail > 1e-12:
        raise TruncationError(f"series tail weight {tail:.1e}")
    grid = oscillator_grid(hbar, D, abs(complex(z[0], z[1])))
    basis = hermite_basis(grid, D)
    approx = coeffs @ basis.vectors
    return grid.norm(coherent(z, 1j, grid) - approx)


# --- frequency operators on Bohr-Sommerfeld circles --------------------------

@dataclass
class FrequencyOperator:
    shift: tuple
    matrix: np.ndarray
    hbar: float
    J: int
    constants: dict = field(default_factory=dict)
    closed_constants: dict = field(default_factory=dict)
    structure_residual: float = 0.0


def _circle_coefficients(radius, n_angles, basis):
    """Hermite coefficients of coherent states at radius*e^{i theta_a}, one column per angle."""
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    Z = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    cols = coherent_columns(Z, 1j, basis.grid)
    return basis.vectors.conj() @ cols * basis.grid.dx, theta


def _angular_mode(coeffs, theta, m):
    # (1/2pi) int e^{-i m theta} psi_{r e^{i theta}} d theta, exact for m < n_angles/2
    return coeffs @ np.exp(-1j * m * theta) / len(theta)


def _closed_constant(j, m, hbar):
    """(2 pi)^2 c_m c_j on the circle |z|^2 = j hbar."""
    if j == 0:
        return (2 * np.pi) ** 2 * (1.0 if m == 0 else 0.0)
    r2 = j * hbar

    def c(k):
        return math.exp(-r2 / (4 * hbar) + k * math.log(math.sqrt(r2 / (2 * hbar))) - math.lgamma(k + 1) / 2)

    return (2 * np.pi) ** 2 * c(m) * c(j)


def build_An(n: int, J: int, hbar: float, D: int | None = None, n_angles: int | None = None) -> FrequencyOperator:
    """Level-shift operator from the angular double integral over the circles |z|^2 = j hbar.

    Block j is (2pi)^2 <angular mode j+n| ... |angular mode j>, which must be a positive
    multiple of |h_{j+n}><h_j|.  The measured multiples are returned in ``constants``
    and each block is divided by its own multiple before summation.  The degenerate
    circle j = 0 contributes nothing when n != 0.
    """
    D = D or J + abs(n) + 2
    if J + abs(n) > D:
        raise ValueError("need J + |n| <= D")
    n_angles = n_angles or 2 * D + 2
    grid = oscillator_grid(hbar, D, math.sqrt(J * hbar))
    basis = hermite_basis(grid, D)
    A = np.zeros((D, D), complex)
    consts, closed, worst = {}, {}, 0.0
    for j in range(J):
        if j + n < 0:
            continue
        if j == 0 and n != 0:
            # the circle degenerates to the origin, where only h_0 survives
            consts[j], closed[j] = 0.0, 0.0
            continue
        coeffs, theta = _circle_coefficients(math.sqrt(j * hbar), n_angles, basis)
        ket = _angular_mode(coeffs, theta, j + n)
        bra = _angular_mode(coeffs, theta, j)
        block = (2 * np.pi) ** 2 * np.outer(ket, bra.conj())
        kappa = block[j + n, j]
        closed[j] = _closed_constant(j, j + n, hbar)
        scale = np.linalg.norm(block)
        unit = np.zeros((D, D))
        unit[j + n, j] = 1.0
        worst = max(worst, np.linalg.norm(block - kappa * unit) / scale, abs(kappa.imag) / scale)
        if kappa.real <= 0:
            raise ArithmeticError(f"block {j} has non-positive constant {kappa}")
        consts[j] = kappa.real
        A += block / kappa.real
    return FrequencyOperator((n,), A, hbar, J, consts, closed, worst)


def shift_operator(n: int, J: int, D: int, skip_degenerate: bool = True) -> np.ndarray:
    S = np.zeros((D, D))
    for j in range(J):
        if 0 <= j + n < D and not (skip_degenerate and j == 0 and n != 0):
            S[j + n, j] = 1.0
    return S


def oscillator_diagonal(D: int, hbar: float) -> np.ndarray:
    return np.diag((np.arange(D) + 0.5) * hbar)


def band_residual(op: FrequencyOperator) -> float:
    """Max entry of [H0, A] - n hbar A over rows and columns 0..J-1+|n|."""
    n = op.shift[0]
    D = op.matrix.shape[0]
    H0 = oscillator_diagonal(D, op.hbar)
    C = H0 @ op.matrix - op.matrix @ H0 - n * op.hbar * op.matrix
    k = min(D, op.J + abs(n))
    return float(np.max(abs(C[:k, :k])))


def linear_weight_products(op: FrequencyOperator) -> dict:
    """j * kappa_j for each block: equals 1 only if the weight j normalizes block j."""
    return {j: j * c for j, c in op.constants.items()}


# --- two degrees of freedom --------------------------------------------------

def _torus_block(j1, j2, N, hbar, basis, n_angles):
    c1, th = _circle_coefficients(math.sqrt(j1 * hbar), n_angles, basis)
    c2, _ = _circle_coefficients(math.sqrt(j2 * hbar), n_angles, basis)
    # product states over the angle torus, integrated against the torus phases
    D = basis.dim
    prod = np.einsum("ia,kb->ikab", c1, c2).reshape(D * D, n_angles, n_angles)
    w_ket = np.outer(np.exp(-1j * (j1 + N[0]) * th), np.exp(-1j * (j2 + N[1]) * th))
    w_bra = np.outer(np.exp(-1j * j1 * th), np.exp(-1j * j2 * th))
    ket = np.einsum("dab,ab->d", prod, w_ket) / n_angles**2
    bra = np.einsum("dab,ab->d", prod, w_bra) / n_angles**2
    return (2 * np.pi) ** 4 * np.outer(ket, bra.conj())


def build_AN_2d(N, omegas, J: int, hbar: float, D: int | None = None) -> FrequencyOperator:
    """Product-basis frequency operator from integrals over Bohr-Sommerfeld tori."""
    N = (int(N[0]), int(N[1]))
    D = D or J + max(abs(N[0]), abs(N[1])) + 1
    n_angles = 2 * D + 2
    grid = oscillator_grid(hbar, D, math.sqrt(J * hbar))
    basis = hermite_basis(grid, D)
    A = np.zeros((D * D, D * D), complex)
    consts, worst = {}, 0.0
    for j1 in range(J):
        for j2 in range(J):
            if j1 + N[0] < 0 or j2 + N[1] < 0:
                continue
            if (j1 == 0 and N[0] != 0) or (j2 == 0 and N[1] != 0):
                continue
            block = _torus_block(j1, j2, N, hbar, basis, n_angles)
            row, col = (j1 + N[0]) * D + (j2 + N[1]), j1 * D + j2
            kappa = block[row, col]
            unit = np.zeros_like(block)
            unit[row, col] = 1.0
            worst = max(worst, np.linalg.norm(block - kappa * unit) / np.linalg.norm(block))
            consts[(j1, j2)] = kappa.real
            A += block / kappa.real
    op = FrequencyOperator(N, A, hbar, J, consts, {}, worst)
    op.omegas = tuple(omegas)
    return op


def product_hamiltonian(omegas, D: int, hbar: float) -> np.ndarray:
    """omega1 H0 x I + omega2 I x H0, with H0 = (X^2 + P^2)/2 assembled from ladder matrices."""
    lower = np.diag(np.sqrt(np.arange(1, D + 1)), 1)
    X = math.sqrt(hbar / 2) * (lower + lower.T)
    P = 1j * math.sqrt(hbar / 2) * (lower.T - lower)
    H0 = ((X @ X + P @ P) / 2)[:D, :D].real
    I = np.eye(D)
    return omegas[0] * np.kron(H0, I) + omegas[1] * np.kron(I, H0)


def derivation_residual(op: FrequencyOperator) -> float:
    D = int(round(math.sqrt(op.matrix.shape[0])))
    H = product_hamiltonian(op.omegas, D, op.hbar)
    rate = op.shift[0] * op.omegas[0] + op.shift[1] * op.omegas[1]
    return float(np.max(abs(H @ op.matrix - op.matrix @ H - op.hbar * rate * op.matrix)))


def _set_distance(a, b) -> float:
    a, b = np.sort(np.asarray(a, float)), np.sort(np.asarray(b, float))
    if len(a) == 0 or len(b) == 0:
        return 0.0 if len(a) == len(b) else math.inf

    def one_way(u, v):
        idx = np.clip(np.searchsorted(v, u), 1, len(v) - 1)
        return float(np.max(np.minimum(abs(u - v[idx - 1]), abs(u - v[idx]))))

    if len(b) == 1:
        return float(max(np.max(abs(a - b[0])), np.min(abs(a - b[0]))))
    if len(a) == 1:
        return _set_distance(b, a)
    return max(one_way(a, b), one_way(b, a))


def oscillator_frequencies(omegas, D: int, hbar: float) -> np.ndarray:
    E = np.linalg.eigvalsh(product_hamiltonian(omegas, D, hbar))
    diffs = (E[:, None] - E[None, :]).ravel() / hbar
    return np.unique(np.round(diffs, 11))


def frequency_set_check(omegas=(1.0, SQRT2_CONVERGENT), D: int = 6, hbar: float = 0.3) -> float:
    """Set distance between spectral differences and the lattice n1 w1 + n2 w2, |n_i| < D."""
    freqs = oscillator_frequencies(omegas, D, hbar)
    n = np.arange(-(D - 1), D)
    lattice = (omegas[0] * n[:, None] + omegas[1] * n[None, :]).ravel()
    return _set_distance(freqs, np.unique(np.round(lattice, 11)))


# --- noncommutative torus ----------------------------------------------------

def nc_torus_check(theta: float, modes: int) -> dict:
    """Modulation U and rotation V on Fourier modes -modes..modes of L^2(S^1)."""
    if modes < 4:
        raise ValueError("modes must be at least 4")
    m = np.arange(-modes, modes + 1)
    U = np.diag(np.ones(len(m) - 1), -1)
    V = np.diag(np.exp(1j * m * theta))
    relation = float(np.max(abs(V @ U - cmath.exp(1j * theta) * U @ V)))
    # eigenfunctions sampled on the circle, rotated pointwise
    phi = 2 * np.pi * np.arange(64) / 64
    eig = 0.0
    for k in m:
        f = np.exp(1j * k * phi) / math.sqrt(2 * math.pi)
        rotated = np.exp(1j * k * (phi + theta)) / math.sqrt(2 * math.pi)
        eig = max(eig, float(np.max(abs(rotated - cmath.exp(1j * k * theta) * f))))
    return {"relation": relation, "eigenvectors": eig}


# --- Bohr-Sommerfeld I -------------------------------------------------------

def circle_loop_integral(radius: float) -> complex:
    """Closed integral of conj(z) dz counterclockwise around |z| = radius."""
    return 2j * math.pi * radius**2


def bs1_check(loop, hbar: float, tol: float = 1e-9):
    """Quantization test for a loop action; a complex loop value of conj(z) dz is divided by i."""
    loop = complex(loop)
    action = (loop / 1j).real if abs(loop.imag) > abs(loop.real) else loop.real
    k = round(action / (2 * math.pi * hbar))
    return abs(action - 2 * math.pi * k * hbar) <= tol * hbar, int(k)


# --- homoclinic data and the continuity determinant --------------------------

@dataclass(frozen=True)
class HomoclinicData:
    action_plus: float
    action_minus: float
    munu_plus: float
    munu_minus: float
    hbar: float
    period: float | None = None
    lyapunov: float | None = None

    def __post_init__(self):
        if not (self.munu_plus > 0 and self.munu_minus > 0):
            raise ValueError("mu*nu products must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    @classmethod
    def symmetric(cls, action: float, munu: float, hbar: float, **kw) -> "HomoclinicData":
        return cls(action, action, munu, munu, hbar, **kw)

    @property
    def is_symmetric(self) -> bool:
        return self.action_plus == self.action_minus and self.munu_plus == self.munu_minus


def transmission(hd: HomoclinicData, omega: float):
    h = hd.hbar
    fp = cmath.exp(-1j * hd.action_plus / h + 1j * omega * math.log(hd.munu_plus))
    fm = cmath.exp(1j * hd.action_minus / h + 1j * omega * math.log(hd.munu_minus))
    return fp, fm


def gamma_half(omega) -> complex:
    return complex_gamma(0.5 + 1j * omega)


def gamma_half_arg(omega: float) -> float:
    """Continuous argument of Gamma(1/2 + i omega)."""
    return complex_loggamma(0.5 + 1j * omega).imag


def gamma_modulus_check(omegas) -> float:
    """Max relative deviation of |Gamma(1/2 + i w)|^2 from pi/cosh(pi w)."""
    worst = 0.0
    for w in omegas:
        ref = math.pi / math.cosh(math.pi * w)
        worst = max(worst, abs(abs(gamma_half(w)) ** 2 - ref) / ref)
    return worst


def continuity_matrix(hd: HomoclinicData, omega) -> np.ndarray:
    """The 2x2 matching matrix; scale factor sqrt(2 pi) hbar^{-i omega} from the half-line transform."""
    G = complex_gamma(0.5 + 1j * omega)
    s = math.sqrt(2 * math.pi) * cmath.exp(-1j * omega * math.log(hd.hbar))
    h = hd.hbar
    fp = cmath.exp(-1j * hd.action_plus / h + 1j * omega * math.log(hd.munu_plus))
    fm = cmath.exp(1j * hd.action_minus / h + 1j * omega * math.log(hd.munu_minus))
    diag = G * cmath.exp(-omega * math.pi / 2 + 1j * math.pi / 4)
    off = G * cmath.exp(omega * math.pi / 2 - 1j * math.pi / 4)
    return np.array([[diag - s * fp, off], [off, diag - s * fm]])


def det_condition(hd: HomoclinicData, omega) -> complex:
    U = continuity_matrix(hd, omega)
    return U[0, 0] * U[1, 1] - U[0, 1] * U[1, 0]


def _phases(hd: HomoclinicData, omega: float):
    L = -math.log(hd.hbar)
    alpha = omega * (math.log(hd.munu_plus) + L) - hd.action_plus / hd.hbar
    beta = omega * (math.log(hd.munu_minus) + L) + hd.action_minus / hd.hbar
    return alpha, beta


def realified_det(hd: HomoclinicData, omega: float, with_imag: bool = False):
    """det U times the unit phase that makes it real on the real axis."""
    alpha, beta = _phases(hd, omega)
    phase = (alpha + beta) / 2 + math.pi / 4 + gamma_half_arg(omega)
    val = det_condition(hd, omega) * cmath.exp(-1j * phase) / (2 * math.pi)
    return (val.real, val.imag) if with_imag else val.real


def closed_condition(hd: HomoclinicData, omega: float) -> float:
    """General real condition: cos((a+b)/2 - arg G - pi/4) - cos((b-a)/2)/sqrt(1+e^{2 pi w})."""
    alpha, beta = _phases(hd, omega)
    lhs = math.cos((alpha + beta) / 2 - gamma_half_arg(omega) - math.pi / 4)
    return 2 * (lhs - math.cos((beta - alpha) / 2) / math.sqrt(1 + math.exp(2 * math.pi * omega)))


def symmetric_condition(hd: HomoclinicData, omega: float) -> float:
    """Symmetric-data condition cos(w log(mu nu/hbar) - arg G - pi/4) = cos(action/hbar)/sqrt(1+e^{2 pi w})."""
    if not hd.is_symmetric:
        raise ValueError("symmetric condition needs equal actions and mu*nu products")
    arg = omega * math.log(hd.munu_plus / hd.hbar) - gamma_half_arg(omega) - math.pi / 4
    return 2 * (math.cos(arg) - math.cos(hd.action_plus / hd.hbar) / math.sqrt(1 + math.exp(2 * math.pi * omega)))


def listed_condition(hd: HomoclinicData, omega: float, root: bool = False) -> float:
    """The listed symmetric form cos(arg G + action/hbar + w log(mu nu/hbar) + pi/4) = -1/(1+e^{pi w}),
    or with a square root in the denominator when ``root``."""
    arg = gamma_half_arg(omega) + hd.action_plus / hd.hbar + omega * math.log(hd.munu_plus / hd.hbar) + math.pi / 4
    den = 1 + math.exp(math.pi * omega)
    return math.cos(arg) + 1 / (math.sqrt(den) if root else den)


def reduction_check(points: int = 20, seed: int = 0) -> float:
    """Max |general - symmetric| over random symmetric data and frequencies."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(points):
        hd = HomoclinicData.symmetric(rng.uniform(-2, 2), rng.uniform(0.2, 5), 10 ** rng.uniform(-6, -1))
        w = rng.uniform(-2, 2)
        worst = max(worst, abs(closed_condition(hd, w) - symmetric_condition(hd, w)))
    return worst


# --- spectrum solver ---------------------------------------------------------

@dataclass
class FrequencySpectrum:
    roots: np.ndarray
    residuals: np.ndarray
    labels: list
    windings: list = field(default_factory=list)
    stable: bool = True


def winding_number(f, center: float, radius: float, samples: int = 64) -> int:
    t = 2 * np.pi * np.arange(samples + 1) / samples
    vals = np.array([f(center + radius * cmath.exp(1j * s)) for s in t])
    return int(round(np.sum(np.angle(vals[1:] / vals[:-1])) / (2 * np.pi)))


def scan_roots(func, window, step: float):
    lo, hi = window
    n = max(2, int(math.ceil((hi - lo) / step)) + 1)
    xs = np.linspace(lo, hi, n)
    vals = np.array([func(x) for x in xs])
    roots = []
    for i in range(n - 1):
        if vals[i] == 0.0:
            roots.append(xs[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(optimize.brentq(func, xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15, maxiter=200))
    if vals[-1] == 0.0:
        roots.append(xs[-1])
    return np.array(roots)


def _label(w):
    if abs(w) <= 1:
        return "low"
    return "high" if w > 0 else "negative"


def default_step(hd: HomoclinicData, window) -> float:
    # root pairs for w < 0 separate like e^{pi w}; the phase turns at rate ~ log(1/hbar)
    rate = abs(math.log(hd.hbar)) + abs(math.log(hd.munu_plus)) + 4
    step = 0.05 / rate
    if window[0] < 0:
        step = min(step, 0.2 * math.exp(math.pi * window[0]) / rate)
    return step


def solve_spectrum(hd: HomoclinicData, window=(-1.0, 1.0), step: float | None = None,
                   route: str = "det", check_refinement: bool = True) -> FrequencySpectrum:
    """Real roots of the continuity determinant in ``window``.

    route "det" brackets sign changes of the phase-normalized determinant and confirms each
    root by |det| <= 1e-10 and winding number one; route "closed" solves the closed real
    condition (symmetric form when the data is symmetric).
    """
    step = step or default_step(hd, window)
    if route == "det":
        func = lambda w: realified_det(hd, w)  # noqa: E731
    elif route == "closed":
        func = (lambda w: symmetric_condition(hd, w)) if hd.is_symmetric else (lambda w: closed_condition(hd, w))  # noqa: E731
    elif route == "listed":
        func = lambda w: listed_condition(hd, w)  # noqa: E731
    else:
        raise ValueError(f"unknown route {route!r}")
    roots = scan_roots(func, window, step)
    stable = True
    if check_refinement:
        stable = len(scan_roots(func, window, step / 2)) == len(roots)
    residuals = np.array([abs(det_condition(hd, w)) for w in roots])
    windings = []
    if route == "det":
        gaps = np.diff(roots)
        for i, w in enumerate(roots):
            near = min([g for g in (gaps[i - 1] if i > 0 else None, gaps[i] if i < len(gaps) else None)
                        if g is not None] or [1.0])
            windings.append(winding_number(lambda s: det_condition(hd, s), w, min(0.25 * near, 1e-3)))
    return FrequencySpectrum(roots, residuals, [_label(w) for w in roots], windings, stable)


def root_agreement(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if len(a) != len(b):
        return math.inf
    return float(np.max(abs(a - b))) if len(a) else 0.0


# --- asymptotic patterns -----------------------------------------------------

def high_pattern(hd: HomoclinicData, n_values) -> np.ndarray:
    """(action/hbar - pi/4 + n pi)/log(1/hbar)."""
    n = np.asarray(n_values, float)
    return (hd.action_plus / hd.hbar - math.pi / 4 + n * math.pi) / math.log(1 / hd.hbar)


def low_pattern(hd: HomoclinicData, n_values) -> np.ndarray:
    """Linearized symmetric condition near w = 0 with arg G ~ -(gamma + 2 log 2) w."""
    slope = math.log(hd.munu_plus / hd.hbar) + EULER_GAMMA + 2 * math.log(2)
    c = math.cos(hd.action_plus / hd.hbar) / math.sqrt(2)
    x0 = math.acos(c)
    kappa = c * math.pi / (2 * math.sqrt(1 - c * c))
    n = np.asarray(n_values, float)
    plus = (math.pi / 4 + x0 + 2 * math.pi * n) / (slope - kappa)
    minus = (math.pi / 4 - x0 + 2 * math.pi * n) / (slope + kappa)
    return np.sort(np.concatenate([plus, minus]))


def listed_low_pattern(hd: HomoclinicData, n_values) -> np.ndarray:
    n = np.asarray(n_values, float)
    return (-3 * math.pi / 4 - math.sqrt(math.pi) + hd.action_plus / hd.hbar + 2 * math.pi * n) / math.log(hd.hbar)


def pattern_error(roots, pattern) -> float:
    """Max relative distance from each root to the nearest pattern value (exact zeros compared absolutely)."""
    pattern = np.asarray(pattern)
    worst = 0.0
    for w in roots:
        d = float(np.min(abs(pattern - w)))
        worst = max(worst, d / abs(w) if abs(w) > 1e-9 else d)
    return worst


def frequency_count(hd_for_hbar, hbars, window=(-1.0, 1.0)) -> dict:
    """Root counts per hbar; ``hd_for_hbar`` maps hbar to HomoclinicData."""
    counts = []
    for h in hbars:
        counts.append(len(solve_spectrum(hd_for_hbar(h), window, check_refinement=False).roots))
    ratios = np.array([c / abs(math.log(h)) for c, h in zip(counts, hbars)])
    mean = float(np.mean(ratios))
    return {"hbar": list(hbars), "counts": counts, "ratios": ratios.tolist(),
            "spread": float(np.max(abs(ratios - mean)) / mean) if mean > 0 else math.inf,
            "extreme_ratio": float(ratios.max() / ratios.min()) if ratios.min() > 0 else math.inf}


# --- spectrum inclusion on the oscillator surrogate ---------------------------

def spectrum_inclusion_check(lam: float, T: float, roots, frequencies, m_range=range(-3, 4)) -> dict:
    if not (lam > 0 and T > 0):
        raise ValueError("lambda and T must be positive")
    roots = np.asarray(roots, float)
    if roots.size == 0:
        return {"lattice": np.array([]), "distance": 0.0}
    m = np.asarray(list(m_range), float)
    lattice = (lam * roots[:, None] + 2 * np.pi * m[None, :] / T).ravel()
    freqs = np.asarray(frequencies, float)
    span = np.max(abs(freqs)) + 1e-9
    lattice = np.unique(np.round(lattice[abs(lattice) <= span], 12))
    dist = max((float(np.min(abs(freqs - v))) for v in lattice), default=0.0)
    return {"lattice": lattice, "distance": dist}


def harmonic_surrogate_inclusion(omegas=(1.0, SQRT2_CONVERGENT), D: int = 6, hbar: float = 0.3) -> dict:
    freqs = oscillator_frequencies(omegas, D, hbar)
    roots = np.arange(-(D - 1), D)
    return spectrum_inclusion_check(omegas[0], 2 * np.pi / omegas[1], roots, freqs, range(-(D - 1), D))


# --- half-line Fourier transforms --------------------------------------------

def power_ft_check(lam: complex, sigma: float, hbar: float, sign: int = +1) -> float:
    """Relative gap between the regularized quadrature and the closed form."""
    num = regularized_power_ft(lam, sigma, hbar, sign)
    ref = power_ft_closed_form(lam, sigma, hbar, sign)
    return abs(num - ref) / abs(ref)


# --- kernel ansatz in the oscillator instance --------------------------------

def rho_kernel(n: int):
    """Circle-phase kernel e^{-i j (t' - t)} e^{-i n t'} (raising convention)."""
    def beta(tp, t, j):
        return np.exp(-1j * j * (tp - t) - 1j * n * tp)
    beta.shift = n
    return beta


def a_beta_ansatz_ho(beta, hbar: float, J: int, D: int, weights=None, n_angles: int | None = None) -> np.ndarray:
    """sum_j w_j int int beta(t', t, j) |psi_{z'}><psi_z| over the circle |z|^2 = j hbar.

    ``beta`` is a callable on angle arrays or the string "delta" (coincident angles).
    """
    n_angles = n_angles or 2 * D + 2
    grid = oscillator_grid(hbar, D, math.sqrt(J * hbar))
    basis = hermite_basis(grid, D)
    out = np.zeros((D, D), complex)
    for j in range(J):
        w = 1.0 if weights is None else weights.get(j, 0.0)
        if w == 0.0:
            continue
        coeffs, theta = _circle_coefficients(math.sqrt(j * hbar), n_angles, basis)
        da = 2 * np.pi / n_angles
        if isinstance(beta, str):
            if beta != "delta":
                raise KernelClassError(f"unknown kernel {beta!r}")
            K = np.eye(n_angles) / da
        elif callable(beta):
            K = beta(theta[:, None], theta[None, :], j)
        else:
            raise KernelClassError("kernel must be callable or 'delta'")
        out += w * da * da * coeffs @ K @ coeffs.conj().T
    return out


def equivariance_check(n: int, t: float, hbar: float = 0.3, J: int = 8) -> dict:
    """U^{-1} A U with U = exp(-i t H0/hbar) against e^{i n t} A, and the rotated kernel."""
    D = J + abs(n) + 2
    beta = rho_kernel(n)
    A = a_beta_ansatz_ho(beta, hbar, J, D)
    U = np.diag(np.exp(-1j * t * (np.arange(D) + 0.5)))
    conj = U.conj().T @ A @ U
    target = cmath.exp(1j * n * t) * A
    rotated = a_beta_ansatz_ho(lambda tp, th, j: beta(tp - t, th - t, j), hbar, J, D)
    scale = np.linalg.norm(A)
    return {"operator": float(np.linalg.norm(conj - target) / scale),
            "kernel": float(np.linalg.norm(rotated - target) / scale)}
