"""Quantization of the two-sphere: polynomial Hilbert spaces H_N, coherent states, standard
Toeplitz operators, envelope-modified (a-) coherent states and the exact symbolic calculus
of a-Toeplitz operators for trigonometric matrices.

Coordinates: z = sqrt(tau/(1-tau)) e^{i theta}; the measure is
d mu_N = (1 - tau)^{N-1} d tau d theta / 2 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np


class QuadratureError(RuntimeError):
    pass


class SupportError(ValueError):
    pass


class OrderOverflowError(ValueError):
    pass


class DegreeOverflowError(ValueError):
    pass


# --- basis and quadrature -------------------------------------------------------------

def log_basis_norm(N: int) -> np.ndarray:
    """log of N!/(n!(N-1-n)!) for n = 0..N-1."""
    # exact integers first: differences of large lgamma values lose ~1e-12 at N = 256
    return np.array([math.log(N * math.comb(N - 1, k)) for k in range(N)])


def radial_profile(N: int, tau) -> np.ndarray:
    """A_n(tau) = |phi_n(z)| (1 - tau)^{(N-1)/2}, shape (len(tau), N), computed in logs."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    n = np.arange(N)
    with np.errstate(divide="ignore"):
        lt = np.log(tau)[:, None]
        l1 = np.log1p(-tau)[:, None]
    logs = 0.5 * (log_basis_norm(N)[None, :] + np.where(n == 0, 0.0, n * lt) + np.where(n == N - 1, 0.0, (N - 1 - n) * l1))
    return np.exp(logs)


def gauss_radial(n_nodes: int):
    """Gauss-Legendre (Jacobi weight with both exponents 0) nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    return (x + 1) / 2, w / 2


def panel_radial(N: int, per_panel: int = 24, hbar: float | None = None):
    """Composite Gauss-Legendre on panels of width hbar (default 1/N): the envelope varies on that scale."""
    hbar = 1.0 / N if hbar is None else hbar
    edges = np.append(np.arange(0.0, 1.0, hbar), 1.0)
    x, w = np.polynomial.legendre.leggauss(per_panel)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo < 1e-15:
            continue
        nodes.append(lo + (x + 1) * (hi - lo) / 2)
        weights.append(w * (hi - lo) / 2)
    return np.concatenate(nodes), np.concatenate(weights)


def angular_average(N: int, n_theta: int) -> np.ndarray:
    """E[m, n] = mean over the uniform theta grid of e^{i(m-n)theta}; the identity once n_theta >= N."""
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    d = np.arange(N)[:, None] - np.arange(N)[None, :]
    return np.exp(1j * d[:, :, None] * theta[None, None, :]).mean(axis=2)


@dataclass
class SpherePoly:
    """Element of H_N through its coefficients on the orthonormal monomials phi_n^N."""

    N: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.N,):
            raise ValueError("coefficient vector must have length N")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        norms = np.exp(0.5 * log_basis_norm(self.N))
        return np.polynomial.polynomial.polyval(z, self.coeffs * norms)

    def weighted_values(self, tau, theta) -> np.ndarray:
        """P(z) (1 - tau)^{(N-1)/2} on the tensor grid tau x theta."""
        A = radial_profile(self.N, tau) * self.coeffs[None, :]
        n = np.arange(self.N)
        return A @ np.exp(1j * n[:, None] * np.asarray(theta)[None, :])


def basis_vector(n: int, N: int) -> SpherePoly:
    c = np.zeros(N, dtype=complex)
    c[n] = 1
    return SpherePoly(N, c)


def sphere_inner(P: SpherePoly, Q: SpherePoly, per_panel: int = 8, n_theta: int | None = None) -> complex:
    """<P, Q> = int P conj(Q) d mu_N: panelled Gauss-Legendre in tau, trapezoid rule in theta."""
    if P.N != Q.N:
        raise ValueError("polynomials live in different spaces")
    N = P.N
    tau, w = panel_radial(N, per_panel)
    L = n_theta or 2 * N
    theta = 2 * np.pi * np.arange(L) / L
    vals = P.weighted_values(tau, theta) * Q.weighted_values(tau, theta).conj()
    out = np.sum(w[:, None] * vals) / L
    if not np.isfinite(out):
        raise QuadratureError("non-finite quadrature value")
    return complex(out)


def gram_matrix(N: int, per_panel: int = 8, n_theta: int | None = None) -> np.ndarray:
    """<phi_m, phi_n> for all pairs by the same tensor quadrature."""
    tau, w = panel_radial(N, per_panel)
    A = radial_profile(N, tau)
    E = angular_average(N, n_theta or 2 * N)
    return (A.T * w) @ A * E


def sphere_coherent(z0: complex, N: int) -> SpherePoly:
    """rho_{z0}(z) = N (1 + conj(z0) z)^{N-1}; coefficients conj(phi_n(z0))."""
    n = np.arange(N)
    return SpherePoly(N, np.exp(0.5 * log_basis_norm(N)) * np.conj(z0) ** n)


def tau_of(z) -> np.ndarray:
    r2 = np.abs(z) ** 2
    return r2 / (1 + r2)


# --- standard Toeplitz ----------------------------------------------------------------

def sphere_toeplitz(f: Callable, N: int, per_panel: int = 8, n_theta: int | None = None) -> np.ndarray:
    """Matrix of pi_N(f .) on the phi basis: T[m, n] = <T phi_n, phi_m>; f takes (tau, theta)."""
    tau, w = panel_radial(N, per_panel)
    L = n_theta or 2 * N + 16
    theta = 2 * np.pi * np.arange(L) / L
    F = f(tau[:, None], theta[None, :]) * np.ones((len(tau), L))
    fhat = np.fft.fft(F, axis=1) / L   # fhat[:, k] = mean f e^{-i k theta}
    A = radial_profile(N, tau)
    T = np.zeros((N, N), dtype=complex)
    floor = 1e-16 * max(np.max(np.abs(fhat)), 1e-300)
    for d in range(-(N - 1), N):
        col = fhat[:, d % L]
        if np.max(np.abs(col)) <= floor:
            continue
        m = np.arange(max(0, d), min(N, N + d))
        T[m, m - d] = (w * col) @ (A[:, m] * A[:, m - d])
    if not np.all(np.isfinite(T)):
        raise QuadratureError("non-finite Toeplitz matrix")
    return T


def husimi_sphere(T: np.ndarray, z) -> np.ndarray:
    """<T rho_z, rho_z>/<rho_z, rho_z> at the points z."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    N = T.shape[0]
    V = radial_profile(N, tau_of(z)) * np.exp(-1j * np.outer(np.angle(z), np.arange(N)))
    num = np.einsum("km,mn,kn->k", V.conj(), T, V)
    return np.real_if_close(num / np.sum(np.abs(V) ** 2, axis=1))


def sphere_laplacian(f: Callable, tau, theta, step: float = 1e-4) -> np.ndarray:
    """(1 + |z|^2)^2 d_z d_zbar f = d_tau(tau(1-tau) d_tau f) + d_theta^2 f/(4 tau(1-tau))."""
    tau = np.asarray(tau, dtype=float)
    theta = np.asarray(theta, dtype=float)
    h = step
    fp, f0, fm = f(tau + h, theta), f(tau, theta), f(tau - h, theta)
    s = tau * (1 - tau)
    d1 = (fp - fm) / (2 * h)
    d2 = (fp - 2 * f0 + fm) / h**2
    dth = (f(tau, theta + h) - 2 * f0 + f(tau, theta - h)) / h**2
    return s * d2 + (1 - 2 * tau) * d1 + dth / (4 * s)


HARMONICS = {
    "height": lambda t, th: 2 * t - 1,
    "cos": lambda t, th: 2 * np.sqrt(t * (1 - t)) * np.cos(th),
    "sin": lambda t, th: 2 * np.sqrt(t * (1 - t)) * np.sin(th),
}


def husimi_remainder(f: Callable, N: int, points) -> float:
    """max |Husimi(T[f]) - f - Lap f / N| over the sample points (z values)."""
    z = np.asarray(points, dtype=complex)
    tau, theta = tau_of(z), np.angle(z)
    hus = husimi_sphere(sphere_toeplitz(f, N), z)
    return float(np.max(np.abs(hus - f(tau, theta) - sphere_laplacian(f, tau, theta) / N)))


def remainder_slope(f: Callable, Ns=(16, 32, 64, 128, 256), points=None) -> dict:
    if points is None:
        r = np.linspace(0.3, 2.0, 7)
        points = np.concatenate([r * np.exp(1j * a) for a in (0.3, 1.7, 4.0)])
    rem = [husimi_remainder(f, N, points) for N in Ns]
    slope = np.polyfit(np.log(Ns), np.log(rem), 1)[0]
    return dict(N=list(Ns), remainder=rem, slope=float(slope))


# --- envelopes and a-coherent states ----------------------------------------------------

def _smooth_step(u):
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0, np.exp(-1 / np.where(u > 0, u, 1)), 0.0)
        b = np.where(u < 1, np.exp(-1 / np.where(u < 1, 1 - u, 1)), 0.0)
    return a / (a + b)


@dataclass
class Envelope:
    """Fourier transform a~ of the envelope, with its declared support interval."""

    a_tilde: Callable
    support: tuple

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        lo, hi = self.support
        return np.where((y >= lo) & (y <= hi), self.a_tilde(y), 0.0)


def plateau_envelope(half_width: float, ramp: float, center: float = 0.0) -> Envelope:
    """a~ = 1 on |y - center| <= half_width - ramp, smooth C^infinity descent to 0 at half_width."""
    def a_tilde(y):
        return _smooth_step((half_width - np.abs(y - center)) / ramp)
    return Envelope(a_tilde, (center - half_width, center + half_width))


def check_support(env: Envelope, N: int):
    lo, hi = env.support
    if lo < -N or hi > N:
        raise SupportError(f"envelope support [{lo}, {hi}] leaves [-N, N] for N={N}")


def a_coherent(z: complex, env: Envelope, N: int, hbar: float | None = None) -> SpherePoly:
    """psi_z^a: coefficient a~(tau/hbar - n) conj(phi_n(z)) on phi_n."""
    hbar = 1.0 / N if hbar is None else hbar
    n = np.arange(N)
    rho = sphere_coherent(z, N).coeffs
    return SpherePoly(N, env(float(tau_of(z)) / hbar - n) * rho)


@dataclass
class ACoeffs:
    envelope: Envelope
    N: int
    hbar: float
    values: np.ndarray


def compute_CnN(env: Envelope, N: int, hbar: float | None = None, per_panel: int = 48) -> ACoeffs:
    """C_n^N = N!/(n!(N-1-n)!) int_0^1 |a~(tau/hbar - n)|^2 tau^n (1-tau)^{N-1-n} d tau."""
    check_support(env, N)
    hbar = 1.0 / N if hbar is None else hbar
    tau, w = panel_radial(N, per_panel, hbar)
    A2 = radial_profile(N, tau) ** 2
    env2 = np.abs(env(tau[:, None] / hbar - np.arange(N)[None, :])) ** 2
    C = np.sum(w[:, None] * env2 * A2, axis=0)
    if np.any(C <= 0):
        raise SupportError("envelope vanishes on the radial range of some level")
    return ACoeffs(env, N, hbar, C)


def edge_asymptotic(env: Envelope, n: int, lam_max: float | None = None, nodes: int = 4000) -> float:
    """(1/n!) int |a~(lam - n)|^2 lam^n e^{-lam} d lam: small-n limit of C_n^N."""
    lam_max = lam_max or (n + 40 + 10 * math.sqrt(n + 1))
    lam, w = gauss_radial(nodes)
    lam = lam * lam_max
    w = w * lam_max
    with np.errstate(divide="ignore"):
        logp = np.where(lam > 0, n * np.log(lam), 0.0) - lam - math.lgamma(n + 1)
    return float(np.sum(w * np.abs(env(lam - n)) ** 2 * np.exp(logp)))


def resolution_matrix(env: Envelope, N: int, hbar: float | None = None, per_panel: int = 24,
                      n_theta: int | None = None) -> np.ndarray:
    """int |psi_z^a><psi_z^a| d mu_N on the phi basis by tensor quadrature."""
    hbar = 1.0 / N if hbar is None else hbar
    tau, w = panel_radial(N, per_panel, hbar)
    V = radial_profile(N, tau) * env(tau[:, None] / hbar - np.arange(N)[None, :])
    E = angular_average(N, n_theta or 2 * N)
    return (V.T * w) @ V.conj() * E.T


def a_inner(f: SpherePoly, g: SpherePoly, C: ACoeffs) -> complex:
    """<f, g>_a = sum_n f_n conj(g_n)/C_n (phi coefficients)."""
    return complex(np.sum(f.coeffs * g.coeffs.conj() / C.values))


# --- trigonometric matrices and their symbols ------------------------------------------

@dataclass
class TrigMatrix:
    """gamma(tau, theta) = sum_k gamma_k(tau) e^{i k theta} and its banded matrix.

    shift="index": entry (i + k, i) on the psi basis is gamma_k(i hbar).
    shift="literal": gamma_k((k - ((-1)^k - 1)/2) hbar), the same value on the whole diagonal.
    """

    modes: dict
    shift: str = "index"

    @property
    def order(self) -> int:
        return max(abs(k) for k in self.modes)

    def argument(self, k: int, i, hbar: float):
        if self.shift == "index":
            return np.asarray(i, dtype=float) * hbar
        if self.shift == "literal":
            return np.full(np.shape(i), (k - ((-1) ** k - 1) / 2) * hbar)
        raise ValueError(f"unknown shift convention {self.shift!r}")

    def matrix(self, N: int, hbar: float | None = None) -> np.ndarray:
        hbar = 1.0 / N if hbar is None else hbar
        if self.order >= N:
            raise OrderOverflowError("trigonometric order must stay below N")
        out = np.zeros((N, N), dtype=complex)
        for k, g in self.modes.items():
            i = np.arange(max(0, -k), min(N, N - k))
            out[i + k, i] = g(self.argument(k, i, hbar))
        return out


@dataclass
class TrigSymbol:
    """Operator-valued symbol z -> sum_k e^{ikx} conj(z)^{-k} g_k(tau(z)/hbar - i d_x).

    On the envelope side a~(y) the factor g_k(tau/hbar - i d_x) multiplies by g_k(tau/hbar - y)
    and e^{ikx} shifts y -> y + k, so on the lattice y = tau/hbar - n the symbol acts as a
    banded matrix with entry g_k(n) from level n to level n + k.  Each g_k is a function of
    the lattice level nu.
    """

    modes: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return max((abs(k) for k in self.modes), default=0)

    def __matmul__(self, other: "TrigSymbol") -> "TrigSymbol":
        """Operator composition: g_k(nu + k') g'_{k'}(nu) collected on k + k'."""
        out: dict = {}
        for k, g in self.modes.items():
            for kp, gp in other.modes.items():
                term = (lambda g, gp, kp: lambda nu: g(np.asarray(nu) + kp) * gp(nu))(g, gp, kp)
                prev = out.get(k + kp)
                out[k + kp] = term if prev is None else (lambda a, b: lambda nu: a(nu) + b(nu))(prev, term)
        return TrigSymbol(out)

    def lattice_matrix(self, levels) -> np.ndarray:
        """Matrix of the symbol on the lattice window of the given levels (auxiliary basis)."""
        levels = np.asarray(levels)
        pos = {int(v): j for j, v in enumerate(levels)}
        out = np.zeros((len(levels), len(levels)), dtype=complex)
        for k, g in self.modes.items():
            for j, nu in enumerate(levels):
                t = pos.get(int(nu) + k)
                if t is not None:
                    out[t, j] += g(np.array(float(nu)))
        return out


def binomial_ratio(N: int, k: int) -> Callable:
    """mu_k(nu) = sqrt(c_nu / c_{nu+k}), c_n = N!/(n!(N-1-n)!), zero off the level range."""
    logc = log_basis_norm(N)

    def mu(nu):
        nu = np.rint(np.asarray(nu, dtype=float)).astype(int)
        ok = (nu >= 0) & (nu < N) & (nu + k >= 0) & (nu + k < N)
        a = np.clip(nu, 0, N - 1)
        b = np.clip(nu + k, 0, N - 1)
        return np.where(ok, np.exp(0.5 * (logc[a] - logc[b])), 0.0)
    return mu


def symbol_of(gamma: TrigMatrix, N: int, hbar: float | None = None) -> TrigSymbol:
    """sigma[N_gamma]: mode k is gamma_k(tau - i hbar d_x) mu_k(tau/hbar - i d_x) with mu_k the
    binomial ratio; the tau dependence enters only through the lattice level."""
    hbar = 1.0 / N if hbar is None else hbar
    modes = {}
    for k, g in gamma.modes.items():
        mu = binomial_ratio(N, k)
        modes[k] = (lambda g, mu: lambda nu: g(np.clip(np.asarray(nu, dtype=float), 0, N - 1) * hbar) * mu(nu))(g, mu)
    return TrigSymbol(modes)


def identity_symbol() -> TrigSymbol:
    return TrigSymbol({0: lambda nu: np.ones(np.shape(nu))})


def convolve_C(sigma: TrigSymbol, C: ACoeffs) -> TrigSymbol:
    """sigma * C: mode k picks up sqrt(C_{nu+k}/C_nu), a function of the level nu."""
    vals = C.values
    N = len(vals)

    def factor(k):
        def f(nu):
            nu = np.rint(np.asarray(nu, dtype=float)).astype(int)
            ok = (nu >= 0) & (nu < N) & (nu + k >= 0) & (nu + k < N)
            a = np.clip(nu, 0, N - 1)
            b = np.clip(nu + k, 0, N - 1)
            return np.where(ok, np.sqrt(vals[b] / vals[a]), 0.0)
        return f

    return TrigSymbol({k: (lambda g, f: lambda nu: g(nu) * f(nu))(g, factor(k)) for k, g in sigma.modes.items()})


def a_toeplitz(sigma: TrigSymbol, C: ACoeffs, per_panel: int = 24, n_theta: int | None = None,
               basis: str = "psi") -> np.ndarray:
    """Op_a^T(sigma) = int |psi_z^{(sigma * C)(z) a}>_a <psi_z^a| d mu_N by tensor quadrature.

    The ket envelope at level m is sum_k conj(z)^{-k} g_k(m - k) a~(tau/hbar - m + k); the
    a-bra divides column n by C_n.  Returned on the psi basis (psi_n = sqrt(C_n) phi_n) or,
    with basis="phi", on the phi basis.
    """
    N, hbar, env = C.N, C.hbar, C.envelope
    if sigma.order >= N:
        raise OrderOverflowError("symbol order must stay below N")
    s = convolve_C(sigma, C)
    tau, w = panel_radial(N, per_panel, hbar)
    A = radial_profile(N, tau)
    levels = np.arange(N)
    atil = env(tau[:, None] / hbar - levels[None, :])
    E = angular_average(N, n_theta or 2 * N)
    logc = log_basis_norm(N)
    # ket coefficient of conj(phi_n) weighted profile inside level m = n + k:
    # conj(z)^{-k} conj(phi_m) = sqrt(c_m/c_n) conj(phi_n)
    B = np.zeros((N, N), dtype=complex)
    for k, g in s.modes.items():
        n = levels[(levels + k >= 0) & (levels + k < N)]
        B[n + k, n] = g(n) * np.exp(0.5 * (logc[n + k] - logc[n]))
    ket = A * atil                     # (nodes, N): weighted profile times envelope, per level n
    bra = (A * atil).conj()
    op = np.zeros((N, N), dtype=complex)
    for j in range(len(tau)):
        op += w[j] * (B * ket[j][None, :]) @ (E * bra[j][None, :])
    op = op / C.values[None, :]
    if basis == "phi":
        return op
    r = np.sqrt(C.values)
    return op * r[None, :] / r[:, None]


def theorem5_verify(gamma: TrigMatrix, gamma_p: TrigMatrix, env: Envelope, N: int,
                    per_panel: int = 24, coeff_panel: int = 48) -> dict:
    """Round trips N_gamma = Op(sigma[N_gamma]) and the product rule, all on the psi basis."""
    if gamma.order + gamma_p.order >= N / 2:
        raise OrderOverflowError("combined trigonometric order must stay below N/2")
    C = compute_CnN(env, N, per_panel=coeff_panel)
    M1, M2 = gamma.matrix(N), gamma_p.matrix(N)
    s1, s2 = symbol_of(gamma, N), symbol_of(gamma_p, N)
    O1 = a_toeplitz(s1, C, per_panel)
    O2 = a_toeplitz(s2, C, per_panel)
    O12 = a_toeplitz(s1 @ s2, C, per_panel)
    scale = max(np.max(np.abs(M1)), np.max(np.abs(M2)), 1e-300)
    return dict(
        first=float(np.max(np.abs(O1 - M1)) / scale),
        second=float(np.max(np.abs(O2 - M2)) / scale),
        product=float(np.max(np.abs(O12 - M1 @ M2)) / scale**2),
        N=N,
    )


def symbol_composition_check(s1: TrigSymbol, s2: TrigSymbol, N: int) -> float:
    """Symbolic composition against the product of lattice matrices on an enlarged window."""
    K = s1.order + s2.order
    levels = np.arange(-K, N + K)
    direct = s1.lattice_matrix(levels) @ s2.lattice_matrix(levels)
    symbolic = (s1 @ s2).lattice_matrix(levels)
    inner = slice(K, K + N)
    return float(np.max(np.abs(direct[inner, inner] - symbolic[inner, inner])))


# --- noncommutative blow-up product -----------------------------------------------------

class GaussPoly:
    """Polynomial in (u, phi, tau) with exact Gaussian-rational coefficients.

    Stored as {(i, j, l): (re, im)} for u^i phi^j tau^l with Fraction parts.
    """

    def __init__(self, terms=None):
        self.terms = {}
        for key, val in (terms or {}).items():
            re, im = val if isinstance(val, tuple) else (val, 0)
            re, im = Fraction(re), Fraction(im)
            if re or im:
                self.terms[tuple(key)] = (re, im)

    def __eq__(self, other):
        return isinstance(other, GaussPoly) and self.terms == other.terms

    def __add__(self, other):
        out = dict(self.terms)
        for k, (a, b) in other.terms.items():
            c, d = out.get(k, (Fraction(0), Fraction(0)))
            out[k] = (a + c, b + d)
        return GaussPoly(out)

    def __sub__(self, other):
        return self + other.scale((Fraction(-1), Fraction(0)))

    def scale(self, c):
        cr, ci = c
        return GaussPoly({k: (a * cr - b * ci, a * ci + b * cr) for k, (a, b) in self.terms.items()})

    def __mul__(self, other):
        out = GaussPoly()
        for k1, (a, b) in self.terms.items():
            for k2, (c, d) in other.terms.items():
                out = out + GaussPoly({tuple(x + y for x, y in zip(k1, k2)): (a * c - b * d, a * d + b * c)})
        return out

    def derivative(self, var: int, times: int = 1):
        out = {}
        for k, (a, b) in self.terms.items():
            if k[var] < times:
                continue
            f = math.perm(k[var], times)
            nk = list(k)
            nk[var] -= times
            out[tuple(nk)] = (a * f, b * f)
        return GaussPoly(out)

    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, u, phi, tau):
        return sum((complex(a) + 1j * complex(b)) * u ** k[0] * phi ** k[1] * tau ** k[2]
                   for k, (a, b) in self.terms.items())


def _ipow(j: int):
    return [(1, 0), (0, 1), (-1, 0), (0, -1)][j % 4]


def blowup_product(S: GaussPoly, Sp: GaussPoly, hbar0, max_degree: int = 24) -> GaussPoly:
    """S # S' with S(u, phi + i d_xi', tau) S'(1 - hbar0 xi', phi, tau) at xi' = xi, u = 1 - hbar0 xi.

    Expanded as sum_j (i^j / j!) (-hbar0)^j d_phi^j S . d_u^j S' (finite for polynomials).
    """
    hbar0 = Fraction(hbar0)
    out = GaussPoly()
    j = 0
    while True:
        dS = S.derivative(1, j)
        dSp = Sp.derivative(0, j)
        if dS.is_zero() or dSp.is_zero():
            break
        re, im = _ipow(j)
        c = Fraction((-hbar0) ** j, math.factorial(j))
        out = out + (dS * dSp).scale((re * c, im * c))
        j += 1
    if out.degree() > max_degree:
        raise DegreeOverflowError(f"product degree {out.degree()} exceeds {max_degree}")
    return out
