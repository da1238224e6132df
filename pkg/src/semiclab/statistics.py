"""Two-particle exchange maps U (bra slots) and V (ket slots) and their action on Husimi,
Wigner and Toeplitz symbols, bosonic/fermionic projections, and the link with the
anticanonical composition operators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import metaplectic as mp
from .flatstates import (
    DensityOp,
    GaussianSymbol,
    coherent_columns,
    gaussian_toeplitz_kernel,
    husimi,
    phase_box,
    wigner,
)
from .numcore import GridSpec
from .toeplitz import (
    ANTICANONICAL_PAIR,
    composition_operator,
    frobenius_residual,
    parity_matrix,
)

MAX_TWO_BODY_POINTS = 64


class NormalizationError(ValueError):
    pass


class SymbolClassError(TypeError):
    """The exchange formula needs an entire (Gaussian-class) symbol."""


# --- two-body densities ---------------------------------------------------------------

@dataclass
class TwoBodyDensity:
    """Kernel rho(x1, x2; y1, y2) stored as an (M^2, M^2) matrix, row index x1*M + x2."""

    grid: GridSpec
    matrix: np.ndarray

    def __post_init__(self):
        if self.grid.M > MAX_TWO_BODY_POINTS:
            raise ValueError(f"two-body grids are limited to M <= {MAX_TWO_BODY_POINTS}")

    def tensor(self) -> np.ndarray:
        M = self.grid.M
        return self.matrix.reshape(M, M, M, M)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix) * self.grid.dx**2)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        m = self.matrix
        return bool(np.max(np.abs(m - m.conj().T)) <= tol * max(np.max(np.abs(m)), 1e-300))


def _from_tensor(grid, T):
    M = grid.M
    return TwoBodyDensity(grid, np.ascontiguousarray(T).reshape(M * M, M * M))


def exchange_U(rho: TwoBodyDensity) -> TwoBodyDensity:
    """rho(X; y1, y2) -> rho(X; y2, y1)."""
    return _from_tensor(rho.grid, rho.tensor().transpose(0, 1, 3, 2))


def exchange_V(rho: TwoBodyDensity) -> TwoBodyDensity:
    """rho(x1, x2; Y) -> rho(x2, x1; Y)."""
    return _from_tensor(rho.grid, rho.tensor().transpose(1, 0, 2, 3))


def exchange_sectors(rho: TwoBodyDensity) -> dict:
    """Joint eigen-components of (U, V): keys (sU, sV) with signs +-1."""
    u = exchange_U(rho).matrix
    v = exchange_V(rho).matrix
    uv = exchange_U(exchange_V(rho)).matrix
    out = {}
    for su in (1, -1):
        for sv in (1, -1):
            out[(su, sv)] = TwoBodyDensity(rho.grid, (rho.matrix + su * u + sv * v + su * sv * uv) / 4)
    return out


def bargmann_state(z: complex, grid: GridSpec, antiholomorphic: bool = False) -> np.ndarray:
    """g_z(x) = (pi hbar)^{-1/4} exp(-x^2/2hbar + x z/hbar - z^2/4hbar), holomorphic in z.

    The standard state of width 1 (no pq phase) is exp(i q p/2hbar - |z|^2/4hbar) g_z.
    """
    hb = grid.hbar
    x = grid.x
    v = (math.pi * hb) ** -0.25 * np.exp(-x * x / (2 * hb) + x * z / hb - z * z / (4 * hb))
    return v.conj() if antiholomorphic else v


def standard_state(z: complex, grid: GridSpec) -> np.ndarray:
    """phi_z(x) = (pi hbar)^{-1/4} exp(-(x-q)^2/2hbar) exp(i p x/hbar), z = q + i p."""
    hb = grid.hbar
    x = grid.x
    return (math.pi * hb) ** -0.25 * np.exp(-(x - z.real) ** 2 / (2 * hb) + 1j * z.imag * x / hb)


def product_dyads(terms, grid: GridSpec) -> TwoBodyDensity:
    """sum_k w_k |phi_{a1} phi_{a2}><phi_{b1} phi_{b2}|, terms = [(w, (a1, a2), (b1, b2)), ...]."""
    M = grid.M
    mat = np.zeros((M * M, M * M), dtype=complex)
    for w, (a1, a2), (b1, b2) in terms:
        ket = np.kron(standard_state(a1, grid), standard_state(a2, grid))
        bra = np.kron(standard_state(b1, grid), standard_state(b2, grid))
        mat += w * np.outer(ket, bra.conj())
    return TwoBodyDensity(grid, mat)


def husimi_two(rho: TwoBodyDensity, Z) -> np.ndarray:
    """(2 pi hbar)^-2 <phi_Z|rho|phi_Z> at rows Z = (z1, z2) of complex phase points."""
    g = rho.grid
    out = []
    for z1, z2 in np.atleast_2d(Z):
        v = np.kron(standard_state(z1, g), standard_state(z2, g))
        out.append(np.vdot(v, rho.matrix @ v) * g.dx**2)
    return np.array(out) / (2 * math.pi * g.hbar) ** 2


def husimi_continued(rho: TwoBodyDensity, W, Z) -> np.ndarray:
    """Sesquiholomorphic extension: antiholomorphic slots from W, holomorphic slots from Z.

    Equals husimi_two(rho, Z) when W = Z.
    """
    g = rho.grid
    hb = g.hbar
    out = []
    for (w1, w2), (z1, z2) in zip(np.atleast_2d(W), np.atleast_2d(Z)):
        bra = np.kron(bargmann_state(w1, g), bargmann_state(w2, g))
        ket = np.kron(bargmann_state(z1, g), bargmann_state(z2, g))
        val = np.vdot(bra, rho.matrix @ ket) * g.dx**2
        out.append(val * np.exp(-(np.conj(w1) * z1 + np.conj(w2) * z2) / (2 * hb)))
    return np.array(out) / (2 * math.pi * hb) ** 2


def husimi_exchange_check(rho: TwoBodyDensity, Z) -> dict:
    """Residuals of the Husimi exchange rules for U, V and UV on the sample points Z."""
    hb = rho.grid.hbar
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    S = Z[:, ::-1]
    d = Z[:, 0] - Z[:, 1]
    scale = np.max(np.abs(husimi_two(rho, Z))) or 1.0
    lhs_u = husimi_two(exchange_U(rho), Z)
    rhs_u = np.exp(-np.conj(d) * d / (2 * hb)) * husimi_continued(rho, Z, S)
    lhs_v = husimi_two(exchange_V(rho), Z)
    rhs_v = np.exp(-np.abs(d) ** 2 / (2 * hb)) * husimi_continued(rho, S, Z)
    lhs_uv = husimi_two(exchange_U(exchange_V(rho)), Z)
    rhs_uv = husimi_two(rho, S)
    return dict(
        U=float(np.max(np.abs(lhs_u - rhs_u)) / scale),
        V=float(np.max(np.abs(lhs_v - rhs_v)) / scale),
        UV=float(np.max(np.abs(lhs_uv - rhs_uv)) / scale),
    )


def exchange_suppression(a: complex, b: complex, hbar_values, L: float = 5.0, M: int = 32,
                         n: int = 9) -> dict:
    """Ratio sup|Husimi[U rho]| / sup|Husimi[rho]| for rho = |phi_a phi_b><phi_a phi_b|.

    The sample grid contains the midpoint (a+b)/2 where the exchange term peaks.  Returns the
    ratios and the fitted c in ratio ~ exp(-c/hbar).
    """
    ratios = []
    mid = (a + b) / 2
    for hb in hbar_values:
        grid = GridSpec(L, M, hb)
        rho = product_dyads([(1.0, (a, b), (a, b))], grid)
        off = np.linspace(-0.5, 0.5, n)
        pts = np.array([[mid + s, mid + t] for s in off for t in off])
        peak_direct = np.max(np.abs(husimi_two(rho, np.array([[a, b]]))))
        ratios.append(float(np.max(np.abs(husimi_two(exchange_U(rho), pts))) / peak_direct))
    inv = 1 / np.asarray(hbar_values)
    slope, _ = np.polyfit(inv, np.log(ratios), 1)
    return dict(hbar=list(hbar_values), ratios=ratios, c=float(-slope), c_expected=abs(a - b) ** 2 / 4)


# --- Wigner -------------------------------------------------------------------------

def cross_wigner(a: complex, b: complex, x, xi, hbar: float):
    """Weyl symbol of |phi_a><phi_b| (standard states), closed form."""
    qa, pa, qb, pb = a.real, a.imag, b.real, b.imag
    x = np.asarray(x)
    xi = np.asarray(xi)
    expo = (-((x - qa) ** 2 + (x - qb) ** 2) / (2 * hbar) + 1j * (pa - pb) * x / hbar
            + ((qa - qb) + 1j * (pa + pb - 2 * xi)) ** 2 / (4 * hbar))
    return 2 * np.exp(expo)


@dataclass
class CoherentMixture:
    """sum_k w_k |phi_{a1} phi_{a2}><phi_{b1} phi_{b2}| kept in factored form."""

    terms: list = field(default_factory=list)

    def exchange_U(self) -> "CoherentMixture":
        return CoherentMixture([(w, a, (b[1], b[0])) for w, a, b in self.terms])

    def exchange_V(self) -> "CoherentMixture":
        return CoherentMixture([(w, (a[1], a[0]), b) for w, a, b in self.terms])

    def dense(self, grid: GridSpec) -> TwoBodyDensity:
        return product_dyads(self.terms, grid)

    def wigner_closed(self, x1, xi1, x2, xi2, hbar: float):
        out = 0
        for w, (a1, a2), (b1, b2) in self.terms:
            out = out + w * cross_wigner(a1, b1, x1, xi1, hbar) * cross_wigner(a2, b2, x2, xi2, hbar)
        return out

    def wigner_grid(self, grid: GridSpec, points) -> np.ndarray:
        """Two-body Weyl symbol at rows (x1, xi1, x2, xi2) from 1-D grid kernels (x on the grid)."""
        pts = np.atleast_2d(points)
        out = np.zeros(len(pts), dtype=complex)
        for w, (a1, a2), (b1, b2) in self.terms:
            r1 = DensityOp(grid, np.outer(standard_state(a1, grid), standard_state(b1, grid).conj()))
            r2 = DensityOp(grid, np.outer(standard_state(a2, grid), standard_state(b2, grid).conj()))
            out += w * wigner(r1, pts[:, [0, 1]]) * wigner(r2, pts[:, [2, 3]])
        return out


def _minus_fourier(state: CoherentMixture, xp, xip, xm, xim, hbar, sign, half_width, n):
    # (pi hbar)^-1 int W(x+, xi+; Q, P) exp(sign 2i (xm P - xim Q)/hbar) dQ dP, rotated frame
    s = np.linspace(-half_width, half_width, n)
    d = s[1] - s[0]
    Q, P = np.meshgrid(s, s, indexing="ij")
    r = 1 / math.sqrt(2)
    vals = state.wigner_closed(r * (xp + Q), r * (xip + P), r * (xp - Q), r * (xip - P), hbar)
    phase = np.exp(sign * 2j * (xm * P - xim * Q) / hbar)
    return np.sum(vals * phase) * d * d / (math.pi * hbar)


def wigner_exchange_check(state: CoherentMixture, grid: GridSpec, points, half_width: float = 4.0,
                          n: int = 241) -> dict:
    """Wigner function of U rho (resp. V rho) against the symplectic Fourier transform of the
    Wigner function of rho in the relative variables (x-, xi-) = ((x1-x2), (xi1-xi2))/sqrt 2.

    LHS comes from 1-D grid kernels; RHS from the closed-form Wigner function and quadrature.
    Rows of ``points`` are (x1, xi1, x2, xi2) with x1, x2 on the grid.
    """
    hb = grid.hbar
    pts = np.atleast_2d(points)
    r = 1 / math.sqrt(2)
    res = {}
    for name, moved, sign in (("U", state.exchange_U(), +1), ("V", state.exchange_V(), -1)):
        lhs = moved.wigner_grid(grid, pts)
        rhs = np.array([
            _minus_fourier(state, r * (x1 + x2), r * (k1 + k2), r * (x1 - x2), r * (k1 - k2), hb, sign, half_width, n)
            for x1, k1, x2, k2 in pts
        ])
        res[name] = float(np.max(np.abs(lhs - rhs)))
    both = state.exchange_U().exchange_V().wigner_grid(grid, pts)
    swapped = state.wigner_grid(grid, pts[:, [2, 3, 0, 1]])
    res["UV"] = float(np.max(np.abs(both - swapped)))
    return res


# --- relative-coordinate (one degree of freedom) picture -------------------------------

def relative_U(H: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Kernel H(x, y) -> H(x, -y): the exchange of bra slots in the relative coordinate."""
    idx = (grid.M - np.arange(grid.M)) % grid.M
    return H[:, idx]


def relative_V(H: np.ndarray, grid: GridSpec) -> np.ndarray:
    idx = (grid.M - np.arange(grid.M)) % grid.M
    return H[idx, :]


def offdiagonal_forms(h, grid: GridSpec, box: float, n: int = 121, center=(0.0, 0.0)) -> dict:
    """int h |psi_{+-z}><psi_{+-z}| for the three sign patterns (standard width)."""
    Z, w = phase_box(box, n, center)
    vals = h(Z[:, 0], Z[:, 1]) * w / (2 * math.pi * grid.hbar)
    plus = coherent_columns(Z, 1j, grid)
    minus = coherent_columns(-Z, 1j, grid)
    return dict(
        V=(minus * vals) @ plus.conj().T,
        U=(plus * vals) @ minus.conj().T,
        UV=(minus * vals) @ minus.conj().T,
    )


_HOLO_FLIP = np.array([[0, 1j], [-1j, 0]])    # (q, p) -> (i p, -i q): z -> z, zbar -> -zbar
_ANTI_FLIP = np.array([[0, -1j], [1j, 0]])    # (q, p) -> (-i p, i q)


def toeplitz_exchange(h: GaussianSymbol, hbar: float, which: str = "U", form: str = "derived") -> GaussianSymbol:
    """Standard-width Toeplitz symbol of U H, V H or U V H.

    form="derived": h_U = -h(ip, -iq) e^{|z|^2/hbar}, h_V = -h(-ip, iq) e^{|z|^2/hbar};
    these grow, so they are quantized through the analytic Gaussian formula.
    form="listed": h_U = h(-ip, iq) e^{-|z|^2/2hbar}, h_V = h(ip, -iq) e^{-|z|^2/2hbar}.
    Both forms give h(-q, -p) for U V.
    """
    if not isinstance(h, GaussianSymbol):
        raise SymbolClassError("exchange of Toeplitz symbols is implemented for Gaussian symbols")
    if which == "UV":
        return h.pullback(-np.eye(2))
    if form == "derived":
        T = _HOLO_FLIP if which == "U" else _ANTI_FLIP
        weight = GaussianSymbol(-2 * np.eye(2) / hbar, np.zeros(2), -1.0)
    elif form == "listed":
        T = _ANTI_FLIP if which == "U" else _HOLO_FLIP
        weight = GaussianSymbol(np.eye(2) / hbar, np.zeros(2), 1.0)
    else:
        raise ValueError(f"unknown form {form!r}")
    return h.pullback(T) * weight


def toeplitz_exchange_check(h: GaussianSymbol, grid: GridSpec, form: str = "derived",
                            box: float = 5.0, n: int = 151) -> dict:
    """Compare quantized exchanged symbols with the exchange of the quantized operator, and
    the off-diagonal dyad forms with the exchanged operator (two independent routes)."""
    H = gaussian_toeplitz_kernel(h, grid).matrix
    exact = dict(U=relative_U(H, grid), V=relative_V(H, grid), UV=relative_V(relative_U(H, grid), grid))
    dyads = offdiagonal_forms(h, grid, box, n, center=tuple(np.real(h.center)))
    out = {}
    for key in ("U", "V", "UV"):
        sym = toeplitz_exchange(h, grid.hbar, key, form)
        out[f"symbol_{key}"] = frobenius_residual(exact[key], gaussian_toeplitz_kernel(sym, grid).matrix)
        out[f"dyads_{key}"] = frobenius_residual(exact[key], dyads[key])
    return out


def exchange_weight(h: GaussianSymbol, grid: GridSpec) -> float:
    """tr(U H) for the standard Toeplitz operator of h."""
    H = gaussian_toeplitz_kernel(h, grid).matrix
    return float(np.real(np.trace(relative_U(H, grid)) * grid.dx))


def exchange_weight_closed(amp: float, kappa: float, z0: complex, hbar: float) -> float:
    """tr(U H) for h = amp exp(-|z - z0|^2/(2 kappa hbar)): int h e^{-|z|^2/hbar} dz/(2 pi hbar)."""
    return amp * kappa / (1 + 2 * kappa) * math.exp(-abs(z0) ** 2 / (hbar * (1 + 2 * kappa)))


@dataclass
class BoseFermi:
    boson: np.ndarray
    fermion: np.ndarray
    report: dict


def bose_fermi_project(h: GaussianSymbol, grid: GridSpec, box: float = 3.0, n: int = 151,
                       tol: float = 1e-6) -> BoseFermi:
    """H_B = (H + VH + UH + UVH)/4 and H_F = (H - VH - UH + UVH)/4 with diagnostics."""
    H = gaussian_toeplitz_kernel(h, grid).matrix
    tr = np.trace(H) * grid.dx
    if abs(tr - 1) > tol:
        raise NormalizationError(f"trace of the Toeplitz operator is {tr:.8g}, expected 1")
    U, V = relative_U(H, grid), relative_V(H, grid)
    UV = relative_V(U, grid)
    HB = (H + V + U + UV) / 4
    HF = (H - V - U + UV) / 4
    dx = grid.dx

    def eigmin(A):
        Ah = (A + A.conj().T) / 2 * dx
        return float(np.linalg.eigvalsh(Ah).min())

    Z, w = phase_box(box, n, tuple(np.real(h.center)))
    vals = h(Z[:, 0], Z[:, 1]) * w / (2 * math.pi * grid.hbar)
    plus = coherent_columns(Z, 1j, grid)
    minus = coherent_columns(-Z, 1j, grid)
    sym = plus + minus
    anti = plus - minus
    dyad_B = (sym * vals) @ sym.conj().T / 4
    dyad_F = (anti * vals) @ anti.conj().T / 4
    nB = np.linalg.norm(HB)
    nF = np.linalg.norm(HF)
    report = dict(
        eigmin_B=eigmin(HB),
        eigmin_F=eigmin(HF),
        trace_B=float(np.real(np.trace(HB) * dx)),
        trace_F=float(np.real(np.trace(HF) * dx)),
        exchange_weight=float(np.real(np.trace(U) * dx)),
        fixed_U_B=float(np.linalg.norm(relative_U(HB, grid) - HB) / nB),
        fixed_V_B=float(np.linalg.norm(relative_V(HB, grid) - HB) / nB),
        anti_U_F=float(np.linalg.norm(relative_U(HF, grid) + HF) / nF),
        anti_V_F=float(np.linalg.norm(relative_V(HF, grid) + HF) / nF),
        dyadic_B=frobenius_residual(HB, dyad_B),
        dyadic_F=frobenius_residual(HF, dyad_F),
    )
    return BoseFermi(HB, HF, report)


def prop3_check(h: GaussianSymbol, grid: GridSpec, box: float = 3.0, n: int = 151) -> dict:
    """U H and V H against the off-diagonal quantization of C(S) H for both det -1 antidiagonals.

    Keys name the pairing: "U~opposite" is U H vs C([[0,i],[-i,0]]) H, and so on.
    """
    H = gaussian_toeplitz_kernel(h, grid).matrix
    ctr = tuple(np.real(h.center))
    ops = {name: composition_operator(S, h, 1j, grid, box, n, ctr).matrix for name, S in ANTICANONICAL_PAIR.items()}
    exch = dict(U=relative_U(H, grid), V=relative_V(H, grid))
    out = {f"{k}~{name}": frobenius_residual(exch[k], op) for k in exch for name, op in ops.items()}
    out["det"] = {name: complex(mp.det2(S)) for name, S in ANTICANONICAL_PAIR.items()}
    return out


# --- linear maps behind the exchange rules ---------------------------------------------

def exchange_matrices() -> dict:
    """The complex 2x2 maps attached to the exchanges and the real 4x4 relative-variable block."""
    S_minus = np.array([[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=float)
    S_full = np.block([[np.eye(4), np.zeros((4, 4))], [np.zeros((4, 4)), S_minus]])
    return dict(
        husimi=np.array([[0, -1j], [1j, 0]]),
        wigner=np.array([[0, 1j], [1j, 0]]),
        relative_block=S_minus,
        full=S_full,
    )


def symplectic_residual(S: np.ndarray, pairs) -> float:
    """|| S^T J S - J || for the form sum over (i, j) in pairs of dx_i ^ dx_j."""
    n = S.shape[0]
    J = np.zeros((n, n))
    for i, j in pairs:
        J[i, j] = 1
        J[j, i] = -1
    return float(np.max(np.abs(S.T @ J @ S - J)))


# --- Husimi / Toeplitz pairing ---------------------------------------------------------

def husimi_toeplitz_pairing(rho: DensityOp, g: GaussianSymbol, box: float = 4.0, n: int = 161) -> dict:
    """int Husimi[rho] * g dq dp  versus  tr(rho T_g) (T_g the standard Toeplitz operator of g)."""
    grid = rho.grid
    Z, w = phase_box(box, n, tuple(np.real(g.center)))
    hus = husimi(rho, Z)
    lhs = np.sum(hus * g(Z[:, 0], Z[:, 1]) * w)
    T = gaussian_toeplitz_kernel(g, grid).matrix
    rhs = np.trace(rho.matrix @ T) * grid.dx**2
    return dict(lhs=complex(lhs), rhs=complex(rhs), residual=float(abs(lhs - rhs)))


def exchange_weight_decay(z0: complex, kappa: float, hbar_values, L: float = 6.0, M: int = 256) -> dict:
    """tr(U H) for the normalized packet h = exp(-|z - z0|^2/(2 kappa hbar))/kappa as hbar shrinks.

    Returns numerical weights, the closed-form weights and the fitted rate c in exp(-c/hbar);
    the closed form predicts c = |z0|^2/(1 + 2 kappa).
    """
    numeric, closed = [], []
    for hb in hbar_values:
        A = np.eye(2) / (kappa * hb)
        h = GaussianSymbol(A, np.array([z0.real, z0.imag]), 1 / kappa)
        numeric.append(exchange_weight(h, GridSpec(L, M, hb)))
        closed.append(exchange_weight_closed(1 / kappa, kappa, z0, hb))
    slope, _ = np.polyfit(1 / np.asarray(hbar_values), np.log(np.abs(numeric)), 1)
    return dict(hbar=list(hbar_values), numeric=numeric, closed=closed, c=float(-slope),
                c_expected=abs(z0) ** 2 / (1 + 2 * kappa))
