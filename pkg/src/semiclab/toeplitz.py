"""Width reweighting of Toeplitz symbols, off-diagonal Toeplitz operators, conjugation by
complex metaplectic operators and the composition operators C(S)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import metaplectic as mp
from .flatstates import (
    DensityOp,
    GaussianSymbol,
    coherent_columns,
    phase_box,
    reweight_gaussian,
    toeplitz,
    weyl_symbol,
    width_metric,
)
from .numcore import GridSpec

DENOMINATOR_FLOOR = 1e-10


class NearOrthogonalError(ArithmeticError):
    """An off-diagonal dyad has a vanishing normalizing overlap."""


class InadmissibleError(ValueError):
    pass


# --- reweighting ------------------------------------------------------------------

def reweight_domain_ok(alpha: complex, alpha_p: complex) -> bool:
    """The sufficient condition Im(a - a') > 0 and Im(1/a - 1/a') < 0."""
    return (alpha - alpha_p).imag > 0 and (1 / alpha - 1 / alpha_p).imag < 0


def reweight_symbol(h, alpha: complex, alpha_p: complex, hbar: float, grid=None, strict: bool = False):
    """Symbol g with Toeplitz_alpha[g] = Toeplitz_alpha_p[h].

    The map is the Fourier multiplier exp(hbar/4 grad.(K_alpha_p - K_alpha).grad), where K_a is
    the covariance form of the coherent state of width a.  Gaussian symbols are mapped exactly;
    sampled symbols (a 2-D array on a uniform (q, p) box with spacing ``grid``=(dq, dp)) use FFT.
    With ``strict`` the classical sufficient domain condition is enforced.
    """
    if strict and not reweight_domain_ok(alpha, alpha_p):
        raise mp.DomainError(f"(alpha, alpha') = ({alpha}, {alpha_p}) outside the stated domain")
    if isinstance(h, GaussianSymbol):
        out = reweight_gaussian(h, alpha_p, alpha, hbar)
        if np.linalg.eigvalsh(np.real(out.A)).min() <= 0:
            raise mp.DomainError("reweighted symbol is not a decaying Gaussian")
        return out
    if callable(h):
        raise TypeError("general callables must be sampled first")
    arr = np.asarray(h, dtype=complex)
    dq, dp = grid
    kq = 2 * np.pi * np.fft.fftfreq(arr.shape[0], d=dq)
    kp = 2 * np.pi * np.fft.fftfreq(arr.shape[1], d=dp)
    KQ, KP = np.meshgrid(kq, kp, indexing="ij")
    K = width_metric(alpha_p) - width_metric(alpha)
    quad = K[0, 0] * KQ**2 + 2 * K[0, 1] * KQ * KP + K[1, 1] * KP**2
    mult = np.exp(-hbar / 4 * quad)
    spec = np.fft.fft2(arr)
    if np.max(np.abs(mult)) > 1:
        spec = np.where(np.abs(spec) < 1e-12 * np.max(np.abs(spec)), 0, spec)
    return np.fft.ifft2(spec * mult)


# --- dyad sums -----------------------------------------------------------------------

@dataclass
class DyadSum:
    """sum_k w_k |psi^{ket_width}_{u_k}><psi^{bra_width}_{v_k}| / <psi_{v_k}| I^parity psi_{u_k}>."""

    weights: np.ndarray
    ket_points: np.ndarray
    ket_width: complex
    bra_points: np.ndarray
    bra_width: complex
    parity: int = 0

    def matrix(self, grid: GridSpec, floor: float = DENOMINATOR_FLOOR) -> DensityOp:
        keep = np.abs(self.weights) > 0
        ket = coherent_columns(self.ket_points[keep], self.ket_width, grid)
        bra = coherent_columns(self.bra_points[keep], self.bra_width, grid)
        target = ket[::-1] if self.parity else ket
        # parity: (I psi)(x) = psi(-x); the grid is symmetric up to its first point
        if self.parity:
            target = np.roll(target, 1, axis=0)
        den = np.sum(bra.conj() * target, axis=0) * grid.dx
        if np.min(np.abs(den)) < floor:
            raise NearOrthogonalError(f"normalizing overlap {np.min(np.abs(den)):.1e} below {floor:g}")
        return DensityOp(grid, (ket * (self.weights[keep] / den)) @ bra.conj().T)


def toeplitz_dyads(h, alpha: complex, hbar: float, box: float, n: int, center=(0.0, 0.0)) -> DyadSum:
    Z, w = phase_box(box, n, center)
    vals = h(Z[:, 0], Z[:, 1]) * w / (2 * math.pi * hbar)
    return DyadSum(vals.astype(complex), Z, alpha, Z.copy(), alpha, 0)


@dataclass
class OffDiagSymbol:
    """base(z) delta((z', a') - (M z, ket_width)) with bra width alpha, realized by a linear map M."""

    base: object
    alpha: complex
    ket_map: np.ndarray
    ket_width: complex
    parity: int = 0


def offdiag_quantize(sigma: OffDiagSymbol, grid: GridSpec, box: float, n: int = 121,
                     center=(0.0, 0.0)) -> DensityOp:
    """int base(z) |psi^{a'}_{Mz}><psi^a_z| / <psi^a_z| I^parity psi^{a'}_{Mz}> dq dp/(2 pi hbar)."""
    Z, w = phase_box(box, n, center)
    vals = sigma.base(Z[:, 0], Z[:, 1]) * w / (2 * math.pi * grid.hbar)
    M = np.asarray(sigma.ket_map, dtype=float)
    d = DyadSum(vals.astype(complex), Z @ M.T, sigma.ket_width, Z, sigma.alpha, sigma.parity)
    return d.matrix(grid)


# --- composition operators --------------------------------------------------------

def _flow_points(V, width, points, convention):
    new_width = mp.transported_width(V, width, convention)
    T = mp.transport_matrix(V, width, convention)
    return new_width, points @ T.T


def c_compose(S, X: DyadSum, convention: str = "reflected") -> DyadSum:
    """C(S) acting on a dyad sum.

    Each normalized dyad is transported: the ket label by the extended flow of S^-1, the bra
    label by that of (S^c)^-1; for det S = -1 both points change sign and the parity flag of
    the normalization flips.  For det S = +1 this is exactly conjugation by U(S).
    """
    S = np.asarray(S, dtype=complex)
    det = mp.det2(S)
    if abs(abs(det) - 1) > 1e-12 or abs(det.imag) > 1e-12:
        raise InadmissibleError("C(S) needs det S = +1 or -1")
    sign = 1 if det.real > 0 else -1
    Sc = mp.conj_matrix(S)
    try:
        kw, kp = _flow_points(mp.inv2(S), X.ket_width, X.ket_points, convention)
        bw, bp = _flow_points(mp.inv2(Sc), X.bra_width, X.bra_points, convention)
    except (mp.DegenerateError, mp.InfinityError) as exc:
        raise InadmissibleError(str(exc)) from exc
    parity = X.parity ^ (1 if sign < 0 else 0)
    return DyadSum(X.weights.copy(), sign * kp, kw, sign * bp, bw, parity)


def offdiag_symbol(S, h: GaussianSymbol, alpha: complex, hbar: float, symbol_width: complex = 1j,
                   convention: str = "reflected") -> OffDiagSymbol:
    """Off-diagonal symbol of C(S)H for H the Toeplitz operator of h at ``symbol_width``.

    base(z) = J h~(T_c (s z)),  map z -> T_R z,  ket width S^-1 S^c.alpha, where h~ is h
    reweighted to S^c.alpha, T_c the transport matrix of S^c, T_R that of R = S^-1 S^c,
    J = |det T_c| (density push-forward) and s = det S.  For det S = -1 the normalization
    carries the parity operator.
    """
    S = np.asarray(S, dtype=complex)
    det = mp.det2(S)
    if abs(abs(det) - 1) > 1e-12 or abs(det.imag) > 1e-12:
        raise InadmissibleError("C(S) needs det S = +1 or -1")
    sign = 1 if det.real > 0 else -1
    Sc = mp.conj_matrix(S)
    R = mp.inv2(S) @ Sc
    try:
        for V in (mp.inv2(S), mp.inv2(Sc), R):
            w = mp.transported_width(V, alpha, convention)
            if w.imag <= 0:
                raise InadmissibleError(f"Im(V.alpha) <= 0 for V={V.tolist()}")
        a0 = mp.transported_width(Sc, alpha, convention)
        Tc = mp.transport_matrix(Sc, alpha, convention)
        beta = mp.transported_width(R, alpha, convention)
        TR = mp.transport_matrix(R, alpha, convention)
    except (mp.DegenerateError, mp.InfinityError) as exc:
        raise InadmissibleError(str(exc)) from exc
    ht = reweight_gaussian(h, symbol_width, a0, hbar) if a0 != symbol_width else h
    base = ht.pullback(sign * Tc).scaled(abs(np.linalg.det(Tc)))
    return OffDiagSymbol(base, alpha, TR, beta, 0 if sign > 0 else 1)


def composition_operator(S, h: GaussianSymbol, alpha: complex, grid: GridSpec, box: float,
                         n: int = 121, center=(0.0, 0.0), symbol_width: complex = 1j,
                         convention: str = "reflected") -> DensityOp:
    """C(S)H by quantizing its off-diagonal symbol; ``box`` and ``center`` describe the
    support of h and are carried to the integration variable."""
    sigma = offdiag_symbol(S, h, alpha, grid.hbar, symbol_width, convention)
    sign = -1 if sigma.parity else 1
    Tc = mp.transport_matrix(mp.conj_matrix(np.asarray(S, dtype=complex)), alpha, convention)
    c = np.linalg.solve(sign * Tc, np.asarray(center, dtype=float))
    scale = 1 / min(abs(np.linalg.eigvals(Tc)))
    return offdiag_quantize(sigma, grid, box * scale, n, np.real(c))


# --- verification routines -----------------------------------------------------------

class ConjugationInstabilityError(ArithmeticError):
    """Dense conjugation lost accuracy (the trace, a conjugation invariant, drifted)."""


def _check_trace(before, after, grid, tol=1e-6):
    t0 = np.trace(before) * grid.dx
    t1 = np.trace(after) * grid.dx
    if not np.isfinite(t1) or abs(t1 - t0) > tol * max(abs(t0), 1e-300):
        raise ConjugationInstabilityError(f"trace drifted from {t0:.6g} to {t1:.6g}")


def frobenius_residual(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.linalg.norm(A - B) / max(np.linalg.norm(A), 1e-300))


def theorem1_verify(h: GaussianSymbol, alpha: complex, S, grid: GridSpec, box: float = 2.0,
                    n: int = 121, center=(0.0, 0.0), convention: str = "reflected") -> dict:
    """Compare U(S)^-1 H U(S) (dense conjugation of the alpha-Toeplitz operator) with the
    off-diagonal Toeplitz integral."""
    S = np.asarray(S, dtype=complex)
    if abs(mp.det2(S) - 1) > 1e-12:
        raise InadmissibleError("conjugation needs det S = 1")
    H = toeplitz(h, alpha, grid, box=box, n=n, center=center)
    lhs = mp.conjugate_operator(S, H.matrix, grid)
    _check_trace(H.matrix, lhs, grid)
    rhs = composition_operator(S, h, alpha, grid, box, n, center, symbol_width=alpha,
                               convention=convention).matrix
    return dict(residual=frobenius_residual(lhs, rhs), lhs_norm=float(np.linalg.norm(lhs) * grid.dx),
                M=grid.M, hbar=grid.hbar, convention=convention)


def normalization_factor(S, alpha: complex, z, hbar: float, convention: str = "reflected") -> complex:
    """D_alpha(z) = 1 / <psi^alpha_z | psi^b_{T_R z}>, R = S^-1 S^c and b = R.alpha."""
    from .flatstates import coherent_overlap

    R = mp.inv2(S) @ mp.conj_matrix(S)
    beta = mp.transported_width(R, alpha, convention)
    zR = mp.alpha_transport(R, alpha, z, convention)
    return 1 / coherent_overlap(z, alpha, zR, beta, hbar)


def projector_check(S, alpha: complex, z, grid: GridSpec, convention: str = "reflected") -> dict:
    """U^-1 |psi_z><psi_z| U is idempotent, and its scale matches 1/<bra|ket> of the transported states."""
    from .flatstates import coherent, coherent_overlap

    S = np.asarray(S, dtype=complex)
    psi = coherent(z, alpha, grid)
    P = mp.conjugate_operator(S, np.outer(psi, psi.conj()), grid)
    idem = np.linalg.norm(P @ P * grid.dx - P) / np.linalg.norm(P)
    k_w = mp.transported_width(mp.inv2(S), alpha, convention)
    k_z = mp.alpha_transport(mp.inv2(S), alpha, z, convention)
    b_w = mp.transported_width(mp.inv2(mp.conj_matrix(S)), alpha, convention)
    b_z = mp.alpha_transport(mp.inv2(mp.conj_matrix(S)), alpha, z, convention)
    ket = coherent(k_z, k_w, grid, check=False)
    bra = coherent(b_z, b_w, grid, check=False)
    L_formula = 1 / coherent_overlap(b_z, b_w, k_z, k_w, grid.hbar)
    dyad = np.outer(ket, bra.conj())
    # best scalar fit P = L dyad
    L_fit = np.vdot(dyad.ravel(), P.ravel()) / np.vdot(dyad.ravel(), dyad.ravel())
    shape = np.linalg.norm(P - L_fit * dyad) / np.linalg.norm(P)
    return dict(idempotency=float(idem), rank_one_residual=float(shape),
                L_fit=complex(L_fit), L_formula=complex(L_formula),
                L_relative_error=float(abs(L_fit - L_formula) / abs(L_formula)))


def theorem2_verify(h: GaussianSymbol, S, grid: GridSpec, points=None, box: float = 2.0,
                    n: int = 121, center=(0.0, 0.0)) -> dict:
    """Weyl symbol of U(S)^-1 H U(S) against (e^{hbar Delta/4} h) evaluated at S z."""
    S = np.asarray(S, dtype=complex)
    H = toeplitz(h, 1j, grid, box=box, n=n, center=center)
    op = DensityOp(grid, mp.conjugate_operator(S, H.matrix, grid))
    if points is None:
        x = grid.x
        js = np.searchsorted(x, np.linspace(-1.0, 1.0, 9) + center[0])
        xi = np.linspace(-1.0, 1.0, 9) + center[1]
        points = np.array([[x[j], s] for j in js for s in xi])
    lhs = weyl_symbol(op, points)
    sigma = h.heat(grid.hbar / 4)
    img = points @ S.T
    rhs = sigma(img[:, 0], img[:, 1])
    return dict(sup_error=float(np.max(np.abs(lhs - rhs))), scale=float(np.max(np.abs(rhs))))


def twisted_convolution_residual(W, points, weights, hbar: float, sign: int = +1, reflect: bool = False) -> float:
    """Residual of  int W(z - z') W(+-z') e^{i s z^z'/hbar} dz' / (2 pi hbar) = W(z)  (pure states).

    ``W`` is a callable Weyl symbol (normalized as in flatstates.wigner); ``reflect`` uses W(-z').
    Without ``reflect`` the exact integral is independent of the sign s.
    """
    errs = []
    for z in points:
        zp = points
        wedge = z[1] * zp[:, 0] - z[0] * zp[:, 1]
        second = W(-zp[:, 0], -zp[:, 1]) if reflect else W(zp[:, 0], zp[:, 1])
        val = np.sum(W(z[0] - zp[:, 0], z[1] - zp[:, 1]) * second * np.exp(1j * sign * wedge / hbar) * weights)
        errs.append(abs(val / (2 * math.pi * hbar) - W(z[0], z[1])))
    return float(max(errs))


def offdiag_roundtrip(h: GaussianSymbol, S, grid: GridSpec, alpha: complex = 1j, box: float = 2.0,
                    n: int = 121, center=(0.0, 0.0)) -> float:
    """|| T_off[sigma_off[U^-1 H U]] - U^-1 H U || / ||U^-1 H U||."""
    H = toeplitz(h, alpha, grid, box=box, n=n, center=center)
    lhs = mp.conjugate_operator(S, H.matrix, grid)
    _check_trace(H.matrix, lhs, grid)
    rhs = composition_operator(S, h, alpha, grid, box, n, center, symbol_width=alpha).matrix
    return frobenius_residual(lhs, rhs)


ANTICANONICAL_PAIR = {
    "opposite": np.array([[0, 1j], [-1j, 0]]),
    "anticanonical": np.array([[0, -1j], [1j, 0]]),
}


def anticanonical_composition_check(h: GaussianSymbol, grid: GridSpec, box: float = 2.0, n: int = 121,
                   center=(0.0, 0.0), family=None) -> dict:
    """C(S')C(S)H, composed dyad-wise, against C(S'S)H from the closed integral, for all ordered pairs."""
    family = ANTICANONICAL_PAIR if family is None else family
    H = toeplitz_dyads(h, 1j, grid.hbar, box, n, center)
    out = {}
    for n1, S1 in family.items():
        for n2, S2 in family.items():
            two_step = c_compose(S1, c_compose(S2, H)).matrix(grid).matrix
            direct = composition_operator(S1 @ S2, h, 1j, grid, box, n, center).matrix
            out[(n1, n2)] = frobenius_residual(direct, two_step)
    return out


def parity_matrix(grid: GridSpec) -> np.ndarray:
    """Kernel of (I psi)(x) = psi(-x) on the periodic grid."""
    idx = (grid.M - np.arange(grid.M)) % grid.M
    return np.eye(grid.M)[idx] / grid.dx


# --- pure-state twisted convolution -----------------------------------------

def gaussian_characteristic(G, c, hbar: float):
    """Symplectic Fourier transform chi(xi) = int W(z) e^{i xi^z / hbar} dz/(2 pi hbar) of the
    pure-state Wigner function W = 2 exp(-(z-c).G.(z-c)/hbar), det G = 1."""
    Ginv = np.linalg.inv(G)
    c = np.asarray(c, dtype=float)

    def chi(a, b):
        # J xi = (-xi_p, xi_q)
        u, v = -b, a
        quad = Ginv[0, 0] * u * u + 2 * Ginv[0, 1] * u * v + Ginv[1, 1] * v * v
        return np.exp(1j * (u * c[0] + v * c[1]) / hbar - quad / (4 * hbar))

    return chi


def pushforward_wigner(G, c, S):
    """Parameters of W o S^-1 for real invertible S."""
    Sinv = np.linalg.inv(S)
    return Sinv.T @ G @ Sinv, np.asarray(S, dtype=float) @ np.asarray(c, dtype=float)


def twisted_identity_residual(chi, hbar: float, sign: int, test_points, half_width: float = 5.0,
                              n: int = 401) -> float:
    """max |int chi(z - z') chi(z') e^{i s z^z'/(2 hbar)} dz'/(2 pi hbar) - chi(z)| over test points.

    Substituting z' -> z - z' swaps the two factors and flips the wedge, so the residual does not
    depend on s; pure states satisfy it for either sign, mixed states for neither.
    """
    s = np.linspace(-half_width, half_width, n)
    d = s[1] - s[0]
    Q, P = np.meshgrid(s, s, indexing="ij")
    q, p = Q.ravel(), P.ravel()
    second = chi(q, p)
    worst = 0.0
    for z in np.atleast_2d(test_points):
        wedge = z[0] * p - z[1] * q
        val = np.sum(chi(z[0] - q, z[1] - p) * second * np.exp(1j * sign * wedge / (2 * hbar))) * d * d
        worst = max(worst, abs(val / (2 * math.pi * hbar) - chi(z[0], z[1])))
    return float(worst)


# --- leading-order symbol composition -----------------------------------------

def groupoid_leading_order(h: GaussianSymbol, h2: GaussianSymbol, S, hbar_values, L: float = 7.0,
                           M: int = 256, box: float = 2.0, n: int = 121) -> dict:
    """Relative distance between U^-1 H H' U and the off-diagonal quantization of the composed
    symbol (the product h h' transported by the groupoid action of S), as hbar varies.

    Returns per-hbar errors and the fitted log-log slope.
    """
    errs = []
    prod = h * h2
    for hb in hbar_values:
        grid = GridSpec(L, M, hb)
        ctr = tuple(np.real(prod.center))
        H1 = toeplitz(h, 1j, grid, box=box, n=n, center=ctr).matrix
        H2 = toeplitz(h2, 1j, grid, box=box, n=n, center=ctr).matrix
        lhs = mp.conjugate_operator(S, H1 @ H2 * grid.dx, grid)
        rhs = composition_operator(S, prod, 1j, grid, box, n, ctr, symbol_width=1j).matrix
        errs.append(frobenius_residual(lhs, rhs))
    slope = np.polyfit(np.log(hbar_values), np.log(errs), 1)[0]
    return dict(hbar=list(hbar_values), errors=errs, slope=float(slope))
