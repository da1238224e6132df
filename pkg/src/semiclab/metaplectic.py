"""2x2 complex symplectic algebra, width transport and the metaplectic operator on a grid.

Conventions: matrices are numpy 2x2 complex arrays [[a, b], [c, d]].
The operator U(S) satisfies  U(S)^-1 (X, P) U(S) = S (X, P)  with P = -i hbar d/dx,
so U(S S') = U(S) U(S') up to a sign.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .numcore import GridSpec


class InfinityError(ZeroDivisionError):
    """Moebius image at infinity."""


class DegenerateError(ValueError):
    """Transported width left the upper half plane."""


class DomainError(ValueError):
    """Operator kernel would grow off the grid (inadmissible complex matrix)."""


IDENTITY = np.eye(2, dtype=complex)
ROT90 = np.array([[0, -1], [1, 0]], dtype=complex)


def mat2(a, b, c, d, check: bool = True) -> np.ndarray:
    S = np.array([[a, b], [c, d]], dtype=complex)
    if check:
        det = np.linalg.det(S)
        if min(abs(det - 1), abs(det + 1)) > 1e-12:
            raise ValueError(f"det S = {det} is not +-1")
    return S


def det2(S) -> complex:
    return S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]


def inv2(S) -> np.ndarray:
    a, b, c, d = S[0, 0], S[0, 1], S[1, 0], S[1, 1]
    return np.array([[d, -b], [-c, a]], dtype=complex) / (a * d - b * c)


def conj_matrix(S) -> np.ndarray:
    return np.conj(np.asarray(S, dtype=complex))


def moebius(S, alpha: complex) -> complex:
    a, b, c, d = S[0, 0], S[0, 1], S[1, 0], S[1, 1]
    den = c * alpha + d
    if abs(den) < 1e-300:
        raise InfinityError("c*alpha + d = 0")
    return complex((a * alpha + b) / den)


REFLECT = np.diag([1.0, -1.0]).astype(complex)
CONVENTIONS = ("moebius", "i_moebius", "reflected")


def transported_width(S, alpha: complex, convention: str = "moebius") -> complex:
    """Width attached to the image point.

    moebius    S.alpha (matches the closed-form example table)
    i_moebius  i (S.alpha)
    reflected  (R S R).alpha = -S.(-alpha), R = diag(1, -1): the law obeyed by U(S) on
               coherent states, and the only one of the three under which the extended
               flow composes as a group action.
    """
    if convention == "moebius":
        return moebius(S, alpha)
    if convention == "i_moebius":
        return 1j * moebius(S, alpha)
    if convention == "reflected":
        return moebius(REFLECT @ S @ REFLECT, alpha)
    raise ValueError(f"unknown convention {convention!r}")


def alpha_transport(S, alpha: complex, z, convention: str = "moebius") -> np.ndarray:
    """Real point (q', p') with q' + a' p' = Q + a' P, where (Q, P) = S z and a' the new width."""
    ap = transported_width(S, alpha, convention)
    if ap.imag <= 0:
        raise DegenerateError(f"transported width {ap} has Im <= 0")
    z = np.asarray(z)
    Q = S[0, 0] * z[0] + S[0, 1] * z[1]
    P = S[1, 0] * z[0] + S[1, 1] * z[1]
    w = Q + ap * P
    p_new = np.imag(w) / ap.imag
    q_new = np.real(w) - ap.real * p_new
    return np.array([q_new, p_new])


def transport_matrix(S, alpha: complex, convention: str = "moebius") -> np.ndarray:
    """The real 2x2 matrix of z -> alpha_transport(S, alpha, z)."""
    cols = [alpha_transport(S, alpha, e, convention) for e in np.eye(2)]
    return np.array(cols).T


def extended_flow(S, alpha: complex, z, convention: str = "moebius"):
    """(alpha, z) -> (S.alpha, alpha-transport of z)."""
    return transported_width(S, alpha, convention), alpha_transport(S, alpha, z, convention)


# --- operators on the grid --------------------------------------------------

def chirp_factor(gamma: complex, grid: GridSpec) -> np.ndarray:
    """Multiplier realizing [[1, 0], [gamma, 1]]."""
    return np.exp(1j * gamma * grid.x**2 / (2 * grid.hbar))


def free_factor(b: complex, grid: GridSpec) -> np.ndarray:
    """Fourier multiplier realizing [[1, b], [0, 1]]."""
    return np.exp(-1j * b * grid.hbar * grid.k**2 / 2)


def _filtered(values: np.ndarray, factor: np.ndarray, floor: float) -> np.ndarray:
    # growing factors amplify rounding noise: drop components already below the noise floor
    if np.max(np.abs(factor)) > 1.0:
        scale = np.max(np.abs(values))
        values = np.where(np.abs(values) < floor * scale, 0.0, values)
    return values


def _factor(S):
    """S = C(delta) F(b) C(gamma), or None when b vanishes."""
    a, b, c, d = S[0, 0], S[0, 1], S[1, 0], S[1, 1]
    if abs(b) < 1e-10:
        return None
    return (d - 1) / b, b, (a - 1) / b


def metaplectic_apply(S, psi: np.ndarray, grid: GridSpec, floor: float = 1e-12) -> np.ndarray:
    """Apply U(S) to grid states (columns if 2-D) via chirp / Fourier-multiplier factors."""
    S = np.asarray(S, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    # U(S) = U(S R^-k) U(R)^k with R a quarter turn; pick the k with the mildest chirps,
    # since a steep chirp aliases on the grid
    best = None
    Sk = S
    for k in range(4):
        parts = _factor(Sk)
        if parts is not None:
            cost = max(abs(parts[0]), abs(parts[2]))
            if best is None or cost < best[0] - 1e-12:
                best = (cost, k, parts)
        Sk = Sk @ inv2(ROT90)
    _, turns, (delta, b, gamma) = best
    for _ in range(turns):
        psi = _apply_factored(_factor(ROT90), psi, grid, floor)
    return _apply_factored((delta, b, gamma), psi, grid, floor)


def _apply_factored(parts, psi: np.ndarray, grid: GridSpec, floor: float) -> np.ndarray:
    delta, b, gamma = parts
    col = psi if psi.ndim == 2 else psi[:, None]
    ch1 = chirp_factor(gamma, grid)[:, None]
    out = _filtered(col, ch1, floor) * ch1
    fr = free_factor(b, grid)[:, None]
    spec = np.fft.fft(out, axis=0)
    out = np.fft.ifft(_filtered(spec, fr, floor) * fr, axis=0)
    ch2 = chirp_factor(delta, grid)[:, None]
    out = _filtered(out, ch2, floor) * ch2
    return out if psi.ndim == 2 else out[:, 0]


def conjugate_operator(S, A: np.ndarray, grid: GridSpec) -> np.ndarray:
    """U(S)^-1 A U(S) for a grid kernel matrix A (operator acts as A @ f * dx)."""
    S = np.asarray(S, dtype=complex)
    # the transpose of U(S) is U of S with a and d exchanged
    St = np.array([[S[1, 1], S[0, 1]], [S[1, 0], S[0, 0]]])
    AU = metaplectic_apply(St, A.T, grid).T
    return metaplectic_apply(inv2(S), AU, grid)


def _sqrt_branch(w: complex, ref: complex | None) -> complex:
    r = cmath.sqrt(w)
    if ref is not None and abs(r - ref) > abs(r + ref):
        r = -r
    return r


def metaplectic_kernel(S, grid: GridSpec, branch_ref: complex | None = None) -> np.ndarray:
    """Dense matrix of U(S) including the dx quadrature weight.

    b != 0: K(x,y) = (2 pi i hbar b)^(-1/2) exp(i (d x^2 - 2 x y + a y^2) / (2 b hbar)).
    b == 0: dilation by d (band-limited resampling, real d only) followed by a chirp.
    ``branch_ref`` selects the square-root sign closest to a previously used value.
    """
    S = np.asarray(S, dtype=complex)
    a, b, c, d = S[0, 0], S[0, 1], S[1, 0], S[1, 1]
    x = grid.x
    h = grid.hbar
    if abs(b) < 1e-12:
        if abs(d.imag) > 1e-14:
            raise DomainError("complex dilation has no grid kernel; use metaplectic_apply")
        dr = d.real
        X, Y = np.meshgrid(x, x, indexing="ij")
        # periodic band-limited interpolation of f at d*x
        u = (dr * X - Y) / grid.dx
        M = grid.M
        with np.errstate(invalid="ignore", divide="ignore"):
            dk = np.sin(np.pi * u) / (M * np.tan(np.pi * u / M))
        dk = np.where(np.abs(u) < 1e-12, 1.0, dk)
        chirp = np.exp(1j * (c * d) * x**2 / (2 * h))
        return cmath.sqrt(dr) * chirp[:, None] * dk
    form = np.array([[(d / b).imag, -(1 / b).imag], [-(1 / b).imag, (a / b).imag]])
    if np.linalg.eigvalsh(form).min() < -1e-12:
        raise DomainError("kernel grows: Im of the quadratic form is indefinite")
    pref = 1 / _sqrt_branch(2j * math.pi * h * b, None if branch_ref is None else 1 / branch_ref)
    X, Y = np.meshgrid(x, x, indexing="ij")
    K = pref * np.exp(1j * (d * X**2 - 2 * X * Y + a * Y**2) / (2 * b * h))
    return K * grid.dx


# --- example table ------------------------------------------------------------

def table_matrix(row: str, t: float = 0.0) -> np.ndarray:
    ch, sh = math.cosh(t), math.sinh(t)
    rows = {
        "free": [[1, -1j * t], [0, 1]],
        "multiplication": [[1, 0], [-1j * t, 1]],
        "dilation": [[cmath.exp(1j * t), 0], [0, cmath.exp(-1j * t)]],
        "harmonic": [[ch, 1j * sh], [-1j * sh, ch]],
        "antidiagonal": [[0, 1j], [1j, 0]],
        "opposite": [[0, 1j], [-1j, 0]],
        "anticanonical": [[0, -1j], [1j, 0]],
    }
    if row not in rows:
        raise KeyError(f"unknown table row {row!r}; choose from {sorted(rows)}")
    return np.array(rows[row], dtype=complex)


TABLE_ROWS = ("free", "multiplication", "dilation", "harmonic", "antidiagonal", "opposite", "anticanonical")
CONSISTENT_ROWS = ("free", "multiplication", "harmonic", "antidiagonal", "opposite", "anticanonical")


def listed_table_row(row: str, t: float) -> dict:
    """Closed forms as listed; entries absent for a row are omitted."""
    if row == "free":
        return dict(SinvSc=[[1, 2j * t], [0, 1]], width=1j * (1 + 2 * t),
                    T_SinvSc=[[1, 0], [0, (1 + 4 * t) / (1 + 2 * t)]],
                    T_Sc=[[1, 0], [0, (1 + 2 * t) / (1 + t)]])
    if row == "multiplication":
        return dict(SinvSc=[[1, 0], [2j * t, 1]], width=1j / (1 - 2 * t),
                    T_SinvSc=[[(1 - 4 * t) / (1 - 2 * t), 0], [0, 1]],
                    T_Sc=[[(1 - 2 * t) / (1 - t), 0], [0, 1]])
    if row == "dilation":
        return dict(SinvSc=[[cmath.exp(-2j * t), 0], [0, cmath.exp(2j * t)]],
                    width=cmath.exp(-4j * t) * 1j,
                    T_SinvSc=[[(1 - 4 * t) / (1 - 2 * t), 0], [0, 1]],
                    T_Sc=[[(1 - 2 * t) / (1 - t), 0], [0, 1]])
    if row == "harmonic":
        c2, s2 = math.cosh(2 * t), math.sinh(2 * t)
        return dict(SinvSc=[[c2, 1j * s2], [-1j * s2, c2]], width=1j,
                    T_SinvSc=[[math.exp(-2 * t), 0], [0, math.exp(2 * t)]],
                    T_Sc=[[math.exp(-t), 0], [0, math.exp(t)]])
    if row == "antidiagonal":
        return dict(SinvSc=[[-1, 0], [0, -1]], width=1j, T_SinvSc=[[-1, 0], [0, -1]],
                    T_Sc=[[-1, 0], [0, 1]])
    if row == "opposite":
        return dict(SinvSc=[[1, 0], [0, 1]], width=1j, T_SinvSc=[[1, 0], [0, 1]],
                    T_Sc=[[-1, 0], [0, -1]])
    if row == "anticanonical":
        return dict(SinvSc=[[-1, 0], [0, -1]], width=1j, T_SinvSc=[[-1, 0], [0, -1]],
                    T_Sc=[[1, 0], [0, 1]])
    raise KeyError(row)


def computed_table_row(row: str, t: float, alpha: complex = 1j, convention: str = "moebius") -> dict:
    S = table_matrix(row, t)
    Sc = conj_matrix(S)
    R = inv2(S) @ Sc
    out = dict(SinvSc=R)
    try:
        out["width"] = transported_width(R, alpha, convention)
        out["T_SinvSc"] = transport_matrix(R, alpha, convention)
        out["T_Sc"] = transport_matrix(Sc, alpha, convention)
    except (DegenerateError, InfinityError) as exc:
        out["error"] = str(exc)
    return out


def compare_table_row(row: str, t: float, convention: str = "moebius") -> dict:
    """Entrywise max deviation per column between definitional values and listed closed forms."""
    listed = listed_table_row(row, t)
    computed = computed_table_row(row, t, convention=convention)
    dev = {}
    for key, ref in listed.items():
        if key not in computed:
            dev[key] = math.inf
            continue
        dev[key] = float(np.max(np.abs(np.asarray(computed[key]) - np.asarray(ref, dtype=complex))))
    return dict(row=row, t=t, deviation=dev, computed=computed, listed=listed,
                max_deviation=max(dev.values()))


# --- group law of the extended flow --------------------------------------------

def random_admissible(rng, scale: float = 0.4) -> np.ndarray:
    """exp of a random traceless complex matrix; det is 1 by construction."""
    from scipy.linalg import expm

    X = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) * scale
    X -= np.trace(X) / 2 * np.eye(2)
    return expm(X)


def group_law_check(samples: int = 200, seed: int = 0, convention: str = "reflected") -> dict:
    """Max componentwise gap between the flow of S S' and the flow of S after S'.

    Triples whose intermediate widths leave the upper half plane are redrawn.
    """
    rng = np.random.default_rng(seed)
    worst, used, drawn = 0.0, 0, 0
    while used < samples:
        drawn += 1
        if drawn > 50 * samples:
            raise RuntimeError("too few admissible draws")
        S, Sp = random_admissible(rng), random_admissible(rng)
        alpha = complex(rng.uniform(-1, 1), rng.uniform(0.3, 2))
        z = rng.normal(size=2)
        try:
            a1, z1 = extended_flow(Sp, alpha, z, convention)
            a2, z2 = extended_flow(S, a1, z1, convention)
            a3, z3 = extended_flow(S @ Sp, alpha, z, convention)
        except (DegenerateError, InfinityError):
            continue
        if min(a1.imag, a2.imag, a3.imag) <= 0:
            continue
        used += 1
        worst = max(worst, abs(a2 - a3), float(np.max(np.abs(z2 - z3))))
    return {"samples": used, "drawn": drawn, "max_gap": worst, "convention": convention}
