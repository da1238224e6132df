"""Coherent states with complex width on a 1-D grid, phase-space transforms of density
operators, and the Toeplitz / Weyl / Kohn-Nirenberg quantizers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numcore import GeometryError, GridSpec, hermite_basis, hermite_functions


class CoverageError(GeometryError):
    pass


class QuadratureError(RuntimeError):
    pass


def coherent(z, alpha: complex, grid: GridSpec, check: bool = True) -> np.ndarray:
    """Sampled coherent state

        (Im a / (pi hbar |a|^2))^(1/4) exp(-i (x-q)^2 / (2 hbar a)) exp(i p x/hbar) exp(-i p q/(2 hbar)).

    Im a > 0 makes the Gaussian decay; a = i is the standard state.
    """
    alpha = complex(alpha)
    if alpha.imag <= 0:
        raise ValueError("width parameter needs Im alpha > 0")
    q, p = z
    h = grid.hbar
    x = grid.x
    norm = (alpha.imag / (math.pi * h * abs(alpha) ** 2)) ** 0.25
    psi = norm * np.exp(-1j * (x - q) ** 2 / (2 * h * alpha) + 1j * p * x / h - 1j * p * q / (2 * h))
    if check:
        edge = (abs(psi[0]) ** 2 + abs(psi[-1]) ** 2) * grid.dx
        if edge > 1e-12:
            raise CoverageError(f"coherent state at {tuple(z)} leaks past the grid edge ({edge:.1e})")
    return psi


def coherent_columns(Z: np.ndarray, alpha: complex, grid: GridSpec) -> np.ndarray:
    """Matrix whose columns are coherent states at the rows (q, p) of Z."""
    Z = np.atleast_2d(Z)
    alpha = complex(alpha)
    h = grid.hbar
    x = grid.x[:, None]
    q, p = Z[:, 0][None, :], Z[:, 1][None, :]
    norm = (alpha.imag / (math.pi * h * abs(alpha) ** 2)) ** 0.25
    return norm * np.exp(-1j * (x - q) ** 2 / (2 * h * alpha) + 1j * p * x / h - 1j * p * q / (2 * h))


def coherent_overlap(z1, a1: complex, z2, a2: complex, hbar: float) -> complex:
    """Closed-form <psi_{z1}^{a1} | psi_{z2}^{a2}> (complex Gaussian integral)."""
    (q1, p1), (q2, p2) = z1, z2
    a1c = np.conj(a1)
    # exponent of conj(psi1) psi2:  -A x^2 + B x + C
    A = (1j / (2 * hbar)) * (1 / a2 - 1 / a1c)
    B = (1j / hbar) * (q2 / a2 - q1 / a1c) + (1j / hbar) * (p2 - p1)
    C = (-1j / (2 * hbar)) * (q2**2 / a2 - q1**2 / a1c) + (1j / (2 * hbar)) * (p1 * q1 - p2 * q2)
    n1 = (a1.imag / (math.pi * hbar * abs(a1) ** 2)) ** 0.25
    n2 = (a2.imag / (math.pi * hbar * abs(a2) ** 2)) ** 0.25
    return n1 * n2 * np.sqrt(np.pi / A) * np.exp(B * B / (4 * A) + C)


# --- symbols ------------------------------------------------------------------

def width_metric(alpha: complex) -> np.ndarray:
    """Covariance form K with Weyl symbol of the alpha-Toeplitz operator = exp(hbar/4 grad.K.grad) h."""
    a = complex(alpha)
    return np.array([[abs(a) ** 2, -a.real], [-a.real, 1.0]]) / a.imag


@dataclass(frozen=True)
class GaussianSymbol:
    """amp * exp(-(z-c).A.(z-c)/2) with complex symmetric A and complex centre c.

    Supports exact heat flows, linear pullbacks and evaluation at complex points, which is
    what the analytic-continuation statements need.
    """

    A: np.ndarray
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))
    amp: complex = 1.0

    def __call__(self, q, p):
        q = np.asarray(q)
        p = np.asarray(p)
        u = q - self.center[0]
        v = p - self.center[1]
        quad = self.A[0, 0] * u * u + 2 * self.A[0, 1] * u * v + self.A[1, 1] * v * v
        return self.amp * np.exp(-quad / 2)

    def heat(self, tau: float, K=None) -> "GaussianSymbol":
        """exp(tau grad.K.grad) applied to the symbol (K defaults to the identity)."""
        K = np.eye(2) if K is None else np.asarray(K)
        A = np.asarray(self.A, dtype=complex)
        Minv = np.eye(2) + 2 * tau * A @ K
        newA = A @ np.linalg.inv(np.eye(2) + 2 * tau * K @ A)
        det = np.linalg.det(Minv)
        # continuous square root along tau -> 0 (eigenvalues of I + 2 tau A K stay off the cut)
        ev = np.linalg.eigvals(Minv)
        root = np.prod(np.sqrt(ev))
        if abs(root**2 - det) > 1e-8 * abs(det):
            root = np.sqrt(det)
        return GaussianSymbol((newA + newA.T) / 2, self.center, self.amp / root)

    def pullback(self, T) -> "GaussianSymbol":
        """z -> h(T z) for an invertible (possibly complex) 2x2 matrix T."""
        T = np.asarray(T)
        return GaussianSymbol(T.T @ self.A @ T, np.linalg.solve(T, self.center), self.amp)

    def scaled(self, factor: complex) -> "GaussianSymbol":
        return GaussianSymbol(self.A, self.center, self.amp * factor)

    def __mul__(self, other: "GaussianSymbol") -> "GaussianSymbol":
        A = np.asarray(self.A, dtype=complex) + np.asarray(other.A, dtype=complex)
        c = np.linalg.solve(A, self.A @ self.center + other.A @ other.center)
        e1 = (self.center - c) @ self.A @ (self.center - c)
        e2 = (other.center - c) @ other.A @ (other.center - c)
        return GaussianSymbol(A, c, self.amp * other.amp * np.exp(-(e1 + e2) / 2))


def gaussian_symbol(width: float = 0.5, center=(0.0, 0.0), amp: complex = 1.0) -> GaussianSymbol:
    return GaussianSymbol(np.eye(2) / width**2, np.asarray(center, dtype=float), amp)


def reweight_gaussian(h: GaussianSymbol, alpha: complex, alpha_new: complex, hbar: float) -> GaussianSymbol:
    """Symbol g with Toeplitz_{alpha_new}[g] = Toeplitz_alpha[h] (exact for Gaussians)."""
    K = width_metric(alpha) - width_metric(alpha_new)
    return h.heat(hbar / 4, K)


# --- density operators ---------------------------------------------------------

@dataclass
class DensityOp:
    """Operator on the grid stored by kernel values K(x_i, x_j); acts as K @ f * dx."""

    grid: GridSpec
    matrix: np.ndarray

    def trace(self) -> complex:
        return complex(np.trace(self.matrix) * self.grid.dx)

    def apply(self, f):
        return self.matrix @ f * self.grid.dx

    def compose(self, other: "DensityOp") -> "DensityOp":
        return DensityOp(self.grid, self.matrix @ other.matrix * self.grid.dx)

    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2 * self.grid.dx)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        scale = max(np.max(np.abs(self.matrix)), 1e-300)
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol * scale)

    def save(self, path) -> None:
        """Flat little-endian complex128 body plus a JSON header with M, L, hbar."""
        path = Path(path)
        header = dict(M=self.grid.M, L=self.grid.L, hbar=self.grid.hbar)
        path.with_suffix(".json").write_text(json.dumps(header, sort_keys=True))
        np.ascontiguousarray(self.matrix, dtype="<c16").tofile(path.with_suffix(".bin"))

    @classmethod
    def load(cls, path) -> "DensityOp":
        path = Path(path)
        header = json.loads(path.with_suffix(".json").read_text())
        grid = GridSpec(header["L"], header["M"], header["hbar"])
        mat = np.fromfile(path.with_suffix(".bin"), dtype="<c16").reshape(grid.M, grid.M)
        return cls(grid, mat)


def pure_state(psi: np.ndarray, grid: GridSpec) -> DensityOp:
    return DensityOp(grid, np.outer(psi, psi.conj()))


def mixed_state(states, weights, grid: GridSpec) -> DensityOp:
    S = np.asarray(states).T
    return DensityOp(grid, (S * np.asarray(weights)) @ S.conj().T)


def random_state(grid: GridSpec, rank: int, rng, D: int = 8) -> DensityOp:
    """Random density operator of the given rank supported on the first D Hermite functions."""
    H = hermite_functions(grid.x, grid.hbar, D)
    C = rng.normal(size=(rank, D)) + 1j * rng.normal(size=(rank, D))
    C /= np.linalg.norm(C, axis=1, keepdims=True)
    w = rng.random(rank) + 0.1
    w /= w.sum()
    return mixed_state(C @ H, w, grid)


# --- phase-space transforms -----------------------------------------------------

def phase_box(half_width: float, n: int, center=(0.0, 0.0)):
    """Trapezoid nodes and weights (dq dp) on a square box."""
    c = np.asarray(center, dtype=float)
    s = np.linspace(-half_width, half_width, n)
    d = s[1] - s[0]
    Q, P = np.meshgrid(s + c[0], s + c[1], indexing="ij")
    return np.column_stack([Q.ravel(), P.ravel()]), np.full(n * n, d * d)


def husimi(rho: DensityOp, Z: np.ndarray) -> np.ndarray:
    """(2 pi hbar)^-1 <phi_z|rho|phi_z> at the rows of Z, standard states without the pq phase."""
    g = rho.grid
    Phi = coherent_columns(Z, 1j, g) * np.exp(1j * Z[:, 1] * Z[:, 0] / (2 * g.hbar))[None, :]
    vals = np.sum(Phi.conj() * (rho.matrix @ Phi), axis=0) * g.dx**2
    return np.real_if_close(vals / (2 * math.pi * g.hbar))


def wigner(rho: DensityOp, Z: np.ndarray) -> np.ndarray:
    """Weyl symbol  int rho(x + s/2, x - s/2) exp(-i xi s / hbar) ds  at the rows of Z.

    Normalized so that  int W dq dp / (2 pi hbar) = trace rho.  Positions must be grid
    points; offsets s run over even multiples of dx so both arguments stay on the grid.
    """
    g = rho.grid
    x = g.x
    out = np.empty(len(Z), dtype=complex)
    M = g.M
    for k, (q, xi) in enumerate(Z):
        j = int(round((q - x[0]) / g.dx))
        if abs(x[j] - q) > 1e-9 * g.dx:
            raise ValueError("Wigner evaluation positions must lie on the grid")
        n = np.arange(-min(j, M - 1 - j), min(j, M - 1 - j) + 1)
        vals = rho.matrix[j + n, j - n]
        out[k] = np.sum(vals * np.exp(-1j * xi * 2 * n * g.dx / g.hbar)) * 2 * g.dx
    return np.real_if_close(out)


def weyl_symbol(op: DensityOp, Z: np.ndarray) -> np.ndarray:
    return wigner(op, Z)


# --- quantizers ---------------------------------------------------------------

def toeplitz(h, alpha: complex, grid: GridSpec, box: float = None, n: int = 81,
             center=(0.0, 0.0)) -> DensityOp:
    """int h(z) |psi_z^alpha><psi_z^alpha| dq dp / (2 pi hbar) on a trapezoid box."""
    box = box if box is not None else grid.L / 2
    Z, w = phase_box(box, n, center)
    vals = h(Z[:, 0], Z[:, 1]) * w / (2 * math.pi * grid.hbar)
    keep = np.abs(vals) > 0
    Psi = coherent_columns(Z[keep], alpha, grid)
    return DensityOp(grid, (Psi * vals[keep]) @ Psi.conj().T)


def gaussian_toeplitz_kernel(g: GaussianSymbol, grid: GridSpec) -> DensityOp:
    """Standard (alpha = i) Toeplitz operator of a Gaussian symbol from the closed-form (q, p) integral.

    The formula is analytic in the symbol parameters, so it also defines the quantization of
    growing (entire) Gaussian symbols by continuation; the square root of det is taken
    eigenvalue-wise on the principal branch.
    """
    hb = grid.hbar
    x = grid.x
    X, Y = np.meshgrid(x, x, indexing="ij")
    A = np.asarray(g.A, dtype=complex)
    c = np.asarray(g.center, dtype=complex)
    M = A + np.diag([2 / hb, 0])
    Minv = np.linalg.inv(M)
    root = np.prod(np.sqrt(np.linalg.eigvals(M)))
    b0 = A @ c
    b1 = b0[0] + (X + Y) / hb
    b2 = b0[1] + 1j * (X - Y) / hb
    quad = Minv[0, 0] * b1 * b1 + 2 * Minv[0, 1] * b1 * b2 + Minv[1, 1] * b2 * b2
    c0 = -0.5 * c @ A @ c - (X**2 + Y**2) / (2 * hb)
    K = g.amp * 2 * math.pi / root * np.exp(0.5 * quad + c0) / math.sqrt(math.pi * hb) / (2 * math.pi * hb)
    return DensityOp(grid, K)


def weyl(h, grid: GridSpec, n_xi: int | None = None, xi_max: float = None) -> DensityOp:
    """Kernel (2 pi hbar)^-1 int h((x+y)/2, xi) exp(i xi (x-y)/hbar) d xi by trapezoid in xi."""
    xi_max = xi_max if xi_max is not None else grid.hbar * math.pi / grid.dx
    # 2M nodes keep the phase step below pi/2 for every |x - y| <= 2L (no aliasing)
    xi = np.linspace(-xi_max, xi_max, n_xi or 2 * grid.M)
    dxi = xi[1] - xi[0]
    x = grid.x
    X, Y = np.meshgrid(x, x, indexing="ij")
    mid = (X + Y) / 2
    diff = X - Y
    K = np.zeros((grid.M, grid.M), dtype=complex)
    for s in xi:
        K += h(mid, s) * np.exp(1j * s * diff / grid.hbar)
    return DensityOp(grid, K * dxi / (2 * math.pi * grid.hbar))


def kohn_nirenberg(h, grid: GridSpec, n_xi: int | None = None, xi_max: float = None) -> DensityOp:
    """Kernel (2 pi hbar)^-1 int h(x, xi) exp(i xi (x-y)/hbar) d xi."""
    xi_max = xi_max if xi_max is not None else grid.hbar * math.pi / grid.dx
    # 2M nodes keep the phase step below pi/2 for every |x - y| <= 2L (no aliasing)
    xi = np.linspace(-xi_max, xi_max, n_xi or 2 * grid.M)
    dxi = xi[1] - xi[0]
    x = grid.x
    X, Y = np.meshgrid(x, x, indexing="ij")
    K = np.zeros((grid.M, grid.M), dtype=complex)
    for s in xi:
        K += h(X, s) * np.exp(1j * s * (X - Y) / grid.hbar)
    return DensityOp(grid, K * dxi / (2 * math.pi * grid.hbar))


def position_matrix(grid: GridSpec) -> np.ndarray:
    return np.diag(grid.x).astype(complex) / grid.dx


def momentum_matrix(grid: GridSpec) -> np.ndarray:
    """Spectral -i hbar d/dx as a kernel matrix."""
    F = np.fft.fft(np.eye(grid.M), axis=0)
    return np.fft.ifft((grid.hbar * grid.k)[:, None] * F, axis=0) / grid.dx


def weyl_polynomial(coeffs: dict, grid: GridSpec) -> DensityOp:
    """Weyl quantization of sum c[(m, n)] q^m p^n via symmetric ordering.

    Uses Op(q^m p^n) = 2^-m sum_k C(m, k) X^k P^n X^(m-k).
    """
    dx = grid.dx
    X = np.diag(grid.x).astype(complex)
    P = momentum_matrix(grid) * dx
    out = np.zeros((grid.M, grid.M), dtype=complex)
    for (m, n), c in coeffs.items():
        Pn = np.linalg.matrix_power(P, n)
        term = np.zeros_like(out)
        for k in range(m + 1):
            term += math.comb(m, k) * np.linalg.matrix_power(X, k) @ Pn @ np.linalg.matrix_power(X, m - k)
        out += c * term / 2**m
    return DensityOp(grid, out / dx)


def quantize(h, scheme: str, grid: GridSpec, alpha: complex = 1j, check: bool = False, **kw) -> DensityOp:
    """Quantize a symbol: scheme is 'toeplitz', 'weyl' or 'kn'.

    With check=True the node count is doubled and a change above 1e-8 (relative, Frobenius)
    raises QuadratureError.
    """
    if scheme == "toeplitz":
        op = toeplitz(h, alpha, grid, **kw)
        if check:
            kw2 = dict(kw)
            kw2["n"] = 2 * kw.get("n", 81) - 1
            op2 = toeplitz(h, alpha, grid, **kw2)
            err = np.linalg.norm(op.matrix - op2.matrix) / max(np.linalg.norm(op2.matrix), 1e-300)
            if err > 1e-8:
                raise QuadratureError(f"toeplitz quadrature changed by {err:.1e} on refinement")
        return op
    if scheme == "weyl":
        return weyl(h, grid, **kw)
    if scheme == "kn":
        return kohn_nirenberg(h, grid, **kw)
    raise ValueError(f"unknown scheme {scheme!r}")


# --- shift operators on the Hermite basis ----------------------------------------

def m1_operators(D: int):
    """M1+ = a+ (P^2+Q^2)^-1/2 and M1- = its adjoint, truncated to D Hermite functions.

    Scaled so that M1+ h_j = h_{j+1}; the inverse square root is taken spectrally.
    """
    Mp = np.zeros((D, D))
    for j in range(D - 1):
        Mp[j + 1, j] = 1.0
    return Mp, Mp.T.copy()


def ladder_matrices(D: int, hbar: float):
    """Raising operator with a+ h_j = sqrt((j + 1/2) hbar) h_{j+1}, and the oscillator
    (P^2 + Q^2)/2 with eigenvalues (j + 1/2) hbar, both on D Hermite functions."""
    ap = np.zeros((D, D))
    for j in range(D - 1):
        ap[j + 1, j] = math.sqrt((j + 0.5) * hbar)
    osc = np.diag([(j + 0.5) * hbar for j in range(D)])
    return ap, osc


def m1_commutator_demo(D: int = 16, hbar: float = 1.0) -> dict:
    if D < 4:
        raise ValueError("D must be at least 4")
    Mp, Mm = m1_operators(D)
    P0 = np.zeros((D, D))
    P0[0, 0] = 1.0
    n = D - 1  # drop the truncation edge
    prod = (Mp @ Mm - (np.eye(D) - P0))[:n, :n]
    comm = (Mp @ Mm - Mm @ Mp + P0)[:n, :n]
    ap, osc = ladder_matrices(D, hbar)
    evals, evecs = np.linalg.eigh(osc)
    inv_root = evecs @ np.diag(evals**-0.5) @ evecs.T
    left = ap @ inv_root
    right = inv_root @ ap.T
    return dict(
        product_residual=float(np.max(np.abs(prod))),
        commutator_residual=float(np.max(np.abs(comm))),
        raising_identity_residual=float(np.max(np.abs(left - Mp))),
        lowering_identity_residual=float(np.max(np.abs(right - Mm))),
    )
