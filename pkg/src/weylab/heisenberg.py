"""Weyl analysis on C^n: displacement matrices, Fourier-Wigner transforms,
Weyl transforms of grid functions and twisted convolutions.

The displacement (Schrodinger) action at central time zero is

    (pi_lam(z) phi)(xi) = exp(i lam (x.xi + x.y/2)) phi(xi + y),   z = x + iy,

and composes as pi(z) pi(w) = exp(i lam Im(z.conj(w)) / 2) pi(z + w) with
Im(z.conj(w)) = y.x' - x.y'.  The matching twisted convolution

    (F x_lam H)(z) = int F(z - w) H(w) exp(i lam Im(z.conj(w)) / 2) dw

then satisfies W(F x_lam H) = W(F) W(H) for the Weyl transform
W(F) = int F(z) pi_lam(z) dz.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from . import _kernels as kern
from .hermite import CoeffVector, HermiteBasis

_TAIL_TOL = 1e-8


@dataclass(frozen=True)
class GridCn:
    """Uniform box grid on C^n = R^(2n), axes ordered (x1, y1[, x2, y2]).

    Axis coordinates are -L + i * (2L / M) for i < M, the usual
    endpoint-free lattice; negation acts by index i -> (M - i) mod M.
    """

    n: int
    half_width: float
    points_per_axis: int

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"grid dimension n must be 1 or 2, got {self.n}")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.points_per_axis < 8 or self.points_per_axis % 2:
            raise ValueError("points_per_axis must be even and >= 8")

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def cell_weight(self) -> float:
        return self.step ** (2 * self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * (2 * self.n)

    def axis(self) -> NDArray[np.float64]:
        m = self.points_per_axis
        return -self.half_width + self.step * np.arange(m)

    def radius_grid(self) -> NDArray[np.float64]:
        """|z| at every grid point."""
        ax = self.axis()
        if self.n == 1:
            return np.sqrt(ax[:, None] ** 2 + ax[None, :] ** 2)
        r2 = (
            ax[:, None, None, None] ** 2
            + ax[None, :, None, None] ** 2
            + ax[None, None, :, None] ** 2
            + ax[None, None, None, :] ** 2
        )
        return np.sqrt(r2)


@dataclass(frozen=True)
class GridFunction:
    """Complex samples on a :class:`GridCn` (or a compatible product grid)."""

    grid: GridCn
    values: NDArray[np.complex128]

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"value shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )

    def norm_sq(self) -> float:
        return float(self.grid.cell_weight * np.sum(np.abs(self.values) ** 2))

    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq()))

    def inner(self, other: "GridFunction") -> complex:
        if other.grid != self.grid:
            raise ValueError("grid functions live on different grids")
        return complex(self.grid.cell_weight * np.vdot(other.values, self.values))

    def conj_reflect(self) -> "GridFunction":
        """F*(z) = conj(F(-z)), the involution matching the group inverse."""
        m = self.grid.points_per_axis
        idx = (m - np.arange(m)) % m
        vals = self.values
        for ax in range(vals.ndim):
            vals = np.take(vals, idx, axis=ax)
        return GridFunction(self.grid, np.conj(vals))

    def scaled(self, c: complex) -> "GridFunction":
        return GridFunction(self.grid, c * self.values)

    def tail_fraction(self, radius_factor: float = 0.9) -> float:
        """Relative L^2 mass outside the centered ball of radius factor * L."""
        total = np.sum(np.abs(self.values) ** 2)
        if total == 0.0:
            return 0.0
        r = self.grid.radius_grid()
        outside = r > radius_factor * self.grid.half_width
        return float(np.sum(np.abs(self.values[outside]) ** 2) / total)


@dataclass(frozen=True)
class WeylMatrix:
    """Dense operator matrix in the truncated Hermite basis.

    ``matrix[i, j] = <T phi_j, phi_i>`` so composition is plain ``@``.
    ``truncation_residual`` is a constructor-specific diagnostic: the
    unitarity defect for displacement matrices, the relative boundary
    mass of the integrated grid function for Weyl transforms.
    """

    matrix: NDArray[np.complex128]
    lam: float
    basis: HermiteBasis
    truncation_residual: float = 0.0
    sigma_index: int | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.matrix.view(np.float64))):
            raise ValueError("Weyl matrix has non-finite entries")

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def adjoint(self) -> "WeylMatrix":
        return replace(self, matrix=self.matrix.conj().T)

    def compose(self, other: "WeylMatrix") -> "WeylMatrix":
        return replace(self, matrix=self.matrix @ other.matrix,
                       truncation_residual=max(self.truncation_residual, other.truncation_residual))


def _axis_basis(basis: HermiteBasis) -> HermiteBasis:
    if basis.n == 1:
        return basis
    return HermiteBasis(n=1, lam=basis.lam, degree_cap=basis.degree_cap,
                        quad_nodes=basis.quad_nodes, quad_weights=basis.quad_weights)


_TABLE_CACHE: dict[tuple, kern.PairTables] = {}


def _tables_for(basis: HermiteBasis, grid: GridCn) -> kern.PairTables:
    key = (basis.lam, basis.degree_cap, basis.quad_nodes.size,
           grid.half_width, grid.points_per_axis)
    tab = _TABLE_CACHE.get(key)
    if tab is None:
        ax = grid.axis()
        tab = kern.build_pair_tables(_axis_basis(basis), ax, ax)
        if len(_TABLE_CACHE) > 32:
            _TABLE_CACHE.clear()
        _TABLE_CACHE[key] = tab
    return tab


def _split_point(basis: HermiteBasis, z) -> list[tuple[float, float]]:
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if z.size != basis.n:
        raise ValueError(f"point {z} has wrong dimension for n={basis.n}")
    if not np.all(np.isfinite(z)):
        raise ValueError(f"point {z} is not finite")
    return [(float(w.real), float(w.imag)) for w in z]


def schrodinger_matrix(basis: HermiteBasis, z) -> WeylMatrix:
    """Matrix of pi_lam(z) in the truncated basis, with unitarity diagnostic."""
    parts = _split_point(basis, z)
    mat = kern.point_matrix(_axis_basis(basis), *parts[0])
    for (x, y) in parts[1:]:
        mat = np.kron(mat, kern.point_matrix(_axis_basis(basis), x, y))
    defect = float(np.linalg.norm(mat.conj().T @ mat - np.eye(mat.shape[0]), 2))
    return WeylMatrix(mat, basis.lam, basis, truncation_residual=defect)


def special_hermite(basis: HermiteBasis, alpha, beta, z) -> complex:
    """phi_{alpha beta}^lam(z) = (2 pi)^(-n/2) <pi_lam(z) phi_alpha, phi_beta>."""
    alpha = basis._check_alpha(alpha)
    beta = basis._check_alpha(beta)
    parts = _split_point(basis, z)
    ax = _axis_basis(basis)
    val = (2.0 * np.pi) ** (-0.5 * basis.n)
    for a_j, b_j, (x, y) in zip(alpha, beta, parts):
        pm = kern.point_matrix(ax, x, y)
        val *= pm[b_j, a_j]
    return complex(val)


def fourier_wigner(basis: HermiteBasis, phi: CoeffVector, psi: CoeffVector,
                   grid: GridCn) -> GridFunction:
    """Samples of T(phi, psi)(z) = <pi_lam(z) phi, psi> on the grid.

    The exact orthogonality constant (2 pi)^n holds for |lam| = 1; for other
    scales it becomes (2 pi / |lam|)^n.
    """
    if phi.basis.lam != basis.lam or psi.basis.lam != basis.lam:
        raise ValueError("coefficient vectors do not match the basis scale")
    if phi.basis.degree_cap != basis.degree_cap or psi.basis.degree_cap != basis.degree_cap:
        raise ValueError("coefficient vectors do not match the basis truncation")
    if grid.n != basis.n:
        raise ValueError("grid dimension does not match the basis")
    tab = _tables_for(basis, grid)
    if basis.n == 1:
        vals = kern.synth_rank_one(tab, phi.coeffs, psi.coeffs)
    else:
        coeff = np.outer(phi.coeffs, np.conj(psi.coeffs))
        vals = kern.synth_pair2(tab, tab, coeff)
    return GridFunction(grid, vals)


def weyl_transform(basis: HermiteBasis, f: GridFunction) -> WeylMatrix:
    """W(F) = int F(z) pi_lam(z) dz as a matrix in the truncated basis."""
    grid = f.grid
    if grid.n != basis.n:
        raise ValueError("grid dimension does not match the basis")
    tab = _tables_for(basis, grid)
    if basis.n == 1:
        mat = kern.weyl_pair(tab, f.values, grid.cell_weight)
    else:
        mat = kern.weyl_pair2(tab, tab, f.values, grid.cell_weight)
    return WeylMatrix(mat, basis.lam, basis, truncation_residual=f.tail_fraction())


def weyl_inverse(basis: HermiteBasis, w: WeylMatrix, grid: GridCn) -> GridFunction:
    """Trace inversion F(z) = (2 pi)^(-n) |lam|^n tr(pi_lam(z)^* W).

    Recovers F exactly (up to quadrature error) when F lies in the span of
    the matrix-element functions of the truncated basis.
    """
    if grid.n != basis.n:
        raise ValueError("grid dimension does not match the basis")
    tab = _tables_for(basis, grid)
    if basis.n == 1:
        vals = kern.inverse_pair(tab, w.matrix)
    else:
        vals = kern.inverse_pair2(tab, tab, w.matrix)
    scale = (abs(basis.lam) / (2.0 * np.pi)) ** basis.n
    return GridFunction(grid, scale * vals)


def synthesize_special_hermite(basis: HermiteBasis, coeff: NDArray, grid: GridCn) -> GridFunction:
    """Band-limited grid function  F = sum_ab coeff[a, b] conj(phi_ab^lam).

    ``coeff`` is indexed by flat basis indices; functions of this class have
    Weyl transform (2 pi / |lam|)^(n/2) * coeff placed entrywise, which makes
    them the reference class for exactness tests.
    """
    coeff = np.asarray(coeff, dtype=np.complex128)
    if coeff.shape != (basis.size, basis.size):
        raise ValueError("coefficient array must be square of the basis size")
    tab = _tables_for(basis, grid)
    scale = (2.0 * np.pi) ** (-0.5 * basis.n)
    if basis.n == 1:
        vals = kern.synth_pair(tab, coeff, conjugate_kernel=True)
    else:
        vals = kern.synth_pair2(tab, tab, coeff, conjugate_kernel=True)
    return GridFunction(grid, scale * vals)


def random_band_limited(basis: HermiteBasis, grid: GridCn, cap: int,
                        rng: np.random.Generator) -> tuple[GridFunction, NDArray[np.complex128]]:
    """Random band-limited function with Gaussian-decay random coefficients.

    Coefficients c_ab are supported on flat indices whose multi-index
    components all stay below ``cap``; returns the grid function and the
    full (size x size) coefficient array for use in closed-form oracles.
    """
    if cap > basis.degree_cap:
        raise ValueError("cap exceeds the basis degree cap")
    coeff = np.zeros((basis.size, basis.size), dtype=np.complex128)
    idx = [i for i, alpha in enumerate(basis.multi_indices) if max(alpha) < cap]
    sub = rng.standard_normal((len(idx), len(idx))) + 1j * rng.standard_normal((len(idx), len(idx)))
    orders = np.array([sum(basis.multi_indices[i]) for i in idx], dtype=float)
    decay = np.exp(-0.25 * (orders[:, None] + orders[None, :]))
    coeff[np.ix_(idx, idx)] = sub * decay
    return synthesize_special_hermite(basis, coeff, grid), coeff


def _check_conv_inputs(f: GridFunction, h: GridFunction) -> None:
    if f.grid != h.grid:
        raise ValueError("twisted convolution requires a shared grid")
    tail = h.tail_fraction()
    if tail > _TAIL_TOL:
        raise ValueError(
            f"second factor leaks mass {tail:.3e} outside 0.9*L; "
            f"twisted convolution needs tail below {_TAIL_TOL:.0e}"
        )


def _phase_tables(lam: float, axis: NDArray) -> tuple[NDArray, NDArray]:
    # phase exp(i lam/2 (y a - x b)) split into the two rank-one factors
    px = np.exp(-0.5j * lam * np.outer(axis, axis))   # px[x, b]
    return px, np.conj(px)                            # py[y, a]


def _twisted_conv_shift(lam: float, f: GridFunction, h: GridFunction) -> NDArray[np.complex128]:
    # lattice index of the coordinate difference z - w is (x - a) + m/2:
    # the coordinate origin sits at index m/2
    grid = f.grid
    m = grid.points_per_axis
    half = m // 2
    ax = grid.axis()
    px, py = _phase_tables(lam, ax)
    idx = (np.arange(m)[:, None] - np.arange(m)[None, :] + half) % m
    out = np.zeros((m, m), dtype=np.complex128)
    fv = f.values
    for a in range(m):
        fa = np.roll(fv, a - half, axis=0)   # fa[x, :] = F[(x - a + m/2) mod m, :]
        fg = fa[:, idx]                      # fg[x, y, b] = F at coordinate (z - w)
        s = np.einsum("xyb,xb->xy", fg, px * h.values[a][None, :], optimize=True)
        out += s * py[:, a][None, :]
    return grid.cell_weight * out


def _twisted_conv_direct(lams, f: GridFunction, h: GridFunction) -> NDArray[np.complex128]:
    # per-pair frequencies: phase exp(i/2 sum_j lam_j (y_j a_j - x_j b_j))
    grid = f.grid
    m = grid.points_per_axis
    ax = grid.axis()
    ndim = f.values.ndim
    out = np.empty(grid.shape, dtype=np.complex128)
    rng_idx = np.arange(m)
    half = m // 2
    for out_idx in np.ndindex(*grid.shape):
        gathered = f.values
        for axis_pos, i in enumerate(out_idx):
            gathered = np.take(gathered, (i - rng_idx + half) % m, axis=axis_pos)
        phase = 0.0
        for pair, lam_j in enumerate(lams):
            xi, yi = out_idx[2 * pair], out_idx[2 * pair + 1]
            av = ax.reshape((1,) * (2 * pair) + (-1,) + (1,) * (ndim - 2 * pair - 1))
            bv = ax.reshape((1,) * (2 * pair + 1) + (-1,) + (1,) * (ndim - 2 * pair - 2))
            phase = phase + 0.5 * lam_j * (ax[yi] * av - ax[xi] * bv)
        out[out_idx] = np.sum(gathered * h.values * np.exp(1j * phase))
    return grid.cell_weight * out


def twisted_convolution(lam: float, f: GridFunction, h: GridFunction,
                        method: str = "fast") -> GridFunction:
    """Discrete lam-twisted convolution (F x_lam H)(z).

    ``method='fast'`` uses grid-shift summation with precomputed phase
    tables (n = 1 only); ``method='reference'`` is the direct double sum,
    intended as an oracle on small grids.  Both evaluate the same discrete
    sum and agree to rounding.  Wrap-around is negligible as long as the
    factors obey the tail precondition.
    """
    _check_conv_inputs(f, h)
    if method == "reference":
        vals = _twisted_conv_direct((lam,) * f.grid.n, f, h)
    elif method == "fast":
        if f.grid.n != 1:
            raise ValueError("fast path supports n = 1; use method='reference'")
        vals = _twisted_conv_shift(lam, f, h)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GridFunction(f.grid, vals)
