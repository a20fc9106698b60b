"""The isometry-group layer on C x S^1 for one complex variable.

Rotations k = exp(i theta) act on displacements by z -> k z, and the
intertwining operator mu_lam(k) with

    pi_lam(k z) = mu_lam(k) pi_lam(z) mu_lam(k)^*

is diagonal in the Hermite basis for n = 1:

    mu_lam(theta) phi_k = exp(i sign(lam) k theta) phi_k.

The sign follows from writing pi_lam(z) as the coherent displacement
D(mu) with mu proportional to i z for lam > 0 and to -i conj(z) for
lam < 0; rotating z rotates mu by exp(i sign(lam) theta).  Characters
sigma_m(exp(i theta)) = exp(i m theta) of U(1) are all one-dimensional,
and the full representation used by the transforms below is

    rho_m(z, theta) = pi_lam(z) mu_lam(theta) * exp(i m theta).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .hermite import CoeffVector, HermiteBasis
from .heisenberg import (
    GridCn,
    GridFunction,
    WeylMatrix,
    fourier_wigner,
    synthesize_special_hermite,
    twisted_convolution,
    weyl_transform,
)


@dataclass(frozen=True)
class CharacterIndex:
    """Character sigma_m of U(1); d_sigma = 1 always (kept for typing the
    general compact-group layout, whose higher-dimensional blocks are not
    instantiated here)."""

    m: int
    d_sigma: int = 1

    def __post_init__(self):
        if self.d_sigma != 1:
            raise ValueError("only one-dimensional characters are supported")


@dataclass(frozen=True)
class GridGx:
    """Product grid C x S^1: a planar grid and T equispaced angles.

    The circle carries normalized Haar measure, weight 1/T per angle;
    character sums over exp(i p theta) are exact for |p| < T.
    """

    cn_grid: GridCn
    num_angles: int

    def __post_init__(self):
        if self.cn_grid.n != 1:
            raise ValueError("the motion layer is instantiated for n = 1 only")
        if self.num_angles < 4:
            raise ValueError("need at least 4 angles")

    @property
    def shape(self) -> tuple[int, int, int]:
        m = self.cn_grid.points_per_axis
        return (m, m, self.num_angles)

    def thetas(self) -> NDArray[np.float64]:
        return 2.0 * np.pi * np.arange(self.num_angles) / self.num_angles


@dataclass(frozen=True)
class GxFunction:
    """Complex samples on a GridGx, axes (x, y, theta)."""

    grid: GridGx
    values: NDArray[np.complex128]

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError("value shape does not match the C x S^1 grid")

    def norm_sq(self) -> float:
        w = self.grid.cn_grid.cell_weight / self.grid.num_angles
        return float(w * np.sum(np.abs(self.values) ** 2))

    def inner(self, other: "GxFunction") -> complex:
        if other.grid != self.grid:
            raise ValueError("functions live on different grids")
        w = self.grid.cn_grid.cell_weight / self.grid.num_angles
        return complex(w * np.vdot(other.values, self.values))

    def theta_mode(self, p: int) -> GridFunction:
        """Discrete Fourier coefficient (1/T) sum_theta F(., theta) e^{-i p theta}."""
        th = self.grid.thetas()
        weights = np.exp(-1j * p * th) / self.grid.num_angles
        return GridFunction(self.grid.cn_grid, self.values @ weights)


@dataclass(frozen=True)
class MotionWeylMatrix(WeylMatrix):
    """Weyl matrix tagged with its U(1) character index ``m``."""

    m: int = 0


def metaplectic_sign(lam: float) -> int:
    return 1 if lam > 0 else -1


def metaplectic_phases(basis: HermiteBasis, theta: float) -> NDArray[np.complex128]:
    """Diagonal of mu_lam(theta) in the truncated basis (n = 1)."""
    if basis.n != 1:
        raise ValueError("the diagonal metaplectic action requires n = 1")
    k = np.arange(basis.degree_cap)
    return np.exp(1j * metaplectic_sign(basis.lam) * k * theta)


def metaplectic_matrix(basis: HermiteBasis, theta: float) -> WeylMatrix:
    """mu_lam(theta) as a (diagonal, exactly unitary) Weyl matrix."""
    return WeylMatrix(np.diag(metaplectic_phases(basis, theta)), basis.lam, basis,
                      truncation_residual=0.0)


def rotate_coeffs(basis: HermiteBasis, theta: float, f: CoeffVector) -> CoeffVector:
    return CoeffVector(metaplectic_phases(basis, theta) * f.coeffs, basis)


def motion_weyl_sweep(basis: HermiteBasis, ms, f: GxFunction) -> dict[int, MotionWeylMatrix]:
    """Motion Weyl transforms for several characters, sharing slice work.

    The planar Weyl transform of each angle slice is computed once; every
    character only reweights the slices by exp(i m theta) and the diagonal
    metaplectic phases.
    """
    grid = f.grid
    th = grid.thetas()
    size = basis.size
    slices = np.empty((grid.num_angles, size, size), dtype=np.complex128)
    worst_tail = 0.0
    for j, theta in enumerate(th):
        slice_fn = GridFunction(grid.cn_grid, np.ascontiguousarray(f.values[:, :, j]))
        w_slice = weyl_transform(basis, slice_fn)
        worst_tail = max(worst_tail, w_slice.truncation_residual)
        slices[j] = w_slice.matrix * metaplectic_phases(basis, theta)[None, :]
    out = {}
    for m in ms:
        acc = np.tensordot(np.exp(1j * m * th), slices, axes=([0], [0])) / grid.num_angles
        out[m] = MotionWeylMatrix(acc, basis.lam, basis, truncation_residual=worst_tail,
                                  sigma_index=m, m=m)
    return out


def motion_weyl(basis: HermiteBasis, m: int, f: GxFunction) -> MotionWeylMatrix:
    """W_m(F) = int_K int_C F(z, k) pi(z) mu(k) sigma_m(k) dz dk.

    Computed as the Haar average over angle slices of
    (planar Weyl transform of the slice) composed with the diagonal
    metaplectic phases, weighted by the character.
    """
    return motion_weyl_sweep(basis, [m], f)[m]


def fourier_wigner_motion(basis: HermiteBasis, m: int, f: CoeffVector, g: CoeffVector,
                          grid: GridGx) -> GxFunction:
    """V_f^g(z, theta) = <pi(z) mu(theta) f, g> e^{i m theta} sampled on the grid."""
    out = np.empty(grid.shape, dtype=np.complex128)
    for j, theta in enumerate(grid.thetas()):
        planar = fourier_wigner(basis, rotate_coeffs(basis, theta, f), g, grid.cn_grid)
        out[:, :, j] = planar.values * np.exp(1j * m * theta)
    return GxFunction(grid, out)


def v_basis_element(basis: HermiteBasis, m: int, alpha: int, beta: int,
                    grid: GridGx) -> GxFunction:
    """V along the basis pair (phi_alpha, phi_beta) for character m.

    These are (2 pi)^(n/2)-normalized: dividing by that constant gives the
    orthonormal frame spanning the character-m block of L^2(C x S^1).
    """
    coeffs_a = np.zeros(basis.size, dtype=np.complex128)
    coeffs_a[basis.flat_index(alpha)] = 1.0
    coeffs_b = np.zeros(basis.size, dtype=np.complex128)
    coeffs_b[basis.flat_index(beta)] = 1.0
    return fourier_wigner_motion(basis, m, CoeffVector(coeffs_a, basis),
                                 CoeffVector(coeffs_b, basis), grid)


def group_fourier(basis: HermiteBasis, m: int, values: NDArray, t_axis: NDArray,
                  grid: GridGx) -> MotionWeylMatrix:
    """Group Fourier transform at (lam, sigma_m) of samples F(z, t, theta).

    ``values`` has shape (M, M, len(t_axis), T); the central variable is
    integrated first, F^lam(z, theta) = sum_t w_t F(z, t, theta) e^{i lam t},
    and the result is the motion Weyl transform of that slice.  The
    frequency must be nonzero and below the Nyquist rate of the t grid.
    """
    lam = basis.lam
    t_axis = np.asarray(t_axis, dtype=np.float64)
    if t_axis.size < 2:
        raise ValueError("need at least two central-time samples")
    dt = float(t_axis[1] - t_axis[0])
    if not np.allclose(np.diff(t_axis), dt):
        raise ValueError("t grid must be uniform")
    if lam == 0.0:
        raise ValueError("the frequency must lie in R \\ {0}")
    if abs(lam) >= np.pi / dt:
        raise ValueError(
            f"frequency {lam} at or beyond the Nyquist rate {np.pi / dt:.6g} of the t grid"
        )
    expected = grid.shape[:2] + (t_axis.size, grid.num_angles)
    if values.shape != expected:
        raise ValueError(f"sample shape {values.shape}, expected {expected}")
    slab = dt * np.tensordot(values, np.exp(1j * lam * t_axis), axes=([2], [0]))
    return motion_weyl(basis, m, GxFunction(grid, slab))


def synthesize_gx(basis: HermiteBasis, terms, grid: GridGx) -> GxFunction:
    """Band-limited function on C x S^1 from terms (p, a, b, coeff).

    Each term contributes coeff * conj(phi_ab^lam)(z) * e^{i p theta}.
    """
    m = grid.cn_grid.points_per_axis
    out = np.zeros(grid.shape, dtype=np.complex128)
    th = grid.thetas()
    planar_parts: dict[int, NDArray] = {}
    for (p, a, b, c) in terms:
        coeff = np.zeros((basis.size, basis.size), dtype=np.complex128)
        coeff[basis.flat_index(a), basis.flat_index(b)] = c
        part = synthesize_special_hermite(basis, coeff, grid.cn_grid).values
        if p in planar_parts:
            planar_parts[p] = planar_parts[p] + part
        else:
            planar_parts[p] = part
    for p, part in planar_parts.items():
        out += part[:, :, None] * np.exp(1j * p * th)[None, None, :]
    return GxFunction(grid, out)


def random_band_limited_gx(basis: HermiteBasis, grid: GridGx, cap: int, mode_cap: int,
                           rng: np.random.Generator):
    """Random band-limited function on C x S^1; returns (function, terms)."""
    terms = []
    for p in range(-mode_cap, mode_cap + 1):
        for a in range(cap):
            for b in range(cap):
                c = (rng.standard_normal() + 1j * rng.standard_normal()) * np.exp(
                    -0.25 * (a + b) - 0.25 * abs(p)
                )
                terms.append((p, a, b, c))
    return synthesize_gx(basis, terms, grid), terms


def motion_twisted_convolution(basis: HermiteBasis, f: GxFunction, h_terms,
                               grid: GridGx, method: str = "fast") -> GxFunction:
    """Twisted convolution on C x S^1 of a grid function with a band-limited one.

    The second factor is given by terms (p, a, b, coeff) as in
    :func:`synthesize_gx`; its rotations H(e^{-i theta} w) are then exact
    diagonal phases, and the angle integral collapses to one planar twisted
    convolution per term against the matching theta mode of F:

        (F x H)(u, psi) = sum_terms c e^{i p psi}
                          (F_mode[p - s(b - a)] x_lam conj(phi_ab))(u),

    with s = sign(lam).  Derived by substituting w -> e^{i theta} w in the
    convolution integral; verified against the Weyl product law.
    """
    sgn = metaplectic_sign(basis.lam)
    th = grid.thetas()
    out = np.zeros(grid.shape, dtype=np.complex128)
    mode_cache: dict[int, GridFunction] = {}
    for (p, a, b, c) in h_terms:
        q = p - sgn * (b - a)
        if q not in mode_cache:
            mode_cache[q] = f.theta_mode(q)
        coeff = np.zeros((basis.size, basis.size), dtype=np.complex128)
        coeff[basis.flat_index(a), basis.flat_index(b)] = 1.0
        g_ab = synthesize_special_hermite(basis, coeff, grid.cn_grid)
        conv = twisted_convolution(basis.lam, mode_cache[q], g_ab, method=method)
        out += c * conv.values[:, :, None] * np.exp(1j * p * th)[None, None, :]
    return GxFunction(grid, out)
