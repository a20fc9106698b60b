"""Numerical probes of the support-versus-rank uniqueness phenomenon.

A compactly supported nonzero function cannot have a finite-rank Weyl
transform; floating point cannot test the exact statement, so the tools
here work with its measurable surrogates: relative-threshold numerical
rank, spectral decompositions of positive Weyl matrices into diagonal
Fourier-Wigner sums, decay radii of shifted-product kernels, tail-mass
certificates, and an alternating-projection explorer for the
intersection {supported in a mask} /\ {rank <= r}.
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
    synthesize_special_hermite,
    weyl_inverse,
    weyl_transform,
)


@dataclass(frozen=True)
class RankProfile:
    """Singular values with a relative-threshold rank count."""

    singular_values: NDArray[np.float64]
    epsilon: float
    numerical_rank: int

    def __post_init__(self):
        if np.any(np.diff(self.singular_values) > 0):
            raise ValueError("singular values must be nonincreasing")


def rank_profile(w: WeylMatrix | NDArray, epsilon: float) -> RankProfile:
    """Full SVD rank profile; rank counts sigma_i > epsilon * sigma_1."""
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    mat = w.matrix if isinstance(w, WeylMatrix) else np.asarray(w)
    if not np.all(np.isfinite(mat.view(np.float64) if np.iscomplexobj(mat) else mat)):
        raise ValueError("matrix has non-finite entries")
    svals = np.linalg.svd(mat, compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        return RankProfile(svals, epsilon, 0)
    rank = int(np.count_nonzero(svals > epsilon * svals[0]))
    return RankProfile(svals, epsilon, rank)


@dataclass(frozen=True)
class WignerDecomposition:
    """tau = sum_j T(h_j, h_j) with weights a_j >= 0 and a residual report."""

    components: tuple[CoeffVector, ...]
    weights: NDArray[np.float64]
    residual: float


def spectral_to_wigner(tau_hat: WeylMatrix, basis: HermiteBasis, grid: GridCn,
                       drop_tol: float = 1e-13) -> tuple[WignerDecomposition, GridFunction]:
    """Diagonalize a positive Weyl matrix into a diagonal Fourier-Wigner sum.

    For tau_hat = W(conj(tau)) positive semidefinite, the eigenpairs
    (a_j, f_j) give tau = sum_j T(h_j, h_j) with
    h_j = (2 pi)^(-n/2) sqrt(a_j) f_j.  Returns the decomposition and the
    reconstructed tau on the grid; the stored residual compares the
    reconstruction against the trace inversion of tau_hat.
    """
    mat = tau_hat.matrix
    herm_defect = float(np.abs(mat - mat.conj().T).max())
    scale = max(float(np.abs(mat).max()), 1e-300)
    if herm_defect > 1e-8 * scale:
        raise ValueError(f"input is not Hermitian: defect {herm_defect:.3e}")
    sym = 0.5 * (mat + mat.conj().T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    if eigvals.size and eigvals.min() < -1e-10 * max(1.0, float(eigvals.max())):
        raise ValueError(f"matrix is not positive semidefinite: min eig {eigvals.min():.3e}")
    eigvals = np.clip(eigvals, 0.0, None)
    order = np.argsort(eigvals)[::-1]
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]
    keep = eigvals > drop_tol * (eigvals[0] if eigvals.size and eigvals[0] > 0 else 1.0)
    eigvals, eigvecs = eigvals[keep], eigvecs[:, keep]
    norm_const = (2.0 * np.pi) ** (-0.5 * basis.n)
    components = tuple(
        CoeffVector(norm_const * np.sqrt(a) * eigvecs[:, j], basis)
        for j, a in enumerate(eigvals)
    )
    # one synthesis call: sum_j T(h_j, h_j) has coefficient matrix sum_j h_j h_j^H
    coeff = np.zeros((basis.size, basis.size), dtype=np.complex128)
    for h in components:
        coeff += np.outer(h.coeffs, np.conj(h.coeffs))
    tau_rec = _synthesize_plain(basis, coeff, grid)
    tau_ref = weyl_inverse(basis, tau_hat, grid)
    ref = GridFunction(grid, np.conj(tau_ref.values))
    denom = max(ref.norm(), 1e-300)
    residual = float(np.sqrt(grid.cell_weight) * np.linalg.norm(tau_rec.values - ref.values) / denom)
    if not components:
        residual = 0.0
    return WignerDecomposition(components, eigvals, residual), tau_rec


def _synthesize_plain(basis: HermiteBasis, coeff: NDArray, grid: GridCn) -> GridFunction:
    """sum_ab coeff[a,b] T_ab on the grid (unconjugated matrix elements)."""
    from . import _kernels as kern
    from .heisenberg import _tables_for

    tab = _tables_for(basis, grid)
    if basis.n == 1:
        vals = kern.synth_pair(tab, np.asarray(coeff, dtype=np.complex128))
    else:
        vals = kern.synth_pair2(tab, tab, np.asarray(coeff, dtype=np.complex128))
    return GridFunction(grid, vals)


def kernel_shifted_products(basis: HermiteBasis, chis, phis, coeffs, y: float) -> NDArray[np.complex128]:
    """K_y(xi) = sum_j b_j chi_j(xi + y) conj(phi_j(xi)) at the quadrature nodes."""
    if basis.n != 1:
        raise ValueError("kernel analysis is one-dimensional")
    chis, phis = list(chis), list(phis)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if not (len(chis) == len(phis) == coeffs.size) or coeffs.size == 0:
        raise ValueError("need equally many chi_j, phi_j and nonzero weights b_j")
    if np.any(coeffs == 0.0):
        raise ValueError("weights b_j must be nonzero")
    xi = basis.quad_nodes
    vals_shift = basis.axis_values(xi + y)
    vals = basis.axis_values(xi)
    out = np.zeros(xi.size, dtype=np.complex128)
    for b_j, chi, phi in zip(coeffs, chis, phis):
        chi_s = chi.coeffs @ vals_shift
        phi_s = phi.coeffs @ vals
        out += b_j * chi_s * np.conj(phi_s)
    return out


def kernel_decay_radius(basis: HermiteBasis, chis, phis, coeffs, tol: float,
                        y_values) -> tuple[float, NDArray[np.float64]]:
    """Smallest sampled r with sup_{|y| >= r} max_xi |K_y(xi)| <= tol.

    Returns (r_hat, curve) where curve[i] = max_xi |K_{y_i}(xi)|;
    r_hat is inf when even the largest sampled |y| still exceeds tol.
    """
    y_values = np.sort(np.abs(np.asarray(y_values, dtype=np.float64)))
    curve = np.array([
        float(np.abs(kernel_shifted_products(basis, chis, phis, coeffs, y)).max())
        for y in y_values
    ])
    suffix_max = np.maximum.accumulate(curve[::-1])[::-1]
    ok = suffix_max <= tol
    if not ok.any():
        return float("inf"), curve
    return float(y_values[int(np.argmax(ok))]), curve


def tail_mass(f: GridFunction, radius: float) -> float:
    """Squared L^2 mass of F outside the centered ball of the given radius."""
    if radius >= f.grid.half_width:
        raise ValueError("radius must stay inside the grid box")
    r = f.grid.radius_grid()
    outside = r > radius
    return float(f.grid.cell_weight * np.sum(np.abs(f.values[outside]) ** 2))


def truncate_rank(mat: NDArray, rank_cap: int) -> NDArray[np.complex128]:
    u, s, vh = np.linalg.svd(mat)
    s = s.copy()
    s[rank_cap:] = 0.0
    return (u * s) @ vh


def pocs_explorer(basis: HermiteBasis, grid: GridCn, support_mask: NDArray,
                  rank_cap: int, iterations: int, seed: int = 0,
                  initial: GridFunction | None = None) -> NDArray[np.float64]:
    """Alternate mask projection and rank-capped Weyl truncation.

    Records the discrete L^2 norm after every full cycle (mask, then
    Weyl -> rank cap -> trace inversion); index 0 holds the initial norm.
    The rank constraint is non-convex, so the trajectory is reported as
    data with no convergence claim; masking never increases the norm.
    """
    if rank_cap < 1:
        raise ValueError("rank_cap must be >= 1")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    mask = np.asarray(support_mask)
    if mask.shape != grid.shape:
        raise ValueError("mask shape does not match the grid")
    if initial is None:
        rng = np.random.default_rng(seed)
        cap = min(basis.degree_cap, 8)
        coeff = np.zeros((basis.size, basis.size), dtype=np.complex128)
        idx = [i for i, a in enumerate(basis.multi_indices) if max(a) < cap]
        coeff[np.ix_(idx, idx)] = rng.standard_normal((len(idx),) * 2) + 1j * rng.standard_normal((len(idx),) * 2)
        start = synthesize_special_hermite(basis, coeff, grid)
        current = GridFunction(grid, start.values * mask)
    else:
        current = initial
    norms = [current.norm()]
    for _ in range(iterations):
        current = GridFunction(grid, current.values * mask)
        w = weyl_transform(basis, current)
        w_capped = WeylMatrix(truncate_rank(w.matrix, rank_cap), basis.lam, basis,
                              truncation_residual=w.truncation_residual)
        current = weyl_inverse(basis, w_capped, grid)
        norms.append(current.norm())
    return np.array(norms)
