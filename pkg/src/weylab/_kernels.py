"""Factorized quadrature kernels for representation matrix elements.

All matrix elements of the displacement action

    (U(x, y) phi)(xi) = exp(i * lam * (x xi + x y / 2)) phi(xi + y)

are computed in the centered form

    <U(x,y) phi_a, phi_b> = int exp(i lam x u) phi_a(u + y/2) phi_b(u - y/2) du,

which turns the Gauss-Hermite rule of the basis into an exact one (the
half-shift symmetrizes the Gaussian factor) and factorizes every grid
computation into an oscillatory table E[x, q] and two real shift tables
Phi[y, k, q].  Matrices follow the linear-algebra convention

    mat[i, j] = <U phi_j, phi_i>,

so ``mat @ coeffs`` are the coefficients of the image and operator
composition is the ordinary matrix product.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

from .hermite import HermiteBasis, lebesgue_quadrature, scaled_hermite_values


@dataclass(frozen=True)
class PairTables:
    """Precomputed tables for one (x, y) coordinate pair on a fixed grid."""

    lam: float
    x_axis: NDArray[np.float64]
    y_axis: NDArray[np.float64]
    e_table: NDArray[np.complex128]    # (Mx, Q): w_q * exp(i lam x u_q)
    phi_plus: NDArray[np.float64]      # (My, N, Q): phi_k(u_q + y/2)
    phi_minus: NDArray[np.float64]     # (My, N, Q): phi_k(u_q - y/2)


@lru_cache(maxsize=32)
def _cached_rule(size: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    return lebesgue_quadrature(size)


def oscillation_quad_size(lam: float, x_max: float, cap: int) -> int:
    """Rule size resolving exp(i lam x u) up to |x| = x_max against the basis.

    In the unit-scale variable the oscillation frequency is
    nu = sqrt(|lam|) x_max, whose Hermite-coefficient content reaches index
    ~ nu^2 / 2; the polynomial degree of two basis factors adds 2 cap.
    """
    nu2 = abs(lam) * x_max * x_max
    size = int(np.ceil(0.5 * nu2)) + 2 * cap + 24
    if size > 256:
        raise ValueError(
            f"oscillation bandwidth needs a {size}-point rule (cap 256); "
            "reduce the box width or the frequency"
        )
    return size


def _scaled_rule(lam: float, x_max: float, cap: int):
    size = oscillation_quad_size(lam, x_max, cap)
    t, w = _cached_rule(size)
    s = np.sqrt(abs(lam))
    return t / s, w / s


def build_pair_tables(basis: HermiteBasis, x_axis, y_axis) -> PairTables:
    """Tables for one coordinate pair; ``basis`` must be one-dimensional."""
    if basis.n != 1:
        raise ValueError("pair tables are built from a 1-D basis")
    x_axis = np.asarray(x_axis, dtype=np.float64)
    y_axis = np.asarray(y_axis, dtype=np.float64)
    cap = basis.degree_cap
    u, w = _scaled_rule(basis.lam, float(np.abs(x_axis).max()), cap)
    e_table = w[None, :] * np.exp(1j * basis.lam * np.outer(x_axis, u))
    plus = np.empty((y_axis.size, cap, u.size))
    minus = np.empty((y_axis.size, cap, u.size))
    for iy, y in enumerate(y_axis):
        plus[iy] = scaled_hermite_values(cap, basis.lam, u + 0.5 * y)
        minus[iy] = scaled_hermite_values(cap, basis.lam, u - 0.5 * y)
    return PairTables(basis.lam, x_axis, y_axis, e_table, plus, minus)


def point_matrix(basis: HermiteBasis, x: float, y: float) -> NDArray[np.complex128]:
    """Displacement matrix of a single pair point, mat[i,j] = <U phi_j, phi_i>."""
    if basis.n != 1:
        raise ValueError("point_matrix expects a 1-D basis")
    if not (np.isfinite(x) and np.isfinite(y)):
        raise ValueError(f"displacement ({x}, {y}) is not finite")
    u, w = _scaled_rule(basis.lam, abs(x), basis.degree_cap)
    e = w * np.exp(1j * basis.lam * x * u)
    plus = scaled_hermite_values(basis.degree_cap, basis.lam, u + 0.5 * y)
    minus = scaled_hermite_values(basis.degree_cap, basis.lam, u - 0.5 * y)
    # row i pairs with the (u - y/2) factor, column j with (u + y/2)
    return np.einsum("q,iq,jq->ij", e, minus, plus, optimize=True)


def weyl_pair(tables: PairTables, values: NDArray, cell_weight: float) -> NDArray[np.complex128]:
    """Weyl matrix of a grid function on one pair, values shaped (Mx, My)."""
    g = np.einsum("xy,xq->qy", values, tables.e_table, optimize=True)
    mat = np.einsum("yiq,yjq,qy->ij", tables.phi_minus, tables.phi_plus, g, optimize=True)
    return cell_weight * mat


def weyl_pair2(t1: PairTables, t2: PairTables, values: NDArray, cell_weight: float) -> NDArray[np.complex128]:
    """Weyl matrix over two pairs, values shaped (Mx1, My1, Mx2, My2).

    Flat indices follow the Kronecker order (a1, a2) -> a1 * N2 + a2.
    """
    g = np.einsum("xyzt,xq->qyzt", values, t1.e_table, optimize=True)
    h = np.einsum("qyzt,yiq,yjq->ijzt", g, t1.phi_minus, t1.phi_plus, optimize=True)
    g2 = np.einsum("ijzt,zp->ijpt", h, t2.e_table, optimize=True)
    mat4 = np.einsum("ijpt,tkp,tlp->ikjl", g2, t2.phi_minus, t2.phi_plus, optimize=True)
    n1, n2 = t1.phi_plus.shape[1], t2.phi_plus.shape[1]
    return cell_weight * mat4.reshape(n1 * n2, n1 * n2)


def synth_pair(tables: PairTables, coeff: NDArray, conjugate_kernel: bool = False) -> NDArray[np.complex128]:
    """Grid samples of sum_ab coeff[a,b] * T_ab, T_ab(x,y) = <U(x,y) phi_a, phi_b>.

    With ``conjugate_kernel`` the conjugated matrix elements are used
    instead (the tables are real apart from the oscillatory factor).
    """
    inner = np.einsum("yaq,ab,ybq->yq", tables.phi_plus, coeff, tables.phi_minus, optimize=True)
    e = np.conj(tables.e_table) if conjugate_kernel else tables.e_table
    return np.einsum("xq,yq->xy", e, inner, optimize=True)


def synth_rank_one(tables: PairTables, left: NDArray, right: NDArray,
                   conjugate_kernel: bool = False) -> NDArray[np.complex128]:
    """Grid samples of <U(x,y) f, g> for coefficient vectors f, g (one pair)."""
    fp = np.einsum("a,yaq->yq", left, tables.phi_plus, optimize=True)
    gm = np.einsum("b,ybq->yq", np.conj(right), tables.phi_minus, optimize=True)
    e = np.conj(tables.e_table) if conjugate_kernel else tables.e_table
    return np.einsum("xq,yq->xy", e, fp * gm, optimize=True)


def synth_pair2(t1: PairTables, t2: PairTables, coeff: NDArray,
                conjugate_kernel: bool = False) -> NDArray[np.complex128]:
    """Two-pair synthesis; coeff is flat (N1*N2, N1*N2) in Kronecker order."""
    n1 = t1.phi_plus.shape[1]
    n2 = t2.phi_plus.shape[1]
    c4 = coeff.reshape(n1, n2, n1, n2)
    inner2 = np.einsum("tcp,acbd,tdp->abtp", t2.phi_plus, c4, t2.phi_minus, optimize=True)
    e2 = np.conj(t2.e_table) if conjugate_kernel else t2.e_table
    d = np.einsum("zp,abtp->abzt", e2, inner2, optimize=True)
    inner1 = np.einsum("yaq,abzt,ybq->yqzt", t1.phi_plus, d, t1.phi_minus, optimize=True)
    e1 = np.conj(t1.e_table) if conjugate_kernel else t1.e_table
    return np.einsum("xq,yqzt->xyzt", e1, inner1, optimize=True)


def inverse_pair(tables: PairTables, mat: NDArray) -> NDArray[np.complex128]:
    """Pointwise trace inversion on one pair: out(v) = tr(U(v)^H mat)."""
    k = np.einsum("yiq,ij,yjq->yq", tables.phi_minus, mat, tables.phi_plus, optimize=True)
    return np.einsum("xq,yq->xy", np.conj(tables.e_table), k, optimize=True)


def inverse_pair2(t1: PairTables, t2: PairTables, mat: NDArray) -> NDArray[np.complex128]:
    """Trace inversion over two pairs; mat is flat in Kronecker order."""
    n1 = t1.phi_plus.shape[1]
    n2 = t2.phi_plus.shape[1]
    m4 = mat.reshape(n1, n2, n1, n2)
    k2 = np.einsum("tkp,ikjl,tlp->ijtp", t2.phi_minus, m4, t2.phi_plus, optimize=True)
    d = np.einsum("zp,ijtp->ijzt", np.conj(t2.e_table), k2, optimize=True)
    k1 = np.einsum("yiq,ijzt,yjq->yqzt", t1.phi_minus, d, t1.phi_plus, optimize=True)
    return np.einsum("xq,yqzt->xyzt", np.conj(t1.e_table), k1, optimize=True)
