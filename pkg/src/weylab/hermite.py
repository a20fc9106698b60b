"""Scaled Hermite functions on R^n and Gauss-Hermite quadrature.

The basis functions are the L^2-orthonormal Hermite functions rescaled by a
nonzero frequency ``lam``::

    phi_k^lam(x) = |lam|^(1/4) * phi_k(sqrt(|lam|) * x)        (one axis)

with products over axes for n = 2.  They are eigenfunctions of the
oscillator H_lam = -Laplacian + lam^2 |x|^2 with eigenvalue
(2|alpha| + n)|lam|, which :func:`operator_rayleigh` verifies through
ladder-operator matrices rather than finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray


class TruncationError(ValueError):
    """Raised when an operation would need basis elements beyond the cap."""


def gauss_hermite(size: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Nodes and weights for integrals of the form  int f(x) exp(-x^2) dx.

    Exact whenever ``f`` is a polynomial of degree <= 2*size - 1.
    """
    if size < 1:
        raise ValueError(f"quadrature size must be >= 1, got {size}")
    return np.polynomial.hermite.hermgauss(size)


def lebesgue_quadrature(size: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Gauss-Hermite rule converted to plain Lebesgue integration.

    Returns nodes ``x_q`` and strictly positive weights ``w_q`` such that
    ``sum(w_q * f(x_q))`` equals ``int f(x) dx`` exactly for
    f = (polynomial of degree <= 2*size - 1) * exp(-x^2).
    """
    nodes, weights = gauss_hermite(size)
    # weights underflow around size ~ 370; keep well clear of that regime
    if size > 256:
        raise ValueError(f"quadrature size {size} exceeds the supported 256")
    return nodes, weights * np.exp(nodes**2)


def hermite_values(num: int, points: NDArray[np.float64]) -> NDArray[np.float64]:
    """Evaluate the first ``num`` orthonormal Hermite functions (lam = 1).

    Uses the stable three-term recurrence on the functions themselves (the
    exp(-x^2/2) factor is carried along), so no overflow occurs for the
    moderate degrees handled here.  Returns an array of shape
    ``(num, len(points))``.
    """
    pts = np.asarray(points, dtype=np.float64)
    out = np.empty((num, pts.size), dtype=np.float64)
    out[0] = np.pi ** (-0.25) * np.exp(-0.5 * pts**2)
    if num > 1:
        out[1] = np.sqrt(2.0) * pts * out[0]
    for k in range(2, num):
        out[k] = np.sqrt(2.0 / k) * pts * out[k - 1] - np.sqrt((k - 1) / k) * out[k - 2]
    return out


def scaled_hermite_values(num: int, lam: float, points) -> NDArray[np.float64]:
    """Evaluate phi_k^lam on one axis for k < num; shape (num, len(points))."""
    s = np.sqrt(abs(lam))
    pts = np.atleast_1d(np.asarray(points, dtype=np.float64))
    return s**0.5 * hermite_values(num, s * pts)


@lru_cache(maxsize=64)
def _multi_indices(n: int, cap: int) -> tuple[tuple[int, ...], ...]:
    if n == 1:
        return tuple((k,) for k in range(cap))
    return tuple((a, b) for a in range(cap) for b in range(cap))


@dataclass(frozen=True)
class HermiteBasis:
    """Truncated scaled Hermite system with its quadrature rule.

    Multi-indices run lexicographically with every component below
    ``degree_cap``; the flat position of ``(a, b)`` for n = 2 is
    ``a * degree_cap + b``.  ``quad_nodes`` / ``quad_weights`` integrate
    dx on the axis exactly for products of two basis elements.
    """

    n: int
    lam: float
    degree_cap: int
    quad_nodes: NDArray[np.float64] = field(repr=False)
    quad_weights: NDArray[np.float64] = field(repr=False)

    @classmethod
    def create(cls, n: int, lam: float, degree_cap: int, quad_size: int | None = None) -> "HermiteBasis":
        if n not in (1, 2):
            raise ValueError(f"spatial dimension must be 1 or 2, got {n}")
        if lam == 0.0 or not np.isfinite(lam):
            raise ValueError("scale lam must be a nonzero finite real")
        if degree_cap < 1:
            raise ValueError(f"degree_cap must be >= 1, got {degree_cap}")
        if quad_size is None:
            quad_size = 2 * degree_cap + 8
        if quad_size < 2 * degree_cap + 8:
            raise ValueError(
                f"quadrature size {quad_size} below the exactness margin {2 * degree_cap + 8}"
            )
        nodes, weights = lebesgue_quadrature(quad_size)
        s = np.sqrt(abs(lam))
        return cls(n=n, lam=lam, degree_cap=degree_cap, quad_nodes=nodes / s, quad_weights=weights / s)

    @property
    def size(self) -> int:
        return self.degree_cap**self.n

    @property
    def multi_indices(self) -> tuple[tuple[int, ...], ...]:
        return _multi_indices(self.n, self.degree_cap)

    def flat_index(self, alpha) -> int:
        alpha = self._check_alpha(alpha)
        if self.n == 1:
            return alpha[0]
        return alpha[0] * self.degree_cap + alpha[1]

    def _check_alpha(self, alpha) -> tuple[int, ...]:
        alpha = (alpha,) if np.isscalar(alpha) else tuple(int(a) for a in alpha)
        if len(alpha) != self.n:
            raise IndexError(f"multi-index {alpha} has wrong length for n={self.n}")
        if any(a < 0 or a >= self.degree_cap for a in alpha):
            raise IndexError(f"multi-index {alpha} outside cap {self.degree_cap}")
        return alpha

    def axis_values(self, points) -> NDArray[np.float64]:
        """All 1-D basis functions at the given axis points."""
        return scaled_hermite_values(self.degree_cap, self.lam, points)

    def eval(self, alpha, x) -> float:
        """phi_alpha^lam at a single point of R^n."""
        alpha = self._check_alpha(alpha)
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if x.size != self.n or not np.all(np.isfinite(x)):
            raise ValueError(f"point {x} is not a finite point of R^{self.n}")
        val = 1.0
        for a_j, x_j in zip(alpha, x):
            val *= scaled_hermite_values(a_j + 1, self.lam, np.array([x_j]))[a_j, 0]
        return float(val)

    def gram_matrix(self) -> NDArray[np.float64]:
        """Discrete Gram matrix of the 1-D system under the quadrature rule."""
        vals = self.axis_values(self.quad_nodes)
        return (vals * self.quad_weights) @ vals.T

    def gram_defect(self) -> float:
        g = self.gram_matrix()
        return float(np.abs(g - np.eye(self.degree_cap)).max())

    def project(self, values_on_nodes: NDArray) -> NDArray:
        """1-D quadrature projection of samples at quad_nodes onto the basis."""
        vals = self.axis_values(self.quad_nodes)
        return (vals * self.quad_weights) @ np.asarray(values_on_nodes)


@dataclass(frozen=True)
class CoeffVector:
    """Element of the truncated L^2(R^n) given by basis coefficients."""

    coeffs: NDArray[np.complex128]
    basis: HermiteBasis

    def __post_init__(self):
        if self.coeffs.shape != (self.basis.size,):
            raise ValueError(
                f"coefficient length {self.coeffs.shape} does not match basis size {self.basis.size}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other: "CoeffVector") -> complex:
        """<self, other> = sum_a self_a * conj(other_a)."""
        if other.basis is not self.basis and (
            other.basis.n != self.basis.n
            or other.basis.lam != self.basis.lam
            or other.basis.degree_cap != self.basis.degree_cap
        ):
            raise ValueError("coefficient vectors live in different bases")
        return complex(np.vdot(other.coeffs, self.coeffs))

    def unit(self) -> "CoeffVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return CoeffVector(self.coeffs / nrm, self.basis)


def basis_vector(basis: HermiteBasis, alpha) -> CoeffVector:
    coeffs = np.zeros(basis.size, dtype=np.complex128)
    coeffs[basis.flat_index(alpha)] = 1.0
    return CoeffVector(coeffs, basis)


def position_matrix(basis: HermiteBasis) -> NDArray[np.float64]:
    """1-D multiplication-by-x operator in the scaled basis (symmetric)."""
    cap, lam = basis.degree_cap, abs(basis.lam)
    off = np.sqrt(np.arange(1, cap) / (2.0 * lam))
    return np.diag(off, 1) + np.diag(off, -1)


def derivative_matrix(basis: HermiteBasis) -> NDArray[np.float64]:
    """1-D d/dx operator in the scaled basis (antisymmetric).

    Column k holds the expansion of (phi_k^lam)' =
    sqrt(lam/2) (sqrt(k) phi_{k-1} - sqrt(k+1) phi_{k+1}).
    """
    cap, lam = basis.degree_cap, abs(basis.lam)
    off = np.sqrt(np.arange(1, cap) * lam / 2.0)
    return np.diag(off, 1) - np.diag(off, -1)


def oscillator_matrix(basis: HermiteBasis) -> NDArray[np.float64]:
    """H_lam = -(d/dx)^2 + lam^2 x^2 on one axis, assembled from the ladders.

    Exact on basis elements with index <= degree_cap - 2; the top row is
    polluted by the truncation.
    """
    x = position_matrix(basis)
    d = derivative_matrix(basis)
    return -(d @ d) + basis.lam**2 * (x @ x)


def operator_rayleigh(basis: HermiteBasis, alpha) -> float:
    """Rayleigh quotient <H_lam phi_alpha, phi_alpha> for an oscillator eigenpair.

    The expected value is (2|alpha| + n)|lam|.  Raises
    :class:`TruncationError` when any component of alpha sits at the
    truncation boundary, where the ladder products are no longer exact.
    """
    alpha = basis._check_alpha(alpha)
    if any(a > basis.degree_cap - 2 for a in alpha):
        raise TruncationError(
            f"alpha {alpha} touches the truncation boundary (cap {basis.degree_cap})"
        )
    h = oscillator_matrix(basis)
    return float(sum(h[a, a] for a in alpha))
