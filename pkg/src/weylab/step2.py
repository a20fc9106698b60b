"""Step-two nilpotent Lie algebras from structure constants.

A step-two algebra splits as g = b (+) z with [b, b] inside the center z
and all triple brackets zero, so the exponential-coordinate group law

    (V, Z) (V', Z') = (V + V', Z + Z' + [V, V'] / 2)

is exact.  A central covector omega turns the bracket into the skew form
B_omega(X, Y) = omega([X, Y]); its real canonical form yields per-pair
frequencies d_i(omega) > 0, an orthonormal almost-symplectic basis
(X_i, Y_i) with B_omega(X_i, Y_j) = delta_ij d_i, and the Plancherel
density p(omega) = prod d_i.  In the adapted coordinates the induced
representation is a product of displacement actions with per-pair
frequency d_i, so all Weyl machinery factorizes exactly as on C^n.

Orientation note: with the pairing normalized to B(X_i, Y_i) = +d_i, the
displacement formula composes as
pi(v) pi(v') = exp(-i B_omega(v, v') / 2) pi(v + v'); the twisted
convolution below uses that phase, which is the one validated by the
operator product law (on the two-dimensional fixture it reduces to the
usual planar convention, where Im(z.conj(w)) = y x' - x y').
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import schur

from . import _kernels as kern
from .hermite import CoeffVector, HermiteBasis
from .heisenberg import (
    GridCn,
    GridFunction,
    _check_conv_inputs,
    _tables_for,
    _twisted_conv_direct,
    _twisted_conv_shift,
)

_PAIRING_TOL = 1e-10


@dataclass(frozen=True)
class StepTwoAlgebra:
    """Structure constants c[i, j, l] with [V_i, V_j] = sum_l c_ijl Z_l."""

    b_dim: int
    z_dim: int
    structure: NDArray[np.float64] = field(repr=False)

    def __post_init__(self):
        expected = (self.b_dim, self.b_dim, self.z_dim)
        if self.structure.shape != expected:
            raise ValueError(f"structure tensor shape {self.structure.shape}, expected {expected}")
        skew = self.structure + np.swapaxes(self.structure, 0, 1)
        if np.abs(skew).max() != 0.0:
            raise ValueError("structure constants are not antisymmetric in (i, j)")

    def bracket(self, v, w) -> NDArray[np.float64]:
        """[v, w] in the center, for v, w in b coordinates."""
        return np.einsum("ijl,i,j->l", self.structure, np.asarray(v), np.asarray(w))

    def group_product(self, g1, g2):
        """Exponential-coordinate product of (V, Z) pairs; exact for step two."""
        v1, z1 = (np.asarray(a, dtype=float) for a in g1)
        v2, z2 = (np.asarray(a, dtype=float) for a in g2)
        return v1 + v2, z1 + z2 + 0.5 * self.bracket(v1, v2)

    def to_text(self) -> str:
        lines = [f"{self.b_dim} {self.z_dim}"]
        for i in range(self.b_dim):
            for j in range(i + 1, self.b_dim):
                for l in range(self.z_dim):
                    v = self.structure[i, j, l]
                    if v != 0.0:
                        lines.append(f"{i + 1} {j + 1} {l + 1} {v:.17g}")
        return "\n".join(lines) + "\n"


def parse_algebra(text: str) -> StepTwoAlgebra:
    """Parse the plain-text structure-constants format.

    Header line ``m k``, then one line ``i j l value`` (1-based indices)
    per nonzero c_ijl.  Mirror entries are filled by antisymmetry and
    validated when given explicitly.
    """
    rows = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            rows.append((ln, stripped))
    if not rows:
        raise ValueError("empty structure-constants file")
    head = rows[0][1].split()
    if len(head) != 2:
        raise ValueError(f"line {rows[0][0]}: header must be 'm k'")
    try:
        m, k = int(head[0]), int(head[1])
    except ValueError as exc:
        raise ValueError(f"line {rows[0][0]}: non-integer header") from exc
    if m < 1 or k < 1:
        raise ValueError("dimensions must be positive")
    tensor = np.zeros((m, m, k))
    seen: dict[tuple[int, int, int], float] = {}
    for ln, entry in rows[1:]:
        parts = entry.split()
        if len(parts) != 4:
            raise ValueError(f"line {ln}: expected 'i j l value'")
        try:
            i, j, l = int(parts[0]) - 1, int(parts[1]) - 1, int(parts[2]) - 1
            value = float(parts[3])
        except ValueError as exc:
            raise ValueError(f"line {ln}: malformed entry") from exc
        if not (0 <= i < m and 0 <= j < m and 0 <= l < k):
            raise ValueError(f"line {ln}: index out of range")
        if i == j and value != 0.0:
            raise ValueError(f"line {ln}: diagonal bracket must vanish")
        if (i, j, l) in seen:
            raise ValueError(f"line {ln}: duplicate entry for ({i + 1},{j + 1},{l + 1})")
        seen[(i, j, l)] = value
        mirror = seen.get((j, i, l))
        if mirror is not None and mirror != -value:
            raise ValueError(f"line {ln}: entry conflicts with antisymmetry")
        tensor[i, j, l] = value
        if (j, i, l) not in seen:
            tensor[j, i, l] = -value
    return StepTwoAlgebra(b_dim=m, z_dim=k, structure=tensor)


def load_algebra(path) -> StepTwoAlgebra:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_algebra(fh.read())


FIXTURE_NAMES = ("heisenberg", "quaternionic", "radical")


def fixture_text(name: str) -> str:
    if name not in FIXTURE_NAMES:
        raise ValueError(f"unknown fixture {name!r}; available: {FIXTURE_NAMES}")
    return resources.files("weylab").joinpath(f"fixtures/{name}.txt").read_text()


def load_fixture(name: str) -> StepTwoAlgebra:
    return parse_algebra(fixture_text(name))


def heisenberg_algebra() -> StepTwoAlgebra:
    """b = R^2, z = R, [V1, V2] = Z1."""
    return load_fixture("heisenberg")


def quaternionic_htype_algebra() -> StepTwoAlgebra:
    """b = quaternions, z = imaginary quaternions; B_omega^2 = -|omega|^2 I."""
    return load_fixture("quaternionic")


def radical_example_algebra() -> StepTwoAlgebra:
    """m = 4 with only [V1, V2] = Z1: two central directions inside b."""
    return load_fixture("radical")


def bilinear_form(alg: StepTwoAlgebra, omega) -> NDArray[np.float64]:
    """B_omega = sum_l omega_l C^l; exactly skew by construction."""
    omega = np.asarray(omega, dtype=np.float64)
    if omega.shape != (alg.z_dim,):
        raise ValueError(f"omega must have length {alg.z_dim}")
    if not np.all(np.isfinite(omega)):
        raise ValueError("omega must be finite")
    return np.einsum("ijl,l->ij", alg.structure, omega)


@dataclass(frozen=True)
class SymplecticDecomp:
    """Canonical data of B_omega: frequencies, adapted basis, radical."""

    omega: NDArray[np.float64]
    bilinear: NDArray[np.float64]
    d: NDArray[np.float64]              # descending, > 0
    x_basis: NDArray[np.float64]        # (m, n) columns X_i
    y_basis: NDArray[np.float64]        # (m, n) columns Y_i
    radical: NDArray[np.float64]        # (m, r) orthonormal kernel columns
    degenerate_pairs: bool = False      # some |d_i - d_j| < 1e-12 tie-broken

    @property
    def num_pairs(self) -> int:
        return int(self.d.size)

    @property
    def radical_dim(self) -> int:
        return int(self.radical.shape[1])

    @property
    def is_metivier_at_omega(self) -> bool:
        return self.radical_dim == 0

    @property
    def p_omega(self) -> float:
        return float(np.prod(self.d))

    def pairing_residual(self) -> float:
        """max deviation from B(X_i, Y_j) = delta_ij d_i, B(X,X) = B(Y,Y) = 0."""
        bxy = self.x_basis.T @ self.bilinear @ self.y_basis
        bxx = self.x_basis.T @ self.bilinear @ self.x_basis
        byy = self.y_basis.T @ self.bilinear @ self.y_basis
        r = np.abs(bxy - np.diag(self.d)).max() if self.d.size else 0.0
        if self.d.size:
            r = max(r, np.abs(bxx).max(), np.abs(byy).max())
        return float(r)

    def to_adapted(self, v) -> tuple[NDArray, NDArray]:
        """Coordinates (x, y) of v in the adapted frame; rejects radical leakage."""
        v = np.asarray(v, dtype=np.float64)
        x = self.x_basis.T @ v
        y = self.y_basis.T @ v
        rec = self.x_basis @ x + self.y_basis @ y
        leak = np.linalg.norm(v - rec)
        if leak > 1e-8 * max(1.0, np.linalg.norm(v)):
            raise ValueError(f"vector has radical component {leak:.3e}; not in the adapted span")
        return x, y

    def from_adapted(self, x, y) -> NDArray[np.float64]:
        return self.x_basis @ np.asarray(x) + self.y_basis @ np.asarray(y)


def symplectic_decompose(b_matrix: NDArray, omega, alg: StepTwoAlgebra | None = None) -> SymplecticDecomp:
    """Real canonical form of a skew matrix as paired frequencies + radical.

    The Schur form of a real skew matrix is block diagonal with 2x2 blocks
    [[0, d], [-d, 0]]; each block yields an orthonormal pair (X_i, Y_i)
    ordered and sign-fixed deterministically (descending d, ties broken by
    the first significant coordinate of X_i made positive).
    """
    b_matrix = np.asarray(b_matrix, dtype=np.float64)
    m = b_matrix.shape[0]
    if b_matrix.shape != (m, m) or np.abs(b_matrix + b_matrix.T).max() > 1e-12 * max(
        1.0, np.abs(b_matrix).max()
    ):
        raise ValueError("input must be a square skew-symmetric matrix")
    omega = np.asarray(omega, dtype=np.float64)
    scale = np.abs(b_matrix).max()
    if scale == 0.0:
        return SymplecticDecomp(omega, b_matrix, np.zeros(0), np.zeros((m, 0)),
                                np.zeros((m, 0)), np.eye(m))
    t, q = schur(b_matrix, output="real")
    zero_tol = 1e-12 * scale
    pairs = []
    radical_cols = []
    i = 0
    while i < m:
        if i + 1 < m and abs(t[i, i + 1]) > zero_tol:
            d_i = abs(t[i, i + 1])
            if t[i, i + 1] > 0:
                x_i, y_i = q[:, i], q[:, i + 1]
            else:
                x_i, y_i = q[:, i + 1], q[:, i]
            pairs.append((d_i, x_i, y_i))
            i += 2
        else:
            radical_cols.append(q[:, i])
            i += 1
    # deterministic orientation: first significant coordinate of X_i positive
    fixed = []
    for d_i, x_i, y_i in pairs:
        lead = int(np.argmax(np.abs(x_i) > 1e-9))
        if x_i[lead] < 0:
            x_i, y_i = -x_i, -y_i
        fixed.append((d_i, lead, x_i, y_i))
    degenerate = any(
        abs(a[0] - b[0]) < 1e-12 for idx, a in enumerate(fixed) for b in fixed[idx + 1:]
    )
    fixed.sort(key=lambda item: (-item[0], item[1]))
    d = np.array([item[0] for item in fixed])
    x_basis = np.column_stack([item[2] for item in fixed]) if fixed else np.zeros((m, 0))
    y_basis = np.column_stack([item[3] for item in fixed]) if fixed else np.zeros((m, 0))
    radical = np.column_stack(radical_cols) if radical_cols else np.zeros((m, 0))
    decomp = SymplecticDecomp(omega, b_matrix, d, x_basis, y_basis, radical,
                              degenerate_pairs=degenerate)
    resid = decomp.pairing_residual()
    if resid > _PAIRING_TOL * max(1.0, scale):
        raise ArithmeticError(f"canonical pairing residual {resid:.3e} exceeds tolerance")
    return decomp


def decompose_at(alg: StepTwoAlgebra, omega) -> SymplecticDecomp:
    return symplectic_decompose(bilinear_form(alg, omega), omega, alg)


def sampled_metivier_flag(alg: StepTwoAlgebra, num_samples: int = 16,
                          seed: int = 0) -> bool:
    """True when B_omega is non-degenerate at every sampled omega != 0."""
    rng = np.random.default_rng(seed)
    for _ in range(num_samples):
        omega = rng.standard_normal(alg.z_dim)
        omega /= np.linalg.norm(omega)
        if decompose_at(alg, omega).radical_dim != 0:
            return False
    return True


def pair_bases(decomp: SymplecticDecomp, degree_cap: int,
               quad_size: int | None = None) -> tuple[HermiteBasis, ...]:
    """One 1-D Hermite basis per symplectic pair, scaled by d_i(omega)."""
    if decomp.num_pairs == 0:
        raise ValueError("decomposition has no symplectic pairs")
    if decomp.num_pairs > 2:
        raise ValueError("at most two symplectic pairs are supported")
    return tuple(
        HermiteBasis.create(1, float(d_i), degree_cap, quad_size) for d_i in decomp.d
    )


def pi_omega_matrix(decomp: SymplecticDecomp, bases, x, y) -> NDArray[np.complex128]:
    """Matrix of the displacement part of pi_omega at adapted coordinates.

    x, y are length-n vectors in the (X_i(omega), Y_i(omega)) frame; the
    action is the product over pairs of 1-D displacements with frequency
    d_i(omega).
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.size != decomp.num_pairs or y.size != decomp.num_pairs:
        raise ValueError("coordinates must match the number of pairs")
    mat = kern.point_matrix(bases[0], float(x[0]), float(y[0]))
    for j in range(1, decomp.num_pairs):
        mat = np.kron(mat, kern.point_matrix(bases[j], float(x[j]), float(y[j])))
    return mat


def pi_omega_action(decomp: SymplecticDecomp, bases, x, y, t,
                    phi: CoeffVector | NDArray) -> NDArray[np.complex128]:
    """Apply pi_omega(x, y, t) to a coefficient vector (adapted coordinates)."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if t.size != decomp.omega.size:
        raise ValueError("central coordinate has wrong dimension")
    coeffs = phi.coeffs if isinstance(phi, CoeffVector) else np.asarray(phi)
    phase = np.exp(1j * float(decomp.omega @ t))
    return phase * (pi_omega_matrix(decomp, bases, x, y) @ coeffs)


@dataclass(frozen=True)
class Step2WeylMatrix:
    """Weyl matrix over the adapted product basis, tagged with omega data."""

    matrix: NDArray[np.complex128]
    omega: NDArray[np.float64]
    d: NDArray[np.float64]
    truncation_residual: float = 0.0

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def adjoint(self) -> "Step2WeylMatrix":
        return replace(self, matrix=self.matrix.conj().T)

    def compose(self, other: "Step2WeylMatrix") -> "Step2WeylMatrix":
        return replace(self, matrix=self.matrix @ other.matrix)


def weyl_omega(decomp: SymplecticDecomp, bases, h: GridFunction) -> Step2WeylMatrix:
    """W_omega(h) = int_b h(v) pi_omega(v) dv on an adapted-coordinate grid."""
    grid = h.grid
    if grid.n != decomp.num_pairs:
        raise ValueError("grid pair count does not match the decomposition")
    tail = h.tail_fraction()
    if tail > 1e-8:
        raise ValueError(f"integrand leaks mass {tail:.3e} outside 0.9*L")
    tabs = [_tables_for(b, grid) for b in bases]
    if grid.n == 1:
        mat = kern.weyl_pair(tabs[0], h.values, grid.cell_weight)
    else:
        mat = kern.weyl_pair2(tabs[0], tabs[1], h.values, grid.cell_weight)
    return Step2WeylMatrix(mat, decomp.omega, decomp.d, truncation_residual=tail)


def twisted_convolution_omega(decomp: SymplecticDecomp, f: GridFunction,
                              g: GridFunction, method: str = "fast") -> GridFunction:
    """omega-twisted convolution in adapted coordinates.

    The phase is the adapted-frame bilinear pairing derived from the
    structure constants (block form validated to 1e-10 by the
    decomposition), oriented so that
    W_omega(f *_omega g) = W_omega(f) W_omega(g).
    """
    _check_conv_inputs(f, g)
    if method == "reference":
        vals = _twisted_conv_direct(tuple(float(v) for v in decomp.d), f, g)
    elif method == "fast":
        if f.grid.n != 1:
            raise ValueError("fast path supports one pair; use method='reference'")
        vals = _twisted_conv_shift(float(decomp.d[0]), f, g)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GridFunction(f.grid, vals)


def inversion(decomp: SymplecticDecomp, bases, what: Step2WeylMatrix, x, y) -> complex:
    """Trace inversion at one adapted point:
    h(v) = (2 pi)^(-n) p(omega) tr(pi_omega(v)^* W)."""
    p_mat = pi_omega_matrix(decomp, bases, x, y)
    scale = decomp.p_omega / (2.0 * np.pi) ** decomp.num_pairs
    return complex(scale * np.vdot(p_mat, what.matrix))


def inversion_grid(decomp: SymplecticDecomp, bases, what: Step2WeylMatrix,
                   grid: GridCn) -> GridFunction:
    """Trace inversion sampled on a whole adapted-coordinate grid."""
    if grid.n != decomp.num_pairs:
        raise ValueError("grid pair count does not match the decomposition")
    tabs = [_tables_for(b, grid) for b in bases]
    if grid.n == 1:
        vals = kern.inverse_pair(tabs[0], what.matrix)
    else:
        vals = kern.inverse_pair2(tabs[0], tabs[1], what.matrix)
    scale = decomp.p_omega / (2.0 * np.pi) ** decomp.num_pairs
    return GridFunction(grid, scale * vals)


def synthesize_band_limited(decomp: SymplecticDecomp, bases, coeff: NDArray,
                            grid: GridCn) -> GridFunction:
    """h = sum coeff[a, b] conj(T_ab), T_ab(v) = <pi_omega(v) phi_a, phi_b>.

    The matrix-element functions T_ab are orthogonal with norm-square
    c(omega) = (2 pi)^n / p(omega), so W_omega(h) places
    c(omega) * coeff entrywise.
    """
    coeff = np.asarray(coeff, dtype=np.complex128)
    tabs = [_tables_for(b, grid) for b in bases]
    if grid.n == 1:
        vals = kern.synth_pair(tabs[0], coeff, conjugate_kernel=True)
    else:
        vals = kern.synth_pair2(tabs[0], tabs[1], coeff, conjugate_kernel=True)
    return GridFunction(grid, vals)


def fourier_wigner_omega(decomp: SymplecticDecomp, bases, phi: NDArray, psi: NDArray,
                         grid: GridCn) -> GridFunction:
    """T(phi, psi)(v) = <pi_omega(v) phi, psi> for coefficient vectors."""
    coeff = np.outer(np.asarray(phi, dtype=np.complex128),
                     np.conj(np.asarray(psi, dtype=np.complex128)))
    tabs = [_tables_for(b, grid) for b in bases]
    if grid.n == 1:
        vals = kern.synth_pair(tabs[0], coeff)
    else:
        vals = kern.synth_pair2(tabs[0], tabs[1], coeff)
    return GridFunction(grid, vals)
