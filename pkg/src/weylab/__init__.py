"""Numerical harmonic analysis on Heisenberg-type groups.

The package provides truncated scaled Hermite bases on the real line,
Schrodinger and metaplectic representation matrices, Weyl transforms and
twisted convolutions on C^n, on the semidirect product C^n x U(1), and on
step-two nilpotent Lie algebras given by structure constants.  Every
operator identity (Plancherel, adjoint and product laws, Fourier-Wigner
orthogonality, trace inversion) is exposed through verification suites
that emit machine-checkable reports; see :mod:`weylab.suites` and the
``weylab`` command line tool.
"""

__version__ = "0.1.0"

from .hermite import CoeffVector, HermiteBasis, TruncationError
from .heisenberg import GridCn, GridFunction, WeylMatrix
from .motion import CharacterIndex, GridGx, MotionWeylMatrix
from .step2 import StepTwoAlgebra, SymplecticDecomp

__all__ = [
    "CharacterIndex",
    "CoeffVector",
    "GridCn",
    "GridFunction",
    "GridGx",
    "HermiteBasis",
    "MotionWeylMatrix",
    "StepTwoAlgebra",
    "SymplecticDecomp",
    "TruncationError",
    "WeylMatrix",
    "__version__",
]
