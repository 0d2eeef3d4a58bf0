"""singtrace: strict singular characteristics of 2D Hamilton-Jacobi equations.

Given a semiconcave solution of H(x, Du, u) = 0 represented as a minimum of
smooth branches, the library computes superdifferentials, the minimizing
gradient selection and its velocity field, and traces the singular curve
whose right derivative follows that field, with verification reports for
every claimed property.
"""

from ._kernels import BACKEND as kernel_backend
from .geometry2d import ConvexPolytope2, Face
from .hamiltonian import Hamiltonian, Selection
from .semiconcave import (
    AffineBranch,
    ConeBranch,
    Domain,
    MinFunction,
    NormalizedProblem,
    QuadraticBranch,
)

__version__ = "0.1.0"

__all__ = [
    "ConvexPolytope2",
    "Face",
    "Hamiltonian",
    "Selection",
    "MinFunction",
    "NormalizedProblem",
    "Domain",
    "QuadraticBranch",
    "ConeBranch",
    "AffineBranch",
    "kernel_backend",
    "__version__",
]
