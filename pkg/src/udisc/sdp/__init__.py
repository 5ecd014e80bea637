"""Dense Hermitian semidefinite programming."""
from .expr import Affine, block, from_coords, hermitian_basis, inner, kron, to_coords, trace
from .problem import (
    Infeasible,
    MaxIters,
    SdpProblem,
    SdpSolution,
    SolverError,
    Unbounded,
    derealify,
    kron_scalar,
    realify,
    slater_check,
    solve,
)

__all__ = [
    "Affine",
    "Infeasible",
    "MaxIters",
    "SdpProblem",
    "SdpSolution",
    "SolverError",
    "Unbounded",
    "block",
    "derealify",
    "from_coords",
    "hermitian_basis",
    "inner",
    "kron",
    "kron_scalar",
    "realify",
    "slater_check",
    "solve",
    "to_coords",
    "trace",
]
