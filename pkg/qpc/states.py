"""
Bipartite states: density matrices, partial traces and transposes, entropy,
state families (Bell, Werner, Horodecki) and the exact two-qubit concurrence.

Composite index convention: i = i1 * d2 + i2 (subsystem 1 major).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .config import QPCError, Tolerances, resolve
from .linops import (
    ComplexMatrix,
    DimensionError,
    NonFiniteError,
    as_square_matrix,
    hermitian_eigendecomposition,
    hermiticity_violation,
    kron,
)

_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])


class InvalidStateError(QPCError):
    """A density matrix or pure state violates one of its invariants"""

    def __init__(self, invariant: str, message: str, violation: Optional[float] = None):
        self.invariant = invariant
        self.violation = violation
        super().__init__(message)


def _check_dimensions(d1: int, d2: int) -> None:
    if int(d1) != d1 or int(d2) != d2 or d1 < 1 or d2 < 1:
        raise InvalidStateError("dimensions", f"Subsystem dimensions must be positive integers, received ({d1}, {d2})")


def validate_density_matrix(matrix, d1: int, d2: int, tol: Optional[Tolerances] = None) -> ComplexMatrix:
    """Validates hermiticity, unit trace and positivity of a bipartite state.

    Returns:
        ComplexMatrix: The matrix as a complex array

    Raises:
        InvalidStateError: Naming the violated invariant
    """
    tol = resolve(tol)
    _check_dimensions(d1, d2)
    try:
        array = as_square_matrix(matrix, "density matrix")
    except NonFiniteError as e:
        raise InvalidStateError("finite", str(e))
    except DimensionError as e:
        raise InvalidStateError("dimensions", str(e))

    if array.shape[0] != d1 * d2:
        raise InvalidStateError(
            "dimensions",
            f"Density matrix has size {array.shape[0]}, expected d1*d2 = {d1 * d2}",
        )

    violation = hermiticity_violation(array)
    if violation > tol.hermitian:
        raise InvalidStateError("hermitian", f"Density matrix is not hermitian: max |M - M^dagger| = {violation:.3e}", violation)

    trace_error = abs(np.trace(array) - 1.0)
    if trace_error > tol.trace:
        raise InvalidStateError("trace", f"Density matrix trace differs from 1 by {trace_error:.3e}", trace_error)

    smallest = float(scipy.linalg.eigvalsh(0.5 * (array + array.conj().T))[0])
    if smallest < -tol.psd:
        raise InvalidStateError("psd", f"Density matrix has negative eigenvalue {smallest:.3e}", -smallest)

    return array


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state on H1 x H2, validated on construction."""

    d1: int
    d2: int
    matrix: ComplexMatrix = field(repr=False)
    tol: Optional[Tolerances] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", validate_density_matrix(self.matrix, self.d1, self.d2, self.tol).copy())

    @property
    def dimension(self) -> int:
        return self.d1 * self.d2

    @classmethod
    def from_pure(cls, amplitudes, d1: int, d2: int, tol: Optional[Tolerances] = None) -> "DensityMatrix":
        state = PureState(d1, d2, amplitudes, tol)
        return cls(d1, d2, state.projector(), tol)


@dataclass(frozen=True)
class PureState:
    """Normalized vector on H1 x H2."""

    d1: int
    d2: int
    amplitudes: np.ndarray = field(repr=False)
    tol: Optional[Tolerances] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        _check_dimensions(self.d1, self.d2)
        vector = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if vector.shape[0] != self.d1 * self.d2:
            raise InvalidStateError("dimensions", f"Pure state has {vector.shape[0]} amplitudes, expected {self.d1 * self.d2}")
        if not np.all(np.isfinite(vector)):
            raise InvalidStateError("finite", "Pure state contains NaN or Inf amplitudes")
        norm_error = abs(np.linalg.norm(vector) - 1.0)
        if norm_error > resolve(self.tol).norm:
            raise InvalidStateError("norm", f"Pure state norm differs from 1 by {norm_error:.3e}", norm_error)
        object.__setattr__(self, "amplitudes", vector.copy())

    def projector(self) -> ComplexMatrix:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(self.d1, self.d2, self.projector(), self.tol)


def _as_bipartite_operator(matrix, d1: int, d2: int) -> np.ndarray:
    array = as_square_matrix(matrix, "operator")
    if array.shape[0] != d1 * d2:
        raise DimensionError(f"Operator has size {array.shape[0]}, expected d1*d2 = {d1 * d2}")
    return array.reshape(d1, d2, d1, d2)


def partial_trace_over_2(matrix, d1: int, d2: int) -> ComplexMatrix:
    """Tr_2 X, result[a, b] = sum_c X[a*d2 + c, b*d2 + c]. X need not be hermitian."""
    return np.einsum("acbc->ab", _as_bipartite_operator(matrix, d1, d2))


def partial_trace_over_1(matrix, d1: int, d2: int) -> ComplexMatrix:
    """Tr_1 X, result[c, e] = sum_a X[a*d2 + c, a*d2 + e]."""
    return np.einsum("acae->ce", _as_bipartite_operator(matrix, d1, d2))


def partial_transpose(matrix, d1: int, d2: int, subsystem: int = 2) -> ComplexMatrix:
    """Transpose of one tensor factor."""
    blocks = _as_bipartite_operator(matrix, d1, d2)
    if subsystem == 2:
        swapped = blocks.transpose(0, 3, 2, 1)
    elif subsystem == 1:
        swapped = blocks.transpose(2, 1, 0, 3)
    else:
        raise DimensionError(f"subsystem must be 1 or 2, received {subsystem}")
    return swapped.reshape(d1 * d2, d1 * d2)


def min_partial_transpose_eigenvalue(rho: DensityMatrix, subsystem: int = 2) -> float:
    pt = partial_transpose(rho.matrix, rho.d1, rho.d2, subsystem)
    return float(scipy.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0])


def purity(rho: DensityMatrix) -> float:
    """Tr rho^2."""
    return float(np.sum(np.abs(rho.matrix) ** 2))


def von_neumann_entropy(rho: DensityMatrix, tol: Optional[Tolerances] = None) -> float:
    """S = -sum mu ln mu over eigenvalues above the cutoff, in nats."""
    tol = resolve(tol)
    eigenvalues = scipy.linalg.eigvalsh(0.5 * (rho.matrix + rho.matrix.conj().T))
    eigenvalues = eigenvalues[eigenvalues > tol.entropy_cutoff]
    return max(0.0, float(-np.sum(eigenvalues * np.log(eigenvalues))))


def basis_vector(index: int, d: int) -> np.ndarray:
    vector = np.zeros(d, dtype=np.complex128)
    vector[index] = 1.0
    return vector


def product_state(a: int, b: int, d1: int, d2: int) -> PureState:
    """|a> x |b>."""
    return PureState(d1, d2, np.kron(basis_vector(a, d1), basis_vector(b, d2)))


def bell_state(d: int = 2) -> PureState:
    """Maximally entangled (1/sqrt d) sum_i |ii>."""
    amplitudes = sum(np.kron(basis_vector(i, d), basis_vector(i, d)) for i in range(d)) / np.sqrt(d)
    return PureState(d, d, amplitudes)


def werner_state(p: float) -> DensityMatrix:
    """p |Bell><Bell| + (1 - p) 1/4 on two qubits."""
    if not 0.0 <= p <= 1.0:
        raise InvalidStateError("parameter", f"Werner parameter p must lie in [0, 1], received {p}")
    return DensityMatrix(2, 2, p * bell_state(2).projector() + (1.0 - p) * np.eye(4) / 4.0)


def horodecki_state(a: float) -> DensityMatrix:
    """3 x 3 bound entangled family with beta = (1+a)/2, gamma = sqrt(1-a^2)/2."""
    if not 0.0 <= a <= 1.0:
        raise InvalidStateError("parameter", f"Horodecki parameter a must lie in [0, 1], received {a}")

    beta = (1.0 + a) / 2.0
    gamma = np.sqrt(1.0 - a * a) / 2.0

    matrix = np.diag([a, a, a, a, a, a, beta, a, beta]).astype(np.complex128)
    for i, j in [(0, 4), (0, 8), (4, 8)]:
        matrix[i, j] = matrix[j, i] = a
    matrix[6, 8] = matrix[8, 6] = gamma

    return DensityMatrix(3, 3, matrix / (1.0 + 8.0 * a))


def wootters_concurrence_2qubit(rho: DensityMatrix, tol: Optional[Tolerances] = None) -> float:
    """Exact two-qubit concurrence max(0, l1 - l2 - l3 - l4).

    The l_i are the singular values of W^T (sigma_y x sigma_y) W, with W the
    eigenvectors of rho above the spectral cutoff scaled by sqrt(mu). They equal
    the square roots of the eigenvalues of rho (sigma_y x sigma_y) rho^* (sigma_y x sigma_y).
    """
    tol = resolve(tol)
    if (rho.d1, rho.d2) != (2, 2):
        raise DimensionError(f"Wootters concurrence requires a 2 x 2 state, received {rho.d1} x {rho.d2}")

    values, vectors = hermitian_eigendecomposition(rho.matrix, tol)
    keep = values > tol.spectral_cutoff
    weighted = vectors[:, keep] * np.sqrt(values[keep])
    lambdas = scipy.linalg.svdvals(weighted.T @ kron(_SIGMA_Y, _SIGMA_Y) @ weighted)
    if lambdas.size == 0:
        return 0.0
    return float(min(1.0, max(0.0, lambdas[0] - lambdas[1:].sum())))


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector: complex Gaussian entries, normalized."""
    if d < 1:
        raise DimensionError(f"Dimension must be at least 1, received {d}")
    vector = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return vector / np.linalg.norm(vector)


def random_mixed_state(d1: int, d2: int, rank: int, rng: np.random.Generator) -> DensityMatrix:
    """Mixture of ``rank`` Haar pure states with Dirichlet(1, ..., 1) weights."""
    if rank < 1:
        raise DimensionError(f"Rank must be at least 1, received {rank}")
    weights = rng.dirichlet(np.ones(rank))
    matrix = np.zeros((d1 * d2, d1 * d2), dtype=np.complex128)
    for weight in weights:
        vector = random_pure_state(d1 * d2, rng)
        matrix += weight * np.outer(vector, vector.conj())
    matrix = 0.5 * (matrix + matrix.conj().T)
    return DensityMatrix(d1, d2, matrix / np.trace(matrix).real)
