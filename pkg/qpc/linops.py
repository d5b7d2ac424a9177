"""
Dense complex linear-algebra kernels.
Hermitian eigendecomposition, singular values of complex symmetric matrices,
unitary propagators of hermitian generators and Kronecker products.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .config import QPCError, Tolerances, resolve

ComplexMatrix = npt.NDArray[np.complex128]
RealVector = npt.NDArray[np.float64]

# Rounding used to compare eigenvector entries when breaking ties
_TIE_BREAK_DECIMALS = 10


class LinalgError(QPCError):
    """Base exception for rejected linear-algebra inputs"""
    pass


class DimensionError(LinalgError):
    """Operand shapes do not match the operation"""
    pass


class NonFiniteError(LinalgError):
    """Operand contains NaN or Inf entries"""
    pass


class NotHermitianError(LinalgError):
    """Matrix deviates from its adjoint beyond tolerance"""

    def __init__(self, violation: float, tolerance: float):
        self.violation = violation
        self.tolerance = tolerance
        super().__init__(f"Matrix is not hermitian: max |M - M^dagger| = {violation:.3e} > {tolerance:.1e}")


class NotSymmetricError(LinalgError):
    """Matrix deviates from its transpose beyond tolerance"""

    def __init__(self, violation: float, tolerance: float):
        self.violation = violation
        self.tolerance = tolerance
        super().__init__(f"Matrix is not symmetric: max |M - M^T| = {violation:.3e} > {tolerance:.1e}")


class NotLeftUnitaryError(LinalgError):
    """V^dagger V deviates from the identity beyond tolerance"""

    def __init__(self, violation: float, tolerance: float):
        self.violation = violation
        self.tolerance = tolerance
        super().__init__(f"Matrix is not left-unitary: max |V^dagger V - 1| = {violation:.3e} > {tolerance:.1e}")


def as_complex_matrix(matrix, name: str = "matrix") -> ComplexMatrix:
    """Converts input to a finite 2-D complex array."""
    array = np.asarray(matrix, dtype=np.complex128)
    if array.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, received shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return array


def as_square_matrix(matrix, name: str = "matrix") -> ComplexMatrix:
    array = as_complex_matrix(matrix, name)
    if array.shape[0] != array.shape[1]:
        raise DimensionError(f"{name} must be square, received shape {array.shape}")
    return array


def hermiticity_violation(matrix: ComplexMatrix) -> float:
    """Entrywise max |M - M^dagger|."""
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def symmetry_violation(matrix: ComplexMatrix) -> float:
    """Entrywise max |M - M^T|."""
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(matrix - matrix.T)))


def left_unitarity_violation(matrix: ComplexMatrix) -> float:
    """Entrywise max |V^dagger V - 1|."""
    gram = matrix.conj().T @ matrix
    return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


def check_hermitian(matrix, tol: Optional[Tolerances] = None, name: str = "matrix") -> ComplexMatrix:
    """Returns the matrix as a complex array or raises NotHermitianError."""
    tol = resolve(tol)
    array = as_square_matrix(matrix, name)
    violation = hermiticity_violation(array)
    if violation > tol.hermitian:
        raise NotHermitianError(violation, tol.hermitian)
    return array


def check_left_unitary(matrix, tol: Optional[Tolerances] = None, name: str = "V") -> ComplexMatrix:
    """Returns V as a complex array or raises NotLeftUnitaryError."""
    tol = resolve(tol)
    array = as_complex_matrix(matrix, name)
    if array.shape[0] < array.shape[1]:
        raise DimensionError(f"{name} must have at least as many rows as columns, received shape {array.shape}")
    violation = left_unitarity_violation(array)
    if violation > tol.left_unitary:
        raise NotLeftUnitaryError(violation, tol.left_unitary)
    return array


def fix_phase(vector: np.ndarray) -> np.ndarray:
    """Rotates a vector so that its first non-negligible entry is real positive."""
    magnitudes = np.abs(vector)
    if magnitudes.size == 0 or magnitudes.max() == 0.0:
        return vector
    first = int(np.argmax(magnitudes > 1e-8 * magnitudes.max()))
    return vector * (np.conj(vector[first]) / magnitudes[first])


def _tie_break_key(vector: np.ndarray) -> Tuple[float, ...]:
    pairs = np.column_stack([vector.real, vector.imag]).ravel()
    return tuple(np.round(pairs, _TIE_BREAK_DECIMALS).tolist())


def hermitian_eigendecomposition(
    matrix, tol: Optional[Tolerances] = None
) -> Tuple[RealVector, ComplexMatrix]:
    """Eigendecomposition of a hermitian matrix with a reproducible ordering.

    Eigenvalues are returned in descending order. Every eigenvector is
    phase-fixed (first non-negligible entry real positive); within a cluster of
    eigenvalues closer than ``tol.degeneracy`` the vectors are ordered
    lexicographically by their entries, largest first.

    Args:
        matrix: Hermitian n x n matrix
        tol: Tolerance record (active defaults when omitted)

    Returns:
        tuple: (values, vectors) with ``vectors[:, i]`` the eigenvector of ``values[i]``

    Raises:
        NotHermitianError: If max |M - M^dagger| exceeds ``tol.hermitian``
    """
    tol = resolve(tol)
    array = check_hermitian(matrix, tol)
    n = array.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=np.complex128)

    values, vectors = scipy.linalg.eigh(0.5 * (array + array.conj().T))
    values = values[::-1].copy()
    vectors = np.column_stack([fix_phase(vectors[:, i]) for i in range(n - 1, -1, -1)])

    order = list(range(n))
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and values[stop - 1] - values[stop] <= tol.degeneracy:
            stop += 1
        if stop - start > 1:
            cluster = sorted(range(start, stop), key=lambda i: _tie_break_key(vectors[:, i]), reverse=True)
            order[start:stop] = cluster
        start = stop

    return values[order], vectors[:, order]


def symmetric_singular_values(tau, tol: Optional[Tolerances] = None) -> RealVector:
    """Singular values of a complex symmetric matrix, descending.

    The values are the square roots of the eigenvalues of tau tau^dagger.

    Raises:
        NotSymmetricError: If max |tau - tau^T| exceeds ``tol.symmetric``
    """
    tol = resolve(tol)
    array = as_square_matrix(tau, "tau")
    violation = symmetry_violation(array)
    if violation > tol.symmetric:
        raise NotSymmetricError(violation, tol.symmetric)
    if array.size == 0:
        return np.zeros(0)
    return scipy.linalg.svdvals(array)


@dataclass(frozen=True)
class SpectralPropagator:
    """exp(iHt) from a single eigendecomposition of H, rephased per time."""

    energies: RealVector
    basis: ComplexMatrix

    @classmethod
    def from_hermitian(cls, hamiltonian, tol: Optional[Tolerances] = None) -> "SpectralPropagator":
        energies, basis = hermitian_eigendecomposition(hamiltonian, tol)
        return cls(energies=energies, basis=basis)

    @property
    def dimension(self) -> int:
        return int(self.energies.shape[0])

    def phases(self, t: float) -> np.ndarray:
        return np.exp(1j * self.energies * t)

    def unitary(self, t: float) -> ComplexMatrix:
        """U(t) = W diag(exp(i e_j t)) W^dagger."""
        return (self.basis * self.phases(t)) @ self.basis.conj().T


def matrix_exponential_unitary(hamiltonian, t: float, tol: Optional[Tolerances] = None) -> ComplexMatrix:
    """Returns exp(iHt) for hermitian H, computed from the eigendecomposition of H."""
    return SpectralPropagator.from_hermitian(hamiltonian, tol).unitary(t)


def kron(a, b) -> ComplexMatrix:
    """Kronecker product, (A x B)[i*rB + k, j*cB + l] = A[i, j] B[k, l]."""
    return np.kron(as_complex_matrix(a, "A"), as_complex_matrix(b, "B"))
