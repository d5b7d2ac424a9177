"""
Concurrence of bipartite states in the quasi-pure approximation (qpa).

Pure-state concurrence, the rank-4 tensor A built from the spectral
decomposition of rho, the symmetric matrix tau and its closed-form bound,
the left-unitary parametrization of ensembles, and a brute-force convex-roof
search used as an independent upper estimate.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from .config import QPCError, Tolerances, resolve
from .linops import (
    ComplexMatrix,
    DimensionError,
    RealVector,
    as_complex_matrix,
    check_left_unitary,
    hermitian_eigendecomposition,
    symmetric_singular_values,
)
from .states import DensityMatrix, purity

logger = logging.getLogger(__name__)

SeedLike = Union[np.random.Generator, int, None]


class SeparableDominant(QPCError):
    """The dominant eigenvector is separable (A_11^11 below threshold)"""

    def __init__(self, a11: float, threshold: float):
        self.a11 = a11
        self.threshold = threshold
        super().__init__(f"Dominant eigenvector is separable: A_11^11 = {a11:.3e} < {threshold:.1e}")


class WeightNormError(QPCError):
    """Weight vector z does not satisfy sum |z|^2 = 1"""
    pass


@dataclass(frozen=True)
class SpectralEnsemble:
    """Eigenvalues mu (descending, above cutoff) and eigenvectors phi (rows) of rho."""

    d1: int
    d2: int
    mu: RealVector
    phi: ComplexMatrix = field(repr=False)
    truncated_weight: float = 0.0

    @property
    def n(self) -> int:
        return int(self.mu.shape[0])

    def weighted_vectors(self) -> ComplexMatrix:
        """Rows sqrt(mu_j) |Phi_j>."""
        return np.sqrt(self.mu)[:, None] * self.phi


@dataclass(frozen=True)
class ConcurrenceTensor:
    """A_jk^lm stored as ``a[j, k, l, m]``."""

    a: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return int(self.a.shape[0])

    def flattened(self) -> ComplexMatrix:
        """n^2 x n^2 matrix with row index (jk) and column index (lm)."""
        return self.a.reshape(self.n * self.n, self.n * self.n)

    def symmetry_violation(self) -> float:
        """Largest deviation from A_jk^lm = A_kj^ml = A_kj^lm."""
        a = self.a
        return float(max(
            np.max(np.abs(a - a.transpose(1, 0, 3, 2))),
            np.max(np.abs(a - a.transpose(1, 0, 2, 3))),
        ))


@dataclass(frozen=True)
class TauMatrix:
    tau: ComplexMatrix

    @property
    def n(self) -> int:
        return int(self.tau.shape[0])


@dataclass(frozen=True)
class QpaResult:
    value: float
    lambdas: RealVector
    dominant_weight: float
    separable_dominant: bool
    truncated_weight: float
    dominant_degenerate: bool = False
    rank: int = 0
    purity: float = 1.0


@dataclass(frozen=True)
class PureDecomposition:
    """Subnormalized vectors sqrt(p_i)|Psi_i> stored as rows."""

    d1: int
    d2: int
    vectors: ComplexMatrix = field(repr=False)

    @property
    def weights(self) -> RealVector:
        return np.sum(np.abs(self.vectors) ** 2, axis=1)

    def density_matrix(self) -> ComplexMatrix:
        return self.vectors.T @ self.vectors.conj()

    def average_concurrence(self, tol: Optional[Tolerances] = None) -> float:
        """sum_i p_i c(Psi_i), evaluated as sum_i c(sqrt(p_i) Psi_i)."""
        return float(sum(pure_concurrence(v, self.d1, self.d2, tol) for v in self.vectors))


@dataclass(frozen=True)
class TauMembership:
    is_member: bool
    residual: float
    weights: np.ndarray = field(repr=False)
    weight_norm: float = 1.0


def _clamped_sqrt(value: float, tol: Tolerances) -> float:
    if value < -tol.radicand_clamp:
        logger.warning(f"Negative radicand {value:.3e} beyond clamp {tol.radicand_clamp:.1e}, clamped to 0")
    return float(np.sqrt(max(value, 0.0)))


def _as_amplitudes(psi, d1: int, d2: int) -> np.ndarray:
    vector = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if vector.shape[0] != d1 * d2:
        raise DimensionError(f"Vector has {vector.shape[0]} components, expected d1*d2 = {d1 * d2}")
    if not np.all(np.isfinite(vector)):
        raise DimensionError("Vector contains NaN or Inf entries")
    return vector


def pure_concurrence(psi, d1: int, d2: int, tol: Optional[Tolerances] = None) -> float:
    """c = sqrt(Tr P^2 - Tr rho_1^2 - Tr rho_2^2 + (Tr P)^2) with P = |Psi><Psi|.

    Valid for subnormalized vectors; c(sqrt(p) Psi) = p c(Psi).
    """
    tol = resolve(tol)
    block = _as_amplitudes(psi, d1, d2).reshape(d1, d2)
    trace_p = float(np.sum(np.abs(block) ** 2))
    rho_1 = block @ block.conj().T
    rho_2 = block.T @ block.conj()
    radicand = trace_p ** 2 - np.sum(np.abs(rho_1) ** 2) - np.sum(np.abs(rho_2) ** 2) + trace_p ** 2
    return _clamped_sqrt(float(radicand), tol)


def pure_concurrence_reduced(
    psi, d1: int, d2: int, reduced: int = 1, tol: Optional[Tolerances] = None
) -> float:
    """c = sqrt(2(<Psi|Psi>^2 - Tr rho_r^2)) using subsystem ``reduced`` (1 or 2)."""
    tol = resolve(tol)
    block = _as_amplitudes(psi, d1, d2).reshape(d1, d2)
    if reduced == 1:
        rho_r = block @ block.conj().T
    elif reduced == 2:
        rho_r = block.T @ block.conj()
    else:
        raise DimensionError(f"reduced must be 1 or 2, received {reduced}")
    norm_squared = float(np.sum(np.abs(block) ** 2))
    return _clamped_sqrt(2.0 * (norm_squared ** 2 - float(np.sum(np.abs(rho_r) ** 2))), tol)


def spectral_ensemble(
    rho: DensityMatrix, cutoff: Optional[float] = None, tol: Optional[Tolerances] = None
) -> SpectralEnsemble:
    """Eigenpairs of rho with mu > cutoff, descending; dropped weight is recorded, not renormalized."""
    tol = resolve(tol)
    cutoff = tol.spectral_cutoff if cutoff is None else cutoff
    values, vectors = hermitian_eigendecomposition(rho.matrix, tol)
    keep = values > cutoff
    truncated = float(np.sum(np.clip(values[~keep], 0.0, None)))
    return SpectralEnsemble(
        d1=rho.d1,
        d2=rho.d2,
        mu=values[keep].copy(),
        phi=vectors[:, keep].T.copy(),
        truncated_weight=truncated,
    )


def build_concurrence_tensor(ensemble: SpectralEnsemble) -> ConcurrenceTensor:
    """A_jk^lm = <psi_l psi_m|(1 - S_1)(1 - S_2)|psi_j psi_k> with psi_j = sqrt(mu_j) Phi_j.

    The four terms, in order: Tr(|j><l|k><m|), the Tr_1 of the Tr_2 products,
    the Tr_2 of the Tr_1 products, and Tr|j><l| Tr|k><m|.
    """
    psi = ensemble.weighted_vectors()
    blocks = psi.reshape(ensemble.n, ensemble.d1, ensemble.d2)
    gram = psi.conj() @ psi.T

    full_swap = np.einsum("lk,mj->jklm", gram, gram)
    identity = np.einsum("lj,mk->jklm", gram, gram)
    reduced_1 = np.einsum("jac,lbc->jlab", blocks, blocks.conj())
    reduced_2 = np.einsum("jac,lae->jlce", blocks, blocks.conj())
    swap_1 = np.einsum("jlab,kmba->jklm", reduced_1, reduced_1)
    swap_2 = np.einsum("jlce,kmec->jklm", reduced_2, reduced_2)

    return ConcurrenceTensor(a=full_swap - swap_1 - swap_2 + identity)


def build_tau(tensor: ConcurrenceTensor, tol: Optional[Tolerances] = None) -> TauMatrix:
    """tau_jk = A_jk^11 / sqrt(A_11^11).

    Raises:
        SeparableDominant: If A_11^11 is below ``tol.separable_dominant``
    """
    tol = resolve(tol)
    a11 = float(tensor.a[0, 0, 0, 0].real)
    if a11 < tol.separable_dominant:
        raise SeparableDominant(a11, tol.separable_dominant)
    tau = tensor.a[:, :, 0, 0] / np.sqrt(a11)
    return TauMatrix(tau=0.5 * (tau + tau.T))


def singular_value_bound(lambdas: RealVector) -> float:
    """max(l_1 - sum_{i>1} l_i, 0) for descending singular values."""
    if lambdas.size == 0:
        return 0.0
    return float(max(lambdas[0] - np.sum(lambdas[1:]), 0.0))


def qp_concurrence(rho: DensityMatrix, tol: Optional[Tolerances] = None) -> QpaResult:
    """Concurrence of rho in the quasi-pure approximation.

    Args:
        rho: Bipartite density matrix
        tol: Tolerance record (active defaults when omitted)

    Returns:
        QpaResult: value = max(l_1 - sum_{i>1} l_i, 0) over the singular values of tau,
        or 0 with ``separable_dominant`` set when the dominant eigenvector is separable
    """
    tol = resolve(tol)
    ensemble = spectral_ensemble(rho, tol=tol)
    degenerate = ensemble.n > 1 and ensemble.mu[0] - ensemble.mu[1] <= tol.degeneracy
    if degenerate:
        logger.warning(f"Dominant eigenvalue {ensemble.mu[0]:.6g} is degenerate; using tie-broken eigenvector")

    common = dict(
        dominant_weight=float(ensemble.mu[0]),
        truncated_weight=ensemble.truncated_weight,
        dominant_degenerate=bool(degenerate),
        rank=ensemble.n,
        purity=purity(rho),
    )

    try:
        tau = build_tau(build_concurrence_tensor(ensemble), tol)
    except SeparableDominant as e:
        logger.info(f"{e}; qpa set to 0")
        return QpaResult(value=0.0, lambdas=np.zeros(0), separable_dominant=True, **common)

    lambdas = symmetric_singular_values(tau.tau, tol)
    return QpaResult(value=singular_value_bound(lambdas), lambdas=lambdas, separable_dominant=False, **common)


def ensemble_from_left_unitary(
    ensemble: SpectralEnsemble, v, tol: Optional[Tolerances] = None
) -> PureDecomposition:
    """sqrt(p_i)|Psi_i> = sum_j V_ij sqrt(mu_j)|Phi_j> for left-unitary V (N x n, N >= n)."""
    matrix = check_left_unitary(v, tol)
    if matrix.shape[1] != ensemble.n:
        raise DimensionError(f"V has {matrix.shape[1]} columns, ensemble rank is {ensemble.n}")
    return PureDecomposition(ensemble.d1, ensemble.d2, matrix @ ensemble.weighted_vectors())


def _row_radicands(flat_tensor: ComplexMatrix, v: ComplexMatrix) -> np.ndarray:
    n = v.shape[1]
    pairs = (v[:, :, None] * v[:, None, :]).reshape(v.shape[0], n * n)
    return np.einsum("ip,pq,iq->i", pairs, flat_tensor, pairs.conj()).real


def _objective(flat_tensor: ComplexMatrix, v: ComplexMatrix) -> float:
    return float(np.sum(np.sqrt(np.clip(_row_radicands(flat_tensor, v), 0.0, None))))


def convex_roof_objective(tensor: ConcurrenceTensor, v, tol: Optional[Tolerances] = None) -> float:
    """sum_i sqrt(sum_jklm V_ij V_ik A_jk^lm V_il* V_im*): average concurrence of the ensemble V."""
    tol = resolve(tol)
    matrix = check_left_unitary(v, tol)
    if matrix.shape[1] != tensor.n:
        raise DimensionError(f"V has {matrix.shape[1]} columns, tensor rank is {tensor.n}")
    return float(sum(_clamped_sqrt(r, tol) for r in _row_radicands(tensor.flattened(), matrix)))


def haar_unitary(n: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random unitary from the QR decomposition of a complex Gaussian matrix."""
    gaussian = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(gaussian)
    diagonal = np.diagonal(r)
    return q * (diagonal / np.abs(diagonal))


def random_left_unitary(rows: int, cols: int, rng: np.random.Generator) -> ComplexMatrix:
    if rows < cols:
        raise DimensionError(f"Left-unitary matrix needs rows >= cols, received {rows} x {cols}")
    return haar_unitary(rows, rng)[:, :cols]


def near_identity_unitary(n: int, step: float, rng: np.random.Generator) -> ComplexMatrix:
    """Unitary close to the identity: Q of QR(1 + step * G), G complex Gaussian / sqrt(2n)."""
    gaussian = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0 * n)
    q, r = np.linalg.qr(np.eye(n) + step * gaussian)
    diagonal = np.diagonal(r)
    return q * (diagonal / np.abs(diagonal))


def _restart_seeds(rng: SeedLike, restarts: int) -> List[np.random.SeedSequence]:
    if isinstance(rng, np.random.Generator):
        root = np.random.SeedSequence(int(rng.integers(2 ** 63)))
    else:
        root = np.random.SeedSequence(rng)
    return root.spawn(restarts)


def _search_restart(
    flat_tensor: ComplexMatrix,
    start: ComplexMatrix,
    iterations: int,
    initial_step: float,
    final_step: float,
    step_decay: float,
    rng: np.random.Generator,
) -> float:
    v = start
    best = _objective(flat_tensor, v)
    for k in range(iterations):
        step = max(final_step, initial_step * step_decay ** k)
        candidate = near_identity_unitary(v.shape[0], step, rng) @ v
        value = _objective(flat_tensor, candidate)
        if value < best:
            v, best = candidate, value
    return best


def brute_force_convex_roof(
    rho: DensityMatrix,
    restarts: int = 64,
    iterations: int = 2000,
    rng: SeedLike = None,
    extra_states: int = 1,
    initial_step: float = 0.5,
    final_step: float = 1e-4,
    step_decay: float = 0.995,
    jobs: int = 1,
    tol: Optional[Tolerances] = None,
) -> float:
    """Upper estimate of the convex roof by random-restart local search over left-unitary V.

    Restart 0 starts from the eigen-ensemble, the others from Haar-random
    N x n isometries with N = n + ``extra_states``. Each restart applies
    near-identity unitaries with step max(final_step, initial_step * step_decay**k)
    and keeps a move only if it lowers the average concurrence. The schedule
    does not depend on ``iterations``, so a longer run extends a shorter one and
    the result never increases with the budget. Restart seeds are spawned
    from ``rng`` up front, so the result does not depend on ``jobs``.

    Returns:
        float: The smallest average concurrence found
    """
    if restarts < 1 or iterations < 0:
        raise ValueError(f"restarts must be >= 1 and iterations >= 0, received {restarts}, {iterations}")
    if not 0.0 < step_decay <= 1.0:
        raise ValueError(f"step_decay must lie in (0, 1], received {step_decay}")

    tol = resolve(tol)
    ensemble = spectral_ensemble(rho, tol=tol)
    flat_tensor = build_concurrence_tensor(ensemble).flattened()
    n = ensemble.n
    rows = n + max(0, extra_states)

    seeds = _restart_seeds(rng, restarts)

    def run(index: int) -> float:
        generator = np.random.default_rng(seeds[index])
        if index == 0:
            start = np.eye(rows, n, dtype=np.complex128)
        else:
            start = random_left_unitary(rows, n, generator)
        value = _search_restart(flat_tensor, start, iterations, initial_step, final_step, step_decay, generator)
        logger.debug(f"Restart {index}: {value:.10f}")
        return value

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            values = list(executor.map(run, range(restarts)))
    else:
        values = [run(i) for i in range(restarts)]

    best = float(min(values))
    logger.info(f"Convex-roof search: {restarts} restarts x {iterations} iterations, N = {rows}, best = {best:.10f}")
    return best


def decompose_tensor(tensor: ConcurrenceTensor, tol: Optional[Tolerances] = None) -> List[ComplexMatrix]:
    """Complex symmetric T^alpha with A_jk^lm = sum_alpha T^alpha_jk (T^alpha_lm)^*.

    Eigenvectors of the flattened tensor with eigenvalue above the cutoff,
    scaled by the square root of the eigenvalue and reshaped to n x n.
    """
    tol = resolve(tol)
    n = tensor.n
    values, vectors = hermitian_eigendecomposition(tensor.flattened(), tol)
    components = []
    for value, vector in zip(values, vectors.T):
        if value <= tol.decomposition_cutoff:
            break
        matrix = np.sqrt(value) * vector.reshape(n, n)
        components.append(0.5 * (matrix + matrix.T))
    return components


def verify_tau_membership(
    tensor: ConcurrenceTensor, tau: TauMatrix, tol: Optional[Tolerances] = None
) -> TauMembership:
    """Checks that tau = sum_alpha z_alpha T^alpha with z_alpha = (T^alpha_11)^* / sqrt(sum |T^beta_11|^2).

    Raises:
        SeparableDominant: If every T^alpha_11 vanishes
    """
    tol = resolve(tol)
    components = decompose_tensor(tensor, tol)
    corner = np.array([t[0, 0] for t in components], dtype=np.complex128)
    weight = float(np.sum(np.abs(corner) ** 2))
    if weight < tol.separable_dominant:
        raise SeparableDominant(weight, tol.separable_dominant)

    z = corner.conj() / np.sqrt(weight)
    combination = np.einsum("a,ajk->jk", z, np.array(components))
    residual = float(np.max(np.abs(combination - tau.tau)))
    return TauMembership(
        is_member=residual <= tol.membership,
        residual=residual,
        weights=z,
        weight_norm=float(np.sum(np.abs(z) ** 2)),
    )


def weighted_lower_bound(
    components: Sequence[ComplexMatrix], weights, tol: Optional[Tolerances] = None
) -> float:
    """Lower bound max(l_1 - sum_{i>1} l_i, 0) from sum_alpha z_alpha T^alpha with sum |z|^2 = 1."""
    tol = resolve(tol)
    z = np.asarray(weights, dtype=np.complex128).reshape(-1)
    if z.shape[0] != len(components):
        raise DimensionError(f"{z.shape[0]} weights for {len(components)} components")
    norm_error = abs(float(np.sum(np.abs(z) ** 2)) - 1.0)
    if norm_error > tol.norm:
        raise WeightNormError(f"Weights must satisfy sum |z|^2 = 1, off by {norm_error:.3e}")
    matrix = np.einsum("a,ajk->jk", z, np.array([as_complex_matrix(t, "T") for t in components]))
    return singular_value_bound(symmetric_singular_values(matrix, tol))
