"""
Decoherence of a bipartite system coupled to a finite bath.

H = alpha_s H_s x 1_b + alpha_sb H_sb with GUE-random H_s and H_sb, exact
unitary evolution U = exp(iHt) of system x bath, bath tracing, and the time
series of the qpa concurrence and the von Neumann entropy of the system.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional, Union

import numpy as np

from .concurrence import qp_concurrence
from .config import QPCError
from .linops import (
    ComplexMatrix,
    DimensionError,
    SpectralPropagator,
    check_hermitian,
    kron,
)
from .states import (
    DensityMatrix,
    PureState,
    partial_trace_over_2,
    purity,
    random_pure_state,
    von_neumann_entropy,
)

logger = logging.getLogger(__name__)


class SimConfigError(QPCError):
    """Invalid simulation configuration"""
    pass


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one decoherence run."""

    d1: int = 3
    d2: int = 5
    d_bath: int = 8
    alpha_s: float = 0.2
    alpha_sb: float = 0.02
    t_start: float = 0.0
    t_end: float = 30.0
    t_steps: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("d1", "d2", "d_bath", "t_steps"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise SimConfigError(f"'{name}' must be an integer >= 1, received {value!r}")
        for name in ("alpha_s", "alpha_sb", "t_start", "t_end"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise SimConfigError(f"'{name}' must be a finite number, received {value!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise SimConfigError(f"'seed' must be a non-negative integer, received {self.seed!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        if not isinstance(data, dict):
            raise SimConfigError("Simulation config must be an object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SimConfigError(f"Unknown simulation config keys: {', '.join(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.t_steps)


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    c_qp: float
    entropy: float
    purity: float
    dominant_weight: float
    separable_dominant: bool = False
    dominant_degenerate: bool = False


@dataclass(frozen=True)
class SimModel:
    """Random draws of one run: initial system state and the two Hamiltonians."""

    initial_state: PureState
    h_system: ComplexMatrix = field(repr=False)
    h_coupling: ComplexMatrix = field(repr=False)


def random_hermitian(d: int, rng: np.random.Generator) -> ComplexMatrix:
    """GUE draw: real N(0, 1) diagonal, off-diagonal real and imaginary parts N(0, 1/2)."""
    if d < 1:
        raise DimensionError(f"Dimension must be at least 1, received {d}")
    gaussian = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / 2.0
    return gaussian + gaussian.conj().T


def total_hamiltonian(h_system, h_coupling, alpha_s: float, alpha_sb: float) -> ComplexMatrix:
    """alpha_s H_s x 1_b + alpha_sb H_sb; the bath dimension is inferred from H_sb."""
    system = check_hermitian(h_system, name="H_s")
    coupling = check_hermitian(h_coupling, name="H_sb")
    d_system, d_total = system.shape[0], coupling.shape[0]
    if d_total % d_system != 0:
        raise DimensionError(f"H_sb size {d_total} is not a multiple of H_s size {d_system}")
    d_bath = d_total // d_system
    return alpha_s * kron(system, np.eye(d_bath)) + alpha_sb * coupling


def initial_total_state(psi_system: PureState, d_bath: int) -> DensityMatrix:
    """|psi_s><psi_s| x 1/d_bath, as a (system, bath) bipartite state."""
    d_system = psi_system.d1 * psi_system.d2
    matrix = kron(psi_system.projector(), np.eye(d_bath) / d_bath)
    return DensityMatrix(d_system, d_bath, matrix)


def _propagator(hamiltonian: Union[ComplexMatrix, SpectralPropagator]) -> SpectralPropagator:
    if isinstance(hamiltonian, SpectralPropagator):
        return hamiltonian
    return SpectralPropagator.from_hermitian(hamiltonian)


def evolve_total(
    rho_total: DensityMatrix, hamiltonian: Union[ComplexMatrix, SpectralPropagator], t: float
) -> ComplexMatrix:
    """U rho U^dagger with U = exp(iHt)."""
    propagator = _propagator(hamiltonian)
    if propagator.dimension != rho_total.dimension:
        raise DimensionError(f"Hamiltonian size {propagator.dimension} does not match state size {rho_total.dimension}")
    unitary = propagator.unitary(t)
    return unitary @ rho_total.matrix @ unitary.conj().T


def evolve_reduced(
    rho_total: DensityMatrix,
    hamiltonian: Union[ComplexMatrix, SpectralPropagator],
    t: float,
    d1: int,
    d2: int,
) -> DensityMatrix:
    """Tr_bath(U rho U^dagger) as a d1 x d2 system state.

    ``hamiltonian`` may be a SpectralPropagator so that H is diagonalized once per run.
    """
    if rho_total.d1 != d1 * d2:
        raise DimensionError(f"System dimension {rho_total.d1} does not match d1*d2 = {d1 * d2}")
    evolved = evolve_total(rho_total, hamiltonian, t)
    return DensityMatrix(d1, d2, partial_trace_over_2(evolved, rho_total.d1, rho_total.d2))


def draw_model(config: SimConfig, initial_state: Optional[PureState] = None) -> SimModel:
    """Draws, in order, the initial state (unless given), H_s and H_sb from ``config.seed``."""
    rng = np.random.default_rng(config.seed)
    d_system = config.d1 * config.d2
    if initial_state is None:
        initial_state = PureState(config.d1, config.d2, random_pure_state(d_system, rng))
    elif (initial_state.d1, initial_state.d2) != (config.d1, config.d2):
        raise SimConfigError(
            f"Initial state is {initial_state.d1} x {initial_state.d2}, config expects {config.d1} x {config.d2}"
        )
    h_system = random_hermitian(d_system, rng)
    h_coupling = random_hermitian(d_system * config.d_bath, rng)
    return SimModel(initial_state=initial_state, h_system=h_system, h_coupling=h_coupling)


def run_trajectory(
    config: SimConfig, initial_state: Optional[PureState] = None, jobs: int = 1
) -> List[TrajectoryPoint]:
    """qpa concurrence, entropy and purity of the system state on the config's time grid.

    H is diagonalized once; every grid point only rephases the eigenbasis.
    Points are returned in grid order whatever ``jobs`` is.
    """
    model = draw_model(config, initial_state)
    hamiltonian = total_hamiltonian(model.h_system, model.h_coupling, config.alpha_s, config.alpha_sb)
    propagator = SpectralPropagator.from_hermitian(hamiltonian)
    rho_total = initial_total_state(model.initial_state, config.d_bath)

    logger.info(
        f"Trajectory: {config.d1}x{config.d2} system, bath {config.d_bath}, "
        f"{config.t_steps} points in [{config.t_start}, {config.t_end}], seed {config.seed}"
    )

    def point(t: float) -> TrajectoryPoint:
        reduced = evolve_reduced(rho_total, propagator, float(t), config.d1, config.d2)
        qpa = qp_concurrence(reduced)
        return TrajectoryPoint(
            t=float(t),
            c_qp=qpa.value,
            entropy=von_neumann_entropy(reduced),
            purity=purity(reduced),
            dominant_weight=qpa.dominant_weight,
            separable_dominant=qpa.separable_dominant,
            dominant_degenerate=qpa.dominant_degenerate,
        )

    times = config.times()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            points = list(executor.map(point, times))
    else:
        points = [point(t) for t in times]

    logger.info(f"Trajectory finished: final entropy {points[-1].entropy:.6f}, final c_qp {points[-1].c_qp:.6f}")
    return points
