"""
qpc - concurrence in the quasi-pure approximation

Computes a closed-form lower bound of the concurrence of bipartite mixed
states, checks it against exact and brute-force convex-roof estimates, and
drives the Horodecki sweep and decoherence trajectories from the command line.
"""

__version__ = "0.1.0"

from .config import QPCError, Tolerances, get_tolerances
from .states import (
    DensityMatrix,
    PureState,
    horodecki_state,
    werner_state,
    von_neumann_entropy,
    wootters_concurrence_2qubit,
)
from .concurrence import (
    brute_force_convex_roof,
    build_concurrence_tensor,
    build_tau,
    decompose_tensor,
    pure_concurrence,
    pure_concurrence_reduced,
    qp_concurrence,
    spectral_ensemble,
    verify_tau_membership,
)
from .dynamics import SimConfig, run_trajectory
from .statefile import read_state_file, write_state_file

__all__ = [
    "QPCError",
    "Tolerances",
    "get_tolerances",
    "DensityMatrix",
    "PureState",
    "horodecki_state",
    "werner_state",
    "von_neumann_entropy",
    "wootters_concurrence_2qubit",
    "brute_force_convex_roof",
    "build_concurrence_tensor",
    "build_tau",
    "decompose_tensor",
    "pure_concurrence",
    "pure_concurrence_reduced",
    "qp_concurrence",
    "spectral_ensemble",
    "verify_tau_membership",
    "SimConfig",
    "run_trajectory",
    "read_state_file",
    "write_state_file",
]
