"""Trajectory-based simulation of interfering Gaussian wave packets.

Analytic single-packet and two-packet fields, Bohmian trajectory
ensembles, effective wall/well potentials replacing one packet, and a
Crank-Nicolson grid solver to cross-check the mapping.
"""

from .errors import BohmwaveError
from .packets import GaussianPacket, classify_regime, energy_decomposition
from .superposition import (
    BoundaryLine,
    Superposition,
    boundary_case_a,
    boundary_case_b,
    closed_form_symmetric_density,
    fraunhofer_slope,
    fringe_spacing_collision,
    max_interference_time,
)
from .trajectories import (
    IntegratorConfig,
    SamplingStrategy,
    TrajectoryEnsemble,
    check_non_crossing,
    count_region_transfer,
    run_ensemble,
    sample_initial_positions,
)
from .units import NATURAL, UnitSystem

__version__ = "0.1.0"

__all__ = [
    "BohmwaveError",
    "BoundaryLine",
    "GaussianPacket",
    "IntegratorConfig",
    "NATURAL",
    "SamplingStrategy",
    "Superposition",
    "TrajectoryEnsemble",
    "UnitSystem",
    "boundary_case_a",
    "boundary_case_b",
    "check_non_crossing",
    "classify_regime",
    "closed_form_symmetric_density",
    "count_region_transfer",
    "energy_decomposition",
    "fraunhofer_slope",
    "fringe_spacing_collision",
    "max_interference_time",
    "run_ensemble",
    "sample_initial_positions",
]
