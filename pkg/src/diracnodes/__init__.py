"""Bound states of the radial Dirac equation in d >= 1 dimensions and their nodes."""

from .errors import (
    AmbiguousNodeError,
    DiracError,
    DomainError,
    IntegrationError,
    LabelingError,
    NumericalError,
    StateNotFoundError,
    SupercriticalError,
    UnsupportedPotentialError,
    ValidationError,
)
from .nodal import (
    NodalReport,
    OrbitTrace,
    RiccatiConvergence,
    RotationVerdict,
    Verdict,
    count_nodes,
    node_radii,
    orbit_trace,
    riccati_convergence,
    verify_structure,
)
from .potentials import (
    Family,
    PotentialModel,
    coulomb,
    evaluate,
    hellmann,
    laser_dressed_coulomb,
    tabulated,
    validate,
)
from .radial_ode import Parity, ProblemSpec, integrate, k_index, origin_conditions, tail_conditions
from .shooting import (
    RadialSolution,
    ShootingConfig,
    coulomb_oracle,
    mismatch,
    solve_spectrum,
    solve_state,
    spectrum_scan,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousNodeError",
    "DiracError",
    "DomainError",
    "IntegrationError",
    "LabelingError",
    "NumericalError",
    "StateNotFoundError",
    "SupercriticalError",
    "UnsupportedPotentialError",
    "ValidationError",
    "NodalReport",
    "OrbitTrace",
    "RiccatiConvergence",
    "RotationVerdict",
    "Verdict",
    "count_nodes",
    "node_radii",
    "orbit_trace",
    "riccati_convergence",
    "verify_structure",
    "Family",
    "PotentialModel",
    "coulomb",
    "evaluate",
    "hellmann",
    "laser_dressed_coulomb",
    "tabulated",
    "validate",
    "Parity",
    "ProblemSpec",
    "integrate",
    "k_index",
    "origin_conditions",
    "tail_conditions",
    "RadialSolution",
    "ShootingConfig",
    "coulomb_oracle",
    "mismatch",
    "solve_spectrum",
    "solve_state",
    "spectrum_scan",
    "__version__",
]
