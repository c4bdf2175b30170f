"""Quantum magic squares: Bell locality as tensor existence, majorization
uncertainty bounds, and conditional-majorization steering criteria."""

from ._config import TOL, Tolerances, override
from .errors import (
    DegenerateObservableError,
    DimensionError,
    NoSignallingError,
    NonMonotoneError,
    NotHermitianError,
    PoolTooLargeError,
    QmagicError,
    SolverError,
    TotalMismatchError,
    ValidationError,
)
from .families import (
    bloch_measurement,
    ghz,
    isotropic,
    isotropic_qubit,
    isotropic_qutrit,
    mub_family,
    pauli,
    singlet,
    werner_qubit,
    werner_qutrit,
)
from .feasibility import (
    bell_locality_decide,
    chsh_max_over_tensors,
    ghz_contradiction_check,
    solve_feasibility,
)
from .magic_square import (
    LhvModel,
    MagicSquareTensor,
    NodeSelection,
    build_from_lhv,
    chsh_value,
    correlation,
    marginal,
    node_sum,
    parity_expectation,
)
from .majorization import MajorizationBound, compute_bound, direct_sum, majorizes, sort_descending
from .quantum import (
    Assemblage,
    DensityMatrix,
    ProjectiveMeasurement,
    assemblage,
    born_probabilities,
    joint_distribution,
)
from .steering import (
    CriterionReport,
    SteeringScenario,
    icosahedron_family,
    planar_family,
    sphere_family,
    steering_check,
    theorem1_lhs,
    threshold_scan,
    two_way_check,
)

__version__ = "0.1.0"
