"""widthcalc: order-sharp width estimates for intersections of anisotropic
finite-dimensional balls, with verifiable certificates, extremal witness
vectors, and an independent convex-minimization cross-check."""

from .certificates import (
    Certificate,
    EnumerationCapError,
    PsiResult,
    enumerate_certificates,
    psi,
    solve_lambda,
)
from .checks import TrialBounds, random_family, run_suite, run_trial
from .exponents import (
    ExponentVector,
    GridShape,
    LogValue,
    QParam,
    box_norm,
    indicator_box,
    mixed_norm,
    phi,
)
from .extremal import (
    ExtremalWitness,
    GeneralPositionError,
    MembershipReport,
    WitnessRangeError,
    build_witness,
    dense_tensor,
    dense_tensor_bytes,
    partition_coordinates,
    solve_sbar,
    verify_membership,
)
from .family import (
    BallFamily,
    BallSpec,
    FamilyError,
    GeneralPositionReport,
    PerturbationError,
    Violation,
    check_general_position,
    perturb,
    serialize,
    validate,
)
from .geometry import (
    PointSet,
    ReplacementError,
    SingularSystemError,
    affinely_independent,
    barycentric,
    replacement_vertex,
)
from .oracle import CompareVerdict, OracleResult, compare, exact_minimize, minimize, objective
from .report import AnalysisOptions, analyze
from .sweeps import SweepRow, fit_run, longest_stable_run, sweep_axis

__version__ = "0.1.0"

__all__ = [
    "AnalysisOptions",
    "BallFamily",
    "BallSpec",
    "Certificate",
    "CompareVerdict",
    "EnumerationCapError",
    "ExponentVector",
    "ExtremalWitness",
    "FamilyError",
    "GeneralPositionError",
    "GeneralPositionReport",
    "GridShape",
    "LogValue",
    "MembershipReport",
    "OracleResult",
    "PerturbationError",
    "PointSet",
    "PsiResult",
    "QParam",
    "ReplacementError",
    "SingularSystemError",
    "SweepRow",
    "TrialBounds",
    "Violation",
    "WitnessRangeError",
    "affinely_independent",
    "analyze",
    "barycentric",
    "box_norm",
    "build_witness",
    "check_general_position",
    "compare",
    "dense_tensor",
    "dense_tensor_bytes",
    "enumerate_certificates",
    "exact_minimize",
    "fit_run",
    "indicator_box",
    "longest_stable_run",
    "minimize",
    "mixed_norm",
    "objective",
    "partition_coordinates",
    "perturb",
    "phi",
    "psi",
    "random_family",
    "replacement_vertex",
    "run_suite",
    "run_trial",
    "serialize",
    "solve_lambda",
    "solve_sbar",
    "sweep_axis",
    "validate",
    "verify_membership",
]
