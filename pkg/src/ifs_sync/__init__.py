"""Synchronization of random iterated function systems on the circle and the 2-sphere."""

from .analysis import (
    LyapunovEstimate,
    MinimalityReport,
    PullbackReport,
    SyncReport,
    covering_check,
    isolating_check,
    lyapunov_spectrum,
    lyapunov_top,
    lyapunov_upper_bound,
    pullback_atoms,
    reachability_cover,
    sync_experiment,
    uniqueness_probe,
)
from .cocycle import FiniteIFS, RandomFamily, iterate_word, pullback_compose, qr_cocycle, system_from_dict, trajectory
from .diffeos import (
    Composition,
    EquivariantNS,
    FlatNS,
    InverseCircle,
    NoiseSpec,
    NorthSouthCircle,
    Rotation,
    SphereRotation,
    SphereScale,
    Translated,
    diffeo_from_dict,
    evaluate,
    inverse,
    tangent,
    tangent_fd,
)
from .driving import BakerState, ProbabilityVector, baker_backward, baker_forward, encode_full, encode_plus
from .geometry import CIRCLE, SPHERE, TangentFrame, distance
from .measures import (
    EmpiricalMeasure,
    InitialLaw,
    UlamHistogram,
    make_partition,
    stationary_mc,
    stationary_power,
    ulam_matrix,
    wasserstein1_circle,
)
from .rng import stream

__version__ = "0.1.0"

__all__ = [
    "BakerState",
    "CIRCLE",
    "Composition",
    "EmpiricalMeasure",
    "EquivariantNS",
    "FiniteIFS",
    "FlatNS",
    "InitialLaw",
    "InverseCircle",
    "LyapunovEstimate",
    "MinimalityReport",
    "NoiseSpec",
    "NorthSouthCircle",
    "ProbabilityVector",
    "PullbackReport",
    "RandomFamily",
    "Rotation",
    "SPHERE",
    "SphereRotation",
    "SphereScale",
    "SyncReport",
    "TangentFrame",
    "Translated",
    "UlamHistogram",
    "baker_backward",
    "baker_forward",
    "covering_check",
    "diffeo_from_dict",
    "distance",
    "encode_full",
    "encode_plus",
    "evaluate",
    "inverse",
    "isolating_check",
    "iterate_word",
    "lyapunov_spectrum",
    "lyapunov_top",
    "lyapunov_upper_bound",
    "make_partition",
    "pullback_atoms",
    "pullback_compose",
    "qr_cocycle",
    "reachability_cover",
    "stationary_mc",
    "stationary_power",
    "stream",
    "sync_experiment",
    "system_from_dict",
    "tangent",
    "tangent_fd",
    "trajectory",
    "ulam_matrix",
    "uniqueness_probe",
    "wasserstein1_circle",
]
