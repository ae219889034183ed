"""Numerical laboratory for partially hyperbolic surface endomorphisms.

Tools to define torus endomorphisms (integer-linear part plus trigonometric
perturbation), verify unstable cone invariance and expansion, approximate the
center bundle, solve for the semiconjugacy to the linear model on a strip,
hunt for invariant center circles, and compare curve-length growth against
volume bounds.
"""
__version__ = "0.1.0"

from .cones import (
    ABSOLUTE,
    NOT_PH,
    POINTWISE_ONLY,
    CenterField,
    Cone,
    ConeField,
    PHReport,
    check_invariance,
    classify,
    compute_center_field,
    cone_image,
    expansion_constants,
)
from .errors import (
    ConfigError,
    MapValidationError,
    NonConvergenceError,
    PreconditionError,
    SingularMatrixError,
    StepSizeError,
    TangencyError,
    TorusLabError,
)
from .torus_map import (
    SpectrumReport,
    TorusMap,
    TrigPolynomial,
    evaluate,
    extract_linearization,
    jacobian,
    make_map,
    map_from_dict,
    map_to_dict,
    normalize_homology,
    spectrum,
)

__all__ = [
    "ABSOLUTE",
    "NOT_PH",
    "POINTWISE_ONLY",
    "CenterField",
    "Cone",
    "ConeField",
    "ConfigError",
    "MapValidationError",
    "NonConvergenceError",
    "PHReport",
    "PreconditionError",
    "SingularMatrixError",
    "SpectrumReport",
    "StepSizeError",
    "TangencyError",
    "TorusLabError",
    "TorusMap",
    "TrigPolynomial",
    "check_invariance",
    "classify",
    "compute_center_field",
    "cone_image",
    "evaluate",
    "expansion_constants",
    "extract_linearization",
    "jacobian",
    "make_map",
    "map_from_dict",
    "map_to_dict",
    "normalize_homology",
    "spectrum",
]
