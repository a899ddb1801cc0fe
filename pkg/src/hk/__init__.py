"""Exact symbolic toolkit for distribution flags, selectors, twisted
curvature, horizontal holonomy spans, and foliation decision procedures.

The public surface mirrors the pipeline order: build a frame model
(chart polynomials or Lie structure constants), iterate its flag, build
a selector, form the vertical connection and its twisted curvature,
enumerate the holonomy span, and decide the two foliation questions.
"""

from .config import EngineConfig
from .connection import (
    GlValuedForm,
    VerticalConnection,
    curvature_direct,
    curvature_global_basis,
    flatten,
    modified_curvature,
    vertical_connection,
)
from .decide import (
    Verdict,
    one_dim_criterion,
    principal_structure_exists,
    tg_metric_exists,
    verify_metric_certificate,
)
from .distribution import Flag, PointClass, classify_point, compute_flag, growth_vector_at
from .errors import (
    ExactDivisionError,
    HKError,
    MismatchedModels,
    ModelError,
    NoAdaptedFrame,
    NormalizationFailed,
    NotCarnot,
    NotStabilized,
    OracleUnavailable,
    ParseError,
    PostconditionFailed,
    StepTooCoarse,
)
from .exterior import (
    FrameField,
    FrameModel,
    KForm,
    KVector,
    ext_d,
    interior_product,
    lie_derivative,
)
from .holonomy import (
    HolonomyAlgebra,
    numeric_transport_oracle,
    ozeki_algebra,
    sym2_action,
)
from .liegroups import (
    CarnotSplit,
    LieAlgebraSpec,
    bracket_condition_p2k,
    carnot_split,
    free_nilpotent,
    hall_basis,
    split_frame_model,
    to_frame_model,
    witt_dimension,
)
from .modelfile import LoadedModel, load_model, to_canonical_json, write_algebra_file
from .poly import Poly, parse_fraction, parse_poly
from .selector import Selector, build_selector, d_chi, extend_one_form, verify_selector

__version__ = "0.1.0"

__all__ = [
    "EngineConfig",
    "GlValuedForm",
    "VerticalConnection",
    "curvature_direct",
    "curvature_global_basis",
    "flatten",
    "modified_curvature",
    "vertical_connection",
    "Verdict",
    "one_dim_criterion",
    "principal_structure_exists",
    "tg_metric_exists",
    "verify_metric_certificate",
    "Flag",
    "PointClass",
    "classify_point",
    "compute_flag",
    "growth_vector_at",
    "ExactDivisionError",
    "HKError",
    "MismatchedModels",
    "ModelError",
    "NoAdaptedFrame",
    "NormalizationFailed",
    "NotCarnot",
    "NotStabilized",
    "OracleUnavailable",
    "ParseError",
    "PostconditionFailed",
    "StepTooCoarse",
    "FrameField",
    "FrameModel",
    "KForm",
    "KVector",
    "ext_d",
    "interior_product",
    "lie_derivative",
    "HolonomyAlgebra",
    "numeric_transport_oracle",
    "ozeki_algebra",
    "sym2_action",
    "CarnotSplit",
    "LieAlgebraSpec",
    "bracket_condition_p2k",
    "carnot_split",
    "free_nilpotent",
    "hall_basis",
    "split_frame_model",
    "to_frame_model",
    "witt_dimension",
    "LoadedModel",
    "load_model",
    "to_canonical_json",
    "write_algebra_file",
    "Poly",
    "parse_fraction",
    "parse_poly",
    "Selector",
    "build_selector",
    "d_chi",
    "extend_one_form",
    "verify_selector",
    "__version__",
]
