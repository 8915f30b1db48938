"""Curvature genericity toolkit for 3-manifolds given in coordinates.

The package evaluates metric coefficients through exact order-3 jet
arithmetic, builds curvature and its covariant derivative, scores tangent
planes by how far they sit from curvature-adapted positions, locates
fully rigid planes, and constructs small compactly supported metric
deformations that remove them.
"""

from .charts import (
    ChartMetric,
    InverseJet1,
    MetricJet3,
    Point3,
    inverse_jet,
    metric_from_json,
    metric_jet,
    metric_jet_many,
    metric_to_json,
    zoo_metric,
    zoo_names,
)
from .errors import (
    ChartDomainError,
    ConfigurationError,
    DeformationTooLargeError,
    DegenerateMetricError,
    GeosieveError,
)
from .perturb import (
    AdaptedChart,
    DeformedMetric,
    K0,
    LocalizedSine,
    PerturbationSpec,
    RadialBump,
    SineProfile,
    adapted_chart,
    build_bump,
    build_f,
    build_h,
    deform,
    layer_metric_jets,
)
from .certify import (
    GrowthReport,
    ResidualReport,
    check_christoffel_diffs,
    check_curvature_diffs,
    check_field_bounds,
    check_inverse_diffs,
    check_lemC,
    check_main_lemma,
    check_product_bounds,
    check_wave_bounds,
    cq_distance,
    report_to_json,
)
from .pipeline import (
    GenericityCertificate,
    RunConfig,
    certificate_to_json,
    export_slices,
    genericize,
)
from .grassmann import (
    GenericScore,
    RigidReport,
    TangentPlane,
    fibonacci_directions,
    generic_score,
    generic_scores,
    jacobi_apply,
    orthonormal_plane,
    plane_distance,
    plane_from_normal,
    rigid_mask,
    rigid_report_to_csv,
    rigid_report_to_json,
    rigid_test,
    sample_planes,
    scan_rigid,
)
from .tensor import (
    ChristoffelJet,
    CurvaturePoint,
    christoffel,
    covariant_R,
    curvature_operator,
    curvature_point,
    riemann,
    sectional,
)

__version__ = "0.1.0"

__all__ = [
    "ChartMetric", "InverseJet1", "MetricJet3", "Point3",
    "inverse_jet", "metric_from_json", "metric_jet", "metric_jet_many",
    "metric_to_json", "zoo_metric", "zoo_names",
    "GeosieveError", "ChartDomainError", "ConfigurationError",
    "DegenerateMetricError", "DeformationTooLargeError",
    "ChristoffelJet", "CurvaturePoint", "christoffel", "riemann",
    "covariant_R", "curvature_point", "sectional", "curvature_operator",
    "TangentPlane", "GenericScore", "RigidReport",
    "orthonormal_plane", "plane_from_normal", "fibonacci_directions",
    "jacobi_apply", "generic_score", "generic_scores", "rigid_test",
    "rigid_mask", "scan_rigid", "plane_distance", "sample_planes",
    "rigid_report_to_json", "rigid_report_to_csv",
    "K0", "PerturbationSpec", "DeformedMetric", "SineProfile", "RadialBump",
    "LocalizedSine", "AdaptedChart", "build_h", "build_bump", "build_f",
    "adapted_chart", "layer_metric_jets", "deform",
    "ResidualReport", "GrowthReport", "cq_distance",
    "check_wave_bounds", "check_field_bounds",
    "check_christoffel_diffs", "check_inverse_diffs",
    "check_curvature_diffs", "check_main_lemma", "check_lemC",
    "check_product_bounds", "report_to_json",
    "RunConfig", "GenericityCertificate", "genericize",
    "certificate_to_json", "export_slices",
    "__version__",
]
