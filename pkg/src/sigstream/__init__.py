"""Signatures of streams: truncated tensor algebra, free-Lie coordinates,
the log-ODE method, unitary developments, expected signatures of stopped
Brownian motion, and signature-feature learning."""

from .development import (
    DevelopmentResult,
    UnitaryPolicy,
    develop,
    expected_development,
)
from .expected_sig import (
    DiskDomain,
    ExpectedSigField,
    GridDomain,
    PolygonDomain,
    mc_expected_sig,
    radius_diagnostic,
    solve_recurrence,
)
from .learn import (
    ClassificationReport,
    FeatureMatrix,
    LinearModel,
    featurize,
    fit_conditional_law,
    fit_lasso,
    fit_ridge,
    score_and_report,
    two_class_streams,
)
from .lie_algebra import (
    LieCoordinates,
    LyndonBasisElement,
    bracket_expand,
    dynkin_check,
    lyndon_basis,
    tensor_to_lie_coords,
    witt_dimension,
)
from .logode import (
    LinearSystem,
    LogOdeSchedule,
    VectorFieldSystem,
    lie_extend_evaluate,
    linear_solve,
    logode_step,
    solve,
)
from .streams import (
    PartitionDistanceReport,
    Stream,
    concat,
    dp_distance_estimate,
    ingest_csv,
    lead_lag,
    log_signature,
    restrict,
    reverse,
    signature,
    time_augment,
    write_csv,
)
from .tensor_algebra import (
    GradeNorms,
    TruncatedTensor,
    Word,
    grade_norms,
    inner,
    shuffle,
    tensor_exp,
    tensor_log,
    tensor_mul,
)

__version__ = "0.1.0"
