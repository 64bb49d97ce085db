"""carpetlab: magnification scenery of grid-aligned Bernoulli measures.

Exact symbolic measures for the toral endomorphism (x, y) -> (mx, ny)
mod 1, the rotation-driven approximate-square magnification dynamics,
weak-metric machinery on magnified measures, and entropy-based dimension,
projection, and distance-set estimators.
"""

__version__ = "0.1.0"

from .errors import (
    BadShape,
    BudgetExceeded,
    CarpetError,
    DegenerateRange,
    DepthMismatch,
    IncompatibleSpecs,
    InsufficientDepth,
    NotPsiForm,
    OrderViolation,
    PrecisionExhausted,
    ResolutionTooCoarse,
    SumNotOne,
    TooFewPoints,
    ZeroMassCylinder,
)
from .symbolic import (
    BernoulliMeasure,
    BernoulliSpec,
    BlowupMeasure,
    CylinderMeasure,
    PsiMeasure,
    SymbolicPoint,
    Word,
    blowup,
    build_spec,
    carpet_spec,
    cylinder_mass,
    fiber_cylinder_mass,
    measures_agree_to,
    psi_measure,
    sample_point,
    uniform_spec,
    word,
)
from .scenery import (
    ApproxSquare,
    EmbedResult,
    PhaseState,
    RationalityCertificate,
    Rescaling,
    SceneryOrbit,
    SceneryState,
    classify_alpha,
    coded_point,
    embed,
    minimeasure,
    minimeasure_blowup,
    minimeasure_psi,
    partition_children,
    rotate_and_count,
    z_orbit,
)
from .metrics import (
    EmpiricalDistribution,
    SimpleTestFunction,
    TestAverageResult,
    ball_membership,
    h0,
    phase_interval_measure,
    prokhorov_distance,
    scenery_distribution,
    simple_test_average,
    simple_test_limit,
    tau_atoms,
)
from .dimension import (
    DiscreteMeasure1D,
    DiscreteMeasure2D,
    Projection,
    cell_atoms,
    entropy_dimension_estimate,
    entropy_slope,
    estimate_Eq,
    exact_dimension,
    line_projection_dimension,
    marstrand_sweep,
    partition_entropy,
    project_measure,
    r_entropy,
    support_dimension,
)
from .distset import (
    DistanceSet,
    DistsetReport,
    PointCloud,
    box_dim_estimate,
    cantor_endpoints,
    distance_set_build,
    distset_experiment,
    log_scale_range,
    sample_support,
)
from .config import ExperimentConfig
from .render import heatmap_array, render_heatmap, write_ppm
from .verification import random_spec, random_word, run_verification
