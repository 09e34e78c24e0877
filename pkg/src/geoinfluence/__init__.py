"""Geometric influences of sets under product measures.

The package is organised bottom-up:

``measures``   one-dimensional measures, product spaces, seeded sampling
``sets``       set descriptors with fibers, enlargements and membership
``influence``  geometric and h-influence estimators, entropy helpers
``bounds``     inequality checkers reported against committed baselines
``russo``      location families, threshold locations, the max test
``rotation``   Haar rotations and influence sums of rotated sets
``reports``    bound reports, baselines file, CSV/JSON output
``cli``        command-line front end
"""
from .bounds import (
    BoundaryEstimate,
    BoxExact,
    JuntaResult,
    boundary_estimate,
    box_exact,
    check_1d_iso,
    check_junta,
    check_kkl,
    check_lowmax_sum,
    check_talagrand_sum,
    check_transitive_iso,
    junta_approx,
)
from .influence import (
    HProfile,
    InfluenceEstimate,
    InfluenceProfile,
    ent_to_h_bound,
    entropy,
    entropy_inverse,
    entropy_profile,
    geometric_influence,
    h_influence,
    h_influence_profile,
    influence_profile,
    iso_h_profile,
    theta,
    variance_profile,
)
from .measures import (
    Boltzmann,
    Gaussian,
    MCConfig,
    Measure1D,
    ProductSpace,
    Uniform01,
    sample,
    tail_bracket,
    translate,
)
from .reports import Baselines, BoundReport, emit, load_baselines
from .rotation import (
    OrthogonalMatrix,
    halfspace_influences_exact,
    haar_sample,
    random_cube_enlargement,
    rotate_set,
    rotation_scan,
)
from .russo import (
    PowerReport,
    ThresholdCurve,
    max_test_power,
    max_threshold_alpha,
    measure_curve,
    russo_check,
    threshold_alpha,
    width_check,
)
from .sets import (
    BoxLower,
    CapabilityError,
    Complement,
    CubeDilatedBall,
    EmptySet,
    FiberResolutionError,
    FiniteSet,
    GenericOracle,
    HalfSpace,
    IntervalUnion,
    L2Ball,
    MaxThreshold,
    MonotoneOracle,
    Rotated,
    SetDescriptor,
    SumThreshold,
    fiber,
    indicator,
    jcal_spotcheck,
    measure_mc,
)

__version__ = "0.1.0"
