"""Simulation laboratory for the minimum modulus of random trigonometric
polynomials on the unit circle."""

from .arithmetic import (
    ArithMeta,
    DilationResult,
    PhaseTuple,
    classify_bad_arcs,
    find_dilation,
    is_smooth,
    is_spread,
    is_weakly_spread,
    random_smooth_spread_tuple,
    torus_dist,
)
from .edgeworth import (
    CumulantSet,
    ExpansionDensity,
    GaussianComparison,
    average_cumulants,
    box_probability,
    build_expansion,
    compare_box,
)
from .harness import (
    TARGET_RATE,
    EnsembleResult,
    FitReport,
    fit_exponential,
    histogram,
    ks_distance,
    run_ensemble,
)
from .minima import (
    GlobalMin,
    MeshConfig,
    MinimaProcess,
    SiteRecord,
    build_mesh,
    check_derivative_event,
    check_separation,
    global_min,
    linearize_site,
    process_to_csv,
    select_minima,
)
from .phasewalk import (
    CharfnResult,
    PsiSequence,
    StepMatrix,
    WalkSample,
    charfn_log_modulus,
    covariance,
    find_q0,
    finite_difference,
    psi_sequence,
    sample_walk,
    sample_walks,
    shift_bound_sides,
    small_ball_estimate,
    small_ball_polynomial,
    step_matrix,
    twisted_difference,
    xi_norm,
)
from .polymodel import (
    CoefficientDist,
    ModelSpec,
    PolySample,
    PreconditionError,
    evaluate,
    evaluate_mesh,
    poly_from_json,
    poly_to_json,
    sample_polynomial,
    split_seed,
)

__version__ = "0.1.0"
