"""Numerical census of limit cycles of random planar polynomial vector fields
and of zeros of parametric holomorphic families.

The package splits into: analytic primitives (winding-number zero counts,
Jensen-type bounds, polynomial roots), planar fields and their polar
reduction, the Picard/Runge-Kutta return-map solvers with cycle counting,
parametric family statistics (tails, moments, separation checks), random
polynomial root geometry, and experiment orchestration with a CLI.
"""

from .analytic import (
    ComplexPoly,
    ZeroCountResult,
    jensen_count_constant,
    jensen_zero_bound,
    polynomial_roots,
    winding_zero_count,
)
from .errors import (
    AllSamplesFailed,
    CycleCensusError,
    DegenerateSlice,
    DegenerateVariance,
    DegreeMismatch,
    EmptyInput,
    InadmissibleField,
    InvalidGeometry,
    NoContraction,
    NonConvergence,
    OrderViolation,
    PersistentBoundaryZero,
    RadiusViolation,
    SeparationCheckFailed,
    SolverFailure,
    StepUnderflow,
    ZeroField,
    ZeroPolynomial,
)
from .kernels import BACKEND, available_backends
from .sampling import mix_seed, rng_for, sobol_complex_ball, uniform_complex_ball, uniform_real_ball
from .fields import (
    Ellipsoid,
    PlanarField,
    PolarSystem,
    coefficient_count,
    ellipsoid_membership,
    polar_reduce,
    rescale_to_unit,
    rigid_field,
    rigid_field_from_roots,
    rotate_field,
    sample_ellipsoid,
    trig_norm_check,
    v0_field,
)
from .returnmap import (
    CycleCount,
    SolverConfig,
    Trajectory,
    admissible_budget,
    calibration_displacement,
    complex_displacement_count,
    count_limit_cycles,
    denominator_guard,
    displacement,
    displacement_family,
    picard_solve,
    rk_solve,
)
from .families import (
    ParametricFamily,
    SummaryStats,
    TailTable,
    check_separation_conditions,
    count_many,
    detect_identically_zero,
    empirical_tail,
    expectation_and_variance,
    family_zero_count,
    log_sups,
    normalized_log_sups,
    spot_check_bounds,
)
from .randpoly import (
    Annulus,
    CoeffFamily,
    KacResult,
    annulus_zero_count,
    annulus_zero_count_winding,
    binomial_family,
    expectation_lower_bound_check,
    kac_experiment,
    kac_family,
    partition_roots,
    reversal_duality_check,
    uniformity_test,
)
from .registry import (
    FlowRhs,
    blaschke_product,
    build_family,
    build_family_sequence,
    flow_radius,
    list_families,
    ode_flow_family,
)
from .ensembles import (
    CltReport,
    ExperimentConfig,
    KacRunResult,
    SampleRecord,
    SllnResult,
    TheoremAResult,
    ks_distance_to_normal,
    run_clt,
    run_family_tail,
    run_kac,
    run_slln,
    run_theorem_a,
)

__version__ = "0.1.0"
