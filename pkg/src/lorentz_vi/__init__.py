"""Monotone Picard iteration for variational inequalities on cylinders R^p x C,
ordered by the extended Lorentz cone."""
from .cone_order import (
    DimensionError,
    ExtendedLorentzCone,
    GeneratorSet,
    SplitPoint,
    UnsupportedCaseError,
    dual_pairing_nonnegative,
    generators,
    in_cone,
    in_dual,
    leq,
    minimal_generator_count,
)
from .projections import (
    Ball,
    BaseSet,
    Box,
    CylinderSet,
    DegenerateBaseError,
    HalfspaceIntersection,
    InfeasibleSetError,
    IntervalBound,
    box_isotonicity_counterexample,
    is_isotone_halfspace_set,
    mid,
    project_base,
    project_cylinder,
)
from .vi_solver import (
    Certificate,
    IterationTrace,
    MapEvaluationError,
    SolveConfig,
    SolveResult,
    VIProblem,
    check_start_condition,
    gamma_certificate,
    natural_map_residual,
    omega_certificate,
    picard_step,
    solve,
    verify_vi_solution,
)
from .problems import (
    EXAMPLE_SOLUTION,
    EXAMPLE_STARTS,
    AffineMap,
    OrderedPairSampler,
    ProblemDescription,
    build_problem,
    eval_paper_example,
    isotone_harness,
    paper_example_problem,
)

__version__ = "0.1.0"
