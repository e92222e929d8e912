"""Hermite-Hadamard bounds for convex functions on simplices.

For convex f on an n-simplex T, the integral mean is sandwiched between the
value at the barycenter and the vertex average.  This package computes the
two gaps L and R of that sandwich, certifies the sharp refinement
0 <= L <= n*R, the Fejer-weighted counterparts, and the counterexample
families that show the constants are optimal, using exact, certified
bracketing and Monte Carlo integration backends.
"""

from .bounds import (
    BoundsReport,
    CorpusRow,
    FejerReport,
    compute_lr,
    demonstrate_no_uniform_fejer_constant,
    fejer_lr,
    make_sharpness_witness,
    random_psd_quadratic,
    random_simplex,
    run_fejer_corpus,
    run_refinement_corpus,
    verify_fejer_bounds,
    verify_refinement,
)
from .errors import (
    ConvexityViolationError,
    DegenerateSimplexError,
    DegreeOverflowError,
    DimensionMismatchError,
    ExpressionEvalError,
    HHSimplexError,
    InvalidParameterError,
    NegativeWeightError,
    OrderMismatchError,
    SearchExhaustedError,
)
from .expressions import Expression
from .functions import (
    BaryPolynomial,
    ClampedPyramid,
    Constant,
    ConvexityReport,
    EvalContext,
    FunctionScale,
    FunctionSpec,
    FunctionSum,
    MinCoordWeight,
    Pyramid,
    Symmetrized,
    VertexIndicator,
    check_convexity_sampled,
    clamped_positive_part_mass,
    evaluate,
    make_fejer_counterexample,
    make_pyramid,
    make_vertex_indicator,
    symmetrize,
    uniform_barycentric,
)
from .integrate import (
    DEFAULT_CONFIG,
    IntegralResult,
    QuadratureConfig,
    as_bary_polynomial,
    integrate,
    integrate_bracketed,
    integrate_monomial,
    integrate_monte_carlo,
    integrate_polynomial,
    integrate_pyramid,
    known_convex,
    min_coord_profile,
)
from .simplex import (
    BarycentricPoint,
    CyclicPermutation,
    Simplex,
    apply_permutation,
    cyclic_shifts,
    make_simplex,
    subdivide_barycentric,
    to_barycentric,
    to_cartesian,
)

__version__ = "0.1.0"
