"""Default parameter values for the dirac-shell toolkit.

These constants are used as `Field(default=...)` values in the Pydantic
config schemas and as guards by the numerical core.  They live here (in the
schemas layer) rather than in `core/` so that `schemas` does not depend on
`core`.

All lengths are dimensionless (unit sphere radius = 1); the mass m carries
units of inverse length.
"""

# =============================================================================
# NUMERICAL SCALE REFERENCE
# =============================================================================
# Complex scalars are double-precision pairs throughout, so every tolerance
# below assumes a machine epsilon of ~2.2e-16.
#
# Dense storage: a boundary operator on N panels is a (4N)x(4N) complex128
# matrix, i.e. 256 N^2 bytes.
#   N =  320 (sphere level 2) ->  26 MB
#   N = 1280 (sphere level 3) -> 420 MB
#   N = 6000 (panel guard)    -> 9.2 GB per matrix; sphere level 4 (5120
#                                panels) is the largest mesh that passes.
# =============================================================================

# --- Kernel ---
DEFAULT_MASS = 1.0  # m: unit mass, the setting of every sphere benchmark

# --- Mesh guards ---
MAX_SPHERE_LEVEL = 7  # 20 * 4^7 = 327,680 panels, generation only
MAX_PANELS = 6000  # assembly guard, see storage table above
COINCIDENT_TOLERANCE = 1e-12  # centroids closer than tol * diameter are rejected
DEFAULT_MESH = "sphere:2"

# --- Cauchy assembly ---
# Galerkin quadrature: panel pairs with centroids closer than
# GALERKIN_NEAR_RADIUS * h get closed-form singular parts, edge integrals on
# GALERKIN_EDGE_ORDER Gauss-Legendre nodes and area integrals on the
# 4^GALERKIN_REFINE_LEVEL subdivision; the rest use the centroid rule.
GALERKIN_NEAR_RADIUS = 3.0
GALERKIN_EDGE_ORDER = 8
GALERKIN_REFINE_LEVEL = 2

# --- Spectral scans ---
# The grid must be fine enough that isolated critical couplings show up as
# separate local minima of s_min(lambda).  81 points on [1, 3] gives a
# spacing of 0.025.
DEFAULT_LAMBDA_MIN = 1.0
DEFAULT_LAMBDA_MAX = 3.0
DEFAULT_SCAN_STEPS = 81
GOLDEN_TOLERANCE = 1e-4  # lambda resolution of the refined minima
ZERO_MODE_FACTOR = 1.0  # zero mode when s_min < factor * resolved identity residual
CRITICAL_WINDOW = 1e-2  # |lambda| within this of 2 is flagged near-critical
HERMITIAN_TOLERANCE = 1e-10  # weighted operator treated as Hermitian below this

# --- Lambda constructions ---
POWER_ITERATIONS = 30  # operator norm estimate for the Neumann guard
CONDITION_GUARD = 1e8  # tau is rejected above this condition number
COMMUTATOR_TOLERANCE = 1e-10  # relative size of [omega, C M] accepted as zero
DEFAULT_COUPLING = 1.0  # lambda
DEFAULT_WEIGHT = 0.5  # c: symmetric average of the two traces

# --- Plane oracle ---
# Exponential decay of exp(-x3 |S|) makes [0, 40 / |S|] lossless in double
# precision (exp(-80) ~ 1.8e-35 after squaring).
DECAY_LENGTHS = 40.0
DEFAULT_XI = (0.5, 0.5)

# --- Field check ---
# Offsets t = h, h/2, h/4 with h the mean panel diameter.  Panels within
# NEAR_RADIUS * h of an evaluation point are integrated on a 4^level uniform
# subdivision instead of at their centroid.
FIELD_OFFSET_FACTORS = (1.0, 0.5, 0.25)
FIELD_SAMPLE_SIZE = 48
NEAR_RADIUS = 2.0
NEAR_REFINE_LEVEL = 5
MIN_TARGET_DISTANCE = 1e-3  # in units of h
REPRODUCING_POINT = (0.2, 0.0, 0.0)

# --- Verification tolerances ---
DEFAULT_TOL_ALGEBRA = 1e-14
DEFAULT_TOL_KERNEL = 1e-13
DEFAULT_TOL_SYMBOL = 1e-12
DEFAULT_TOL_ENERGY = 1e-8
DEFAULT_TOL_IDENTITY = 0.15  # resolved Clifford residual accepted at sphere level 3
VERIFY_SAMPLES = 1000
VERIFY_SEED = 20240521  # fixed so that verify runs are byte-identical

# --- Sphere oracle tables ---
PROFILE_RADII = (0.1, 0.25, 0.5, 0.75, 0.9, 1.1, 1.5, 2.0, 3.0, 5.0)

# --- Output ---
SCHEMA_VERSION = "dirac-shell/1"
