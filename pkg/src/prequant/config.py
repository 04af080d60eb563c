"""Numerical defaults shared across modules."""

DEFAULT_GRID = 256
DEFAULT_SAMPLES = 32
DEFAULT_SEED = 0

# algebraic identities
ALGEBRA_TOL = 1e-9
# |I_N - I_2N| for every quadrature
QUADRATURE_TOL = 1e-6
INTEGRALITY_TOL = 1e-6
# wrap-around distance for "Delta vanishes"
VERDICT_TOL = 5e-5
# two evaluations of the same Delta / holonomy must agree to this
ROUTE_TOL = 1e-5
EQUIVARIANCE_TOL = 1e-6

# moment-map compatibility: tol = max(COMPAT_TOL_FLOOR, COMPAT_C * h**2).
# The largest observed residual on the unit-scale sphere scenario is about
# 0.05 * h**2, so C = 1 leaves a wide margin.
COMPAT_C = 1.0
COMPAT_TOL_FLOOR = 1e-4
COMPAT_MAX_GRID = 128

# zero/extremum search
SCAN_GRID = 64
ZERO_SCAN_FACTOR = 4.0
ZERO_TOL = 1e-9
NEWTON_MAX_ITER = 40

# line integrals: composite Gauss, halving until successive values differ < tol
LINE_GAUSS_NODES = 8
LINE_START_SEGMENTS = 16
LINE_MAX_SEGMENTS = 2**14
LINE_TOL = 1e-8

# base points used by the general holonomy route of Delta
DELTA_BASE_POINTS = 3
