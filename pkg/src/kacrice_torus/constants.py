"""Constants used throughout kacrice-torus.

This module defines numerical policies and defaults to avoid hardcoding values
across multiple files.
"""

# Weight and profile constants
DEFAULT_GAUSSIAN_SCALE = 1.0  # w(t) = exp(-(t/scale)^2)
WEIGHT_DECAY_FLOOR = 1e-16  # w treated as 0 below this fraction of max(w)
MAX_DERIVATIVE_ORDER = 4  # highest derivative of V ever needed
MARGINAL_GRID_POINTS = 801  # nodes of the tabulated marginal splines
TABLE_COVERAGE_FLOOR = 1e-12  # a table must end below this fraction of max(w)
TABULATED_NOISE_FLOOR = 1e-12  # relative accuracy of tabulated profile quadrature
QUAD_LIMIT = 500  # subinterval limit passed to scipy.integrate.quad

# Kernel constants
SINGULAR_RADIUS = 1e-10  # |eta| below this is treated as the diagonal
LATTICE_TOLERANCE = 1e-16  # derivatives of V below this are dropped from lattice sums

# Ensemble constants
PSD_TOLERANCE = 1e-10  # eigenvalues >= -tol * ||cov|| are clamped to 0
DEFAULT_MC_SAMPLES = 100_000  # Monte Carlo draws for |det| expectations

# Conditional Hessian constants
EXTRAPOLATION_NODES = (1e-2, 5e-3, 2.5e-3)  # |eta| values for the origin limit
EXTRAPOLATION_TOLERANCE = 1e-6  # agreement required between extrapolation orders

# Asymptotic constants
DEFAULT_RADIAL_NODES = 48  # Gauss-Legendre nodes per radial panel
RADIAL_TAIL_TOLERANCE = 1e-10  # |delta0| below this ends the radial integral
RADIAL_MAX_RADIUS = 60.0  # hard cap on the radial integration range
RADIAL_PANEL_WIDTH = 1.0  # width of the Gauss-Legendre panels on [0, T]
CONSISTENCY_SIGMAS = 3.0  # agreement band, in combined standard errors

# Simulation constants
EPSILON_POLICY_MAX = 0.2  # largest epsilon allowed by the truncation policy
TRUNCATION_FLOOR = 1e-10  # coefficient variances below this are dropped
SCAN_POINTS_PER_MODE = 64  # m=1 sign-change grid points per truncation mode
NEWTON_SEEDS_PER_MODE = 32  # m=2 Newton seeds per axis per truncation mode
NEWTON_MAX_ITERATIONS = 60
ROOT_TOLERANCE = 1e-12  # bisection tolerance and Newton step tolerance
GRADIENT_TOLERANCE = 1e-9  # relative residual accepted for a critical point
MORSE_TOLERANCE = 1e-8  # relative |det Hess| below this flags a degenerate root
DEDUP_FRACTION = 0.01  # dedup radius as a fraction of epsilon
MIN_FIELDS = 100  # smallest batch accepted by empirical_moments
BOOTSTRAP_RESAMPLES = 1000  # resamples for bootstrap standard errors

# Performance constants
DEFAULT_MAX_WORKERS = 4  # Fallback when the CPU count is unknown

# Output constants
REPORT_KEYS = ("version", "command", "config", "seed", "results", "errors")
SEED_ENV_VAR = "KACRICE_SEED"  # environment variable for the default seed
DEFAULT_SEED = 20240607
