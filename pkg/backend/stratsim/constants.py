"""Constants."""

import math

DEFAULT_GRID_POINTS = 256
DEFAULT_DOMAIN_LENGTH = 20.0 * math.pi
DECAY_DOMAIN_LENGTH = 200.0 * math.pi
DEFAULT_DEALIAS_FRACTION = 2.0 / 3.0
DEFAULT_REGULARITY = 3.5
DEFAULT_CFL_SAFETY = 0.5
DEFAULT_DIAGNOSTIC_STRIDE = 10

# initial data lives in the dyadic bands [INITIAL_BAND_MIN, INITIAL_BAND_MAX]
INITIAL_BAND_MIN = -2
INITIAL_BAND_MAX = 3

# lifespan proxy
HN_GROWTH_FACTOR = 2.0
BOOTSTRAP_THRESHOLD = 1.0
HORIZON_FACTOR = 50.0
DEFAULT_EPS_AXIS = (0.4, 0.28, 0.2, 0.14, 0.1)
DEFAULT_KAPPA_AXIS = (1.0, 2.0, 4.0, 8.0)
REFERENCE_KAPPA = 1.0
REFERENCE_EPSILON = 0.3
QUICK_EPS_AXIS = (0.4, 0.28, 0.2)
QUICK_GRID_POINTS = 128
MIN_FIT_POINTS = 4
FIT_R2_FLAG = 0.98
FIT_R2_ACCEPT = 0.95

# reference exponents of the lifespan lower bound T >= C kappa^(1/3) eps^(-4/3)
REFERENCE_ALPHA = -4.0 / 3.0
REFERENCE_BETA = 1.0 / 3.0

# decay fits
MIN_SAMPLES_PER_DECADE = 8

# checkpoint binary format
CHECKPOINT_MAGIC = b"STRATSIM"
CHECKPOINT_VERSION = 1

RECORD_COLUMNS = (
    "model",
    "epsilon",
    "kappa",
    "n_regularity",
    "T_star",
    "stop_reason",
    "seed",
    "grid_n",
    "L",
    "dt",
)
FLOAT_SIGNIFICANT_DIGITS = 17

# decay and Strichartz studies
DECAY_GRID_POINTS = 1024
DECAY_BANDS = (-1, 0, 1, 2)
DECAY_WINDOW = (5.0, 150.0)
# relative widths of the decay packet around (+-2^k, 0): across and along the xi1 axis
DECAY_ANGULAR_SPREAD = 0.7
DECAY_RADIAL_SPREAD = 0.08
STRICHARTZ_GRID_POINTS = 256
STRICHARTZ_DOMAIN_LENGTH = 32.0 * math.pi
STRICHARTZ_KAPPAS = (1.0, 2.0, 4.0, 8.0)
DUHAMEL_KAPPAS = (1.0, 4.0)
STRICHARTZ_TIME_SAMPLES = 129
SYMMETRY_KAPPA = 4.0

# exit codes of the command line
EXIT_OK = 0
EXIT_SELFTEST_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ABORT = 3
