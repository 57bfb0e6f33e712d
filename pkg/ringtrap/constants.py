"""Constants used throughout the application.
"""

import math
import os
from scipy import constants as csts

# I/O OPERATIONS
RINGTRAP_DIR_PATH = os.path.dirname(os.path.abspath(__file__))
CONFIG_DIR_PATH = f'{RINGTRAP_DIR_PATH}/config'
SPECIES_FPATH = f'{CONFIG_DIR_PATH}/species.json'
BASELINE_CONFIG_FPATH = f'{CONFIG_DIR_PATH}/baseline.yaml'
DEFAULT_CACHE_DIR_NAME = '.ringtrap-cache'
CSV_FLOAT_FORMAT = '%.9g'
FIELD_FLOAT_FORMAT = '%.17g'
PROVENANCE_PREFIX = '# provenance: '

# ENVIRONMENT VARIABLES
CACHE_DIR_ENV = 'RINGTRAP_CACHE_DIR'

# PHYSICAL CONSTANTS (SI)
HBAR = csts.hbar
PLANCK_H = csts.h
K_B = csts.k
EPS0 = csts.epsilon_0
C_LIGHT = csts.c
ATOMIC_POLARIZABILITY_UNIT = csts.physical_constants["atomic unit of electric polarizability"][0]

# UNIT SUFFIXES
LENGTH_UNITS = {'m': 1.0, 'um': 1e-6, 'nm': 1e-9}
FREQUENCY_UNITS = {'Hz': 1.0, 'kHz': 1e3, 'MHz': 1e6, 'GHz': 1e9, 'THz': 1e12}
POWER_UNITS = {'W': 1.0, 'mW': 1e-3, 'uW': 1e-6}
TEMPERATURE_UNITS = {'K': 1.0, 'mK': 1e-3, 'uK': 1e-6}
ANGLE_UNITS = {'rad': 1.0}

# RUN STATUS
NOT_STARTED_STATUS = 'Not Started'
IN_PROGRESS_STATUS = 'In Progress'
ERROR_STATUS = 'Error'
COMPLETED_STATUS = 'Completed'

# COMMANDS
MODES_COMMAND = 'modes'
SPECTRUM_FIT_COMMAND = 'spectrum-fit'
TRAP_COMMAND = 'trap'
TRAP_SCAN_COMMAND = 'trap-scan'
TRANSPORT_COMMAND = 'transport'
LOSS_COMMAND = 'loss'
SWEEP_COMMAND = 'sweep'
REPORT_COMMAND = 'report'
COMMANDS = (
    MODES_COMMAND,
    SPECTRUM_FIT_COMMAND,
    TRAP_COMMAND,
    TRAP_SCAN_COMMAND,
    TRANSPORT_COMMAND,
    LOSS_COMMAND,
    SWEEP_COMMAND,
    REPORT_COMMAND
)

# EXIT CODES
EXIT_SUCCESS = 0
EXIT_CONFIG_ERROR = 2
EXIT_PHYSICS_DOMAIN_ERROR = 3
EXIT_NUMERICAL_ERROR = 4

# SCHEMA
SCHEMA_VERSION = 1

# MODE SOLVER DEFAULTS
DEFAULT_GRID_SPACING = 10e-9
DEFAULT_WINDOW_RHO = 4e-6
DEFAULT_WINDOW_Z = 3e-6
MIN_WINDOW_MARGIN = 1e-6
DEFAULT_MODE_MARGIN = 2
FIELD_DECAY_TOLERANCE = 1e-6
NORMALIZATION_TOLERANCE = 1e-9
EIGS_MAX_ITERATIONS = 5000

# RESONATOR DEFAULTS
MIN_TONE_SEPARATION = 2 * math.pi * 100e6
MIN_SPECTRUM_SAMPLES = 7
DEFAULT_FIT_MAX_EVALUATIONS = 5000

# TRAP DEFAULTS
CASIMIR_POLDER_MASK_HEIGHT = 5e-9
OPEN_TRAP_DEPTH_THRESHOLD = 1e-6 * K_B
TRANSPORT_L_STEP_FRACTION = 1.0 / 20.0
TRANSPORT_POWER_STEP = 0.25e-3

# LOSS DEFAULTS
Q_CEILING = 1e12
DEFAULT_Q_ABSORPTION = 1e8
GEOMETRIC_RADIATION_ETA = 4.0 / 3.0
SIDEWALL_QUADRATURE_ORDER = 64

# SWEEP DEFAULTS
DEFAULT_ATOM_HEIGHT = 100e-9
