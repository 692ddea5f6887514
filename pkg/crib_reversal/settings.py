"""
Settings for the CRIB reversal toolkit.

Values come from the environment (optionally a .env file) with defaults.
"""
import os

from dotenv import load_dotenv

load_dotenv()

OUTPUT_DIR = os.getenv('CRIB_OUTPUT_DIR', 'results')

DEFAULT_SEED = int(os.getenv('CRIB_SEED', '20080611'))

LOG_LEVEL = os.getenv('CRIB_LOG_LEVEL', 'INFO').upper()

# Laplace solver
SOLVER_TOLERANCE = float(os.getenv('CRIB_SOLVER_TOLERANCE', '1e-10'))
SOLVER_MAX_ITER = int(os.getenv('CRIB_SOLVER_MAX_ITER', '20000'))

# Preset registry; None means the packaged data/presets.json
PRESETS_FILE = os.getenv('CRIB_PRESETS_FILE', None)

# Ions are not shipped with an absorption coefficient, so presets fall back to this
DEFAULT_ALPHA_PER_M = 1000.0
