# Paths, limits and defaults shared across fusecalc.
#
# Two environment overrides, resolved once at import:
#   FUSECALC_LOG_DIR    - when set, a rotating log file is written there in
#                         addition to stderr (see main.setup_logging).
#   FUSECALC_MAX_STEPS  - default closure budget for model computation.
# Nothing in fusecalc is randomised, so there is no seed.

import os

APP_NAME = "fusecalc"
APP_VERSION = "1.0.0"

PROGRAM_SUFFIX = '.fmp'
EXPECTED_SUFFIX = '.expected'

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
LOG_FILE_NAME = 'fusecalc.log'
LOG_FILE_MAX_BYTES = 1 * 1024 * 1024
LOG_FILE_BACKUPS = 5

# Engine: fired closures per run before giving up
FALLBACK_MAX_STEPS = 200_000

# Tableau budget per satisfiability check
DEFAULT_DL_MAX_NODES = 2_000
DEFAULT_DL_MAX_STEPS = 50_000

# Ground oracle refuses programs with more disjunctive closures than this
MAX_ORACLE_DISJUNCTIONS = 20

# Running from source: the repo root (parent of this package)
APP_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS_DIR = os.path.join(APP_DIR, 'corpus')


def _default_log_dir():
    return os.environ.get('FUSECALC_LOG_DIR') or None


def _default_max_steps():
    override = os.environ.get('FUSECALC_MAX_STEPS')
    if override:
        try:
            value = int(override)
            if value > 0:
                return value
        except ValueError:
            pass
    return FALLBACK_MAX_STEPS


LOG_DIR = _default_log_dir()
DEFAULT_MAX_STEPS = _default_max_steps()
