"""Configuration settings for the fracmin numerics toolkit"""
import os
from pathlib import Path

# Try to load dotenv, but don't fail if it's not installed
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    # Plain environment variables still work
    pass

# Base paths
BASE_DIR = Path(__file__).parent
DATA_DIR = BASE_DIR / "data"
LOGS_DIR = BASE_DIR / "logs"

try:
    LOGS_DIR.mkdir(exist_ok=True)
except OSError:
    # Read-only checkouts still run; file logging is simply unavailable
    pass

TOOL_VERSION = "1.0.0"

# Parallelism
THREADS = int(os.getenv("FRACMIN_THREADS", "1"))

# Reproducibility
DEFAULT_SEED = int(os.getenv("FRACMIN_SEED", "20240601"))

# Quadrature defaults
REL_TOL = float(os.getenv("FRACMIN_REL_TOL", "1e-6"))
ABS_TOL = float(os.getenv("FRACMIN_ABS_TOL", "1e-9"))
EXCISION_START = float(os.getenv("FRACMIN_EXCISION_START", "1e-4"))
TAIL_RADIUS = float(os.getenv("FRACMIN_TAIL_RADIUS", "1e3"))
MAX_EVALUATIONS = int(os.getenv("FRACMIN_MAX_EVALUATIONS", "50000000"))

# Monte-Carlo defaults (samples per shell or stratum)
SAMPLES = int(os.getenv("FRACMIN_SAMPLES", "4096"))

# Randomized fixtures of the comparison-identity suite
COMPARISON_FIXTURES = int(os.getenv("FRACMIN_COMPARISON_FIXTURES", "50"))

# Logging
LOG_LEVEL = os.getenv("FRACMIN_LOG_LEVEL", "INFO").upper()
LOG_TO_FILE = os.getenv("FRACMIN_LOG_FILE", "false").lower() == "true"
