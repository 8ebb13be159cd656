import os
from pathlib import Path
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parents[2]
env_path = BASE_DIR / ".env"

if env_path.exists():
    load_dotenv(env_path)


def _env_bool(key: str, default: str) -> bool:
    return os.getenv(key, default).lower() == "true"


# --- Paths ---
LOG_PATH = os.getenv("HOTSPOTS_LOG_PATH", "data/logs")
OUTPUT_PATH = os.getenv("HOTSPOTS_OUTPUT_PATH", "data/reports")
LOG_LEVEL = os.getenv("HOTSPOTS_LOG_LEVEL", "INFO").upper()
LOG_TO_FILE = _env_bool("HOTSPOTS_LOG_TO_FILE", "true")

# --- Concurrency ---
THREADS = max(1, int(os.getenv("HOTSPOTS_THREADS", "1")))

# --- Solver defaults ---
EIG_TOL = float(os.getenv("HOTSPOTS_EIG_TOL", "1e-9"))
SEED = int(os.getenv("HOTSPOTS_SEED", "0"))
EIG_MAX_ITER = int(os.getenv("HOTSPOTS_EIG_MAX_ITER", "5000"))
BLOCK_SIZE = int(os.getenv("HOTSPOTS_BLOCK_SIZE", "4"))

# --- Verification thresholds ---
SIGN_TOL = float(os.getenv("HOTSPOTS_SIGN_TOL", "5e-3"))
ZERO_TOL = float(os.getenv("HOTSPOTS_ZERO_TOL", "1e-6"))
COMPARE_TOL = float(os.getenv("HOTSPOTS_COMPARE_TOL", "0.02"))
CLASS_TOL = float(os.getenv("HOTSPOTS_CLASS_TOL", "0.1"))
EIG_WINDOW = float(os.getenv("HOTSPOTS_EIG_WINDOW", "0.05"))
CLUSTER_GAP = float(os.getenv("HOTSPOTS_CLUSTER_GAP", "1e-6"))

# --- Report ---
REPORT_SCHEMA = "hotspots-report/1"
