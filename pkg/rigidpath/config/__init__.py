"""
Configuration package for rigidpath
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Logging
LOG_LEVEL = os.getenv("RIGIDPATH_LOG_LEVEL", "INFO")
LOG_DIR = Path(os.getenv("RIGIDPATH_LOG_DIR", "logs"))

# Runtime defaults (config files and CLI flags win over these)
DEFAULT_THREADS = int(os.getenv("RIGIDPATH_THREADS", 1))
DEFAULT_SEED = int(os.getenv("RIGIDPATH_SEED", 0))

def ensure_dir_exists(directory):
    """Ensure a directory exists, creating it if necessary."""
    Path(directory).mkdir(parents=True, exist_ok=True)
    return directory
