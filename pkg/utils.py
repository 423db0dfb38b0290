import logging
import re
import subprocess
from pathlib import Path
from typing import Union

LOG_FORMAT = "%(asctime)s %(levelname)s %(message)s"
CODE_VERSION = "front-lab 0.3.0"


def sanitize_filename(name: str) -> str:
    # characters some filesystems reject
    return re.sub(r"[\\/:*?\"<>|\s]+", "_", name)[:100]


def ensure_dir(path: Union[str, Path]) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def setup_logging(level: str = "INFO") -> None:
    """Configure the root logger once; later calls only adjust the level."""
    root = logging.getLogger()
    numeric = getattr(logging, str(level).upper(), logging.INFO)
    if not root.handlers:
        logging.basicConfig(level=numeric, format=LOG_FORMAT)
    root.setLevel(numeric)


def code_version() -> str:
    """Version string for report provenance (git revision when available)."""
    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{CODE_VERSION} ({rev.stdout.strip()})"
    except (OSError, subprocess.SubprocessError):
        pass
    return CODE_VERSION
