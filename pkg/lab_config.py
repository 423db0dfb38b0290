"""
Runtime settings and experiment configuration files.

Settings come from the environment (with .env support). Experiment files are
a small key = value format: top-level scalars shared by every experiment and
one [table] per experiment, e.g.

    f = cubic(0.3)
    seed = 7

    [exp_spreading]
    radius = 12
    eps = 0.08
"""

import logging
import math
import os
import re
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

from dotenv import load_dotenv

from errors import ConfigError, FrontLabError
from nonlinearity import parse_nonlinearity

logger = logging.getLogger(__name__)

RESOLUTIONS = ("smoke", "full")
GRID_KEYS = ("shape", "origin")
NUMERIC_KEYS = ("h", "dt", "t_end", "snapshot_every") + GRID_KEYS
GENERAL_KEYS = ("f", "seed", "out_dir", "resolution")
TOP_LEVEL_KEYS = GENERAL_KEYS + NUMERIC_KEYS

_KEY_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")
_TABLE_RE = re.compile(r"^\[\s*([A-Za-z_][A-Za-z0-9_]*)\s*\]$")
_INT_RE = re.compile(r"^[+-]?\d+$")


# ============================================================================
# RUNTIME SETTINGS
# ============================================================================

@dataclass(frozen=True)
class LabSettings:
    threads: int
    out_dir: str
    log_level: str
    resolution: str


_settings: Optional[LabSettings] = None


def _env_threads() -> int:
    raw = os.getenv("FRONTLAB_THREADS", "").strip()
    if not raw:
        return max(1, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning(f"[CONFIG] [WARN] FRONTLAB_THREADS={raw!r} is not an integer; using 1")
        return 1


def get_settings() -> LabSettings:
    """Load settings once per process (.env first, then the environment)."""
    global _settings
    if _settings is None:
        load_dotenv()
        resolution = os.getenv("FRONTLAB_RESOLUTION", "smoke").strip().lower()
        if resolution not in RESOLUTIONS:
            logger.warning(f"[CONFIG] [WARN] FRONTLAB_RESOLUTION={resolution!r} unknown; using smoke")
            resolution = "smoke"
        _settings = LabSettings(
            threads=_env_threads(),
            out_dir=os.getenv("FRONTLAB_OUT_DIR", "runs"),
            log_level=os.getenv("FRONTLAB_LOG_LEVEL", "INFO").upper(),
            resolution=resolution,
        )
    return _settings


def _reset_settings():
    """Forget cached settings (the next get_settings() re-reads the environment)."""
    global _settings
    _settings = None


# ============================================================================
# EXPERIMENT CONFIG
# ============================================================================

@dataclass
class ExperimentConfig:
    """
    One experiment run. Numerics left as None fall back to the experiment's
    smoke/full profile; `params` holds only explicitly given parameters.
    """
    name: str
    f: str
    seed: int = 0
    out_dir: str = "runs"
    resolution: str = "smoke"
    h: Optional[float] = None
    dt: Optional[float] = None
    t_end: Optional[float] = None
    snapshot_every: Optional[float] = None
    shape: Optional[Tuple[int, ...]] = None
    origin: Optional[Tuple[float, ...]] = None
    params: Dict[str, Any] = field(default_factory=dict)

    def numerics(self) -> Dict[str, Any]:
        return {k: getattr(self, k) for k in NUMERIC_KEYS if getattr(self, k) is not None}


def _strip_comment(line: str) -> str:
    in_string = False
    escaped = False
    for i, ch in enumerate(line):
        if escaped:
            escaped = False
        elif ch == "\\" and in_string:
            escaped = True
        elif ch == '"':
            in_string = not in_string
        elif ch == "#" and not in_string:
            return line[:i]
    return line


def _parse_number(text: str):
    if _INT_RE.match(text):
        return int(text)
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(text)
    return value


def parse_value(raw: str, line: Optional[int] = None) -> Any:
    """Quoted string, number, boolean, [number list] or a bare expression."""
    text = raw.strip()
    if not text:
        raise ConfigError("missing value", line)
    if text.startswith('"'):
        if len(text) < 2 or not text.endswith('"'):
            raise ConfigError(f"unterminated string {text}", line)
        body = text[1:-1]
        return re.sub(r'\\(["\\])', r"\1", body)
    if text.startswith("["):
        if not text.endswith("]"):
            raise ConfigError(f"unterminated list {text}", line)
        inner = text[1:-1].strip()
        if not inner:
            return []
        try:
            return [_parse_number(part.strip()) for part in inner.split(",")]
        except ValueError:
            raise ConfigError(f"lists hold numbers only: {text}", line)
    if text in ("true", "false"):
        return text == "true"
    try:
        return _parse_number(text)
    except ValueError:
        return text


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(repr(v) for v in value) + "]"
    escaped = str(value).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _apply(cfg: ExperimentConfig, key: str, value: Any, line: Optional[int]):
    try:
        if key == "f":
            if not isinstance(value, str):
                raise ConfigError("f must be a nonlinearity expression such as cubic(0.3)", line)
            cfg.f = value
        elif key == "seed":
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"seed must be an integer, got {value!r}", line)
            cfg.seed = value
        elif key == "out_dir":
            cfg.out_dir = str(value)
        elif key == "resolution":
            if value not in RESOLUTIONS:
                raise ConfigError(f"resolution must be one of {RESOLUTIONS}, got {value!r}", line)
            cfg.resolution = value
        elif key in ("shape", "origin"):
            if not isinstance(value, list) or not 1 <= len(value) <= 2:
                raise ConfigError(f"{key} must be a list of one or two numbers", line)
            cast = int if key == "shape" else float
            setattr(cfg, key, tuple(cast(v) for v in value))
        elif key in NUMERIC_KEYS:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
                raise ConfigError(f"{key} must be a positive number, got {value!r}", line)
            setattr(cfg, key, float(value))
        else:
            cfg.params[key] = value
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {exc}", line) from exc


def parse_configs(text: str, registry=None) -> List[ExperimentConfig]:
    """
    All experiments of a config file, in file order.

    Raises:
        ConfigError: syntax errors, unknown experiments or keys, missing f,
            or parameters violating an experiment's preconditions
    """
    if registry is None:
        from experiments.registry import get_registry
        registry = get_registry()
    settings = get_settings()

    top: List[Tuple[str, Any, int]] = []
    tables: List[Tuple[str, int, List[Tuple[str, Any, int]]]] = []
    seen_top = set()
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw_line).strip()
        if not line:
            continue
        table = _TABLE_RE.match(line)
        if table:
            name = table.group(1)
            if name not in registry.names():
                raise ConfigError(f"unknown experiment [{name}]; known: {', '.join(registry.names())}", number)
            if any(t[0] == name for t in tables):
                raise ConfigError(f"duplicate experiment [{name}]", number)
            tables.append((name, number, []))
            continue
        match = _KEY_RE.match(line)
        if not match:
            raise ConfigError(f"expected `key = value` or `[experiment]`, got {line!r}", number)
        key, value = match.group(1), parse_value(match.group(2), number)
        if not tables:
            if key not in TOP_LEVEL_KEYS:
                raise ConfigError(f"unknown top-level key {key!r}", number)
            if key in seen_top:
                raise ConfigError(f"duplicate key {key!r}", number)
            seen_top.add(key)
            top.append((key, value, number))
        else:
            name, _, entries = tables[-1]
            allowed = set(TOP_LEVEL_KEYS) | set(registry.get(name).param_names())
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} for [{name}]", number)
            if any(k == key for k, _, _ in entries):
                raise ConfigError(f"duplicate key {key!r} in [{name}]", number)
            entries.append((key, value, number))

    if not tables:
        raise ConfigError("no [experiment] table found")

    configs = []
    for name, header_line, entries in tables:
        cfg = ExperimentConfig(name=name, f="", out_dir=settings.out_dir,
                               resolution=settings.resolution)
        for key, value, number in top + entries:
            _apply(cfg, key, value, number)
        if not cfg.f:
            raise ConfigError("missing required key f", header_line)
        try:
            parse_nonlinearity(cfg.f)
            registry.get(name).validate(cfg)
        except FrontLabError as exc:
            line = next((n for k, _, n in entries + top if re.search(rf"\b{re.escape(k)}\b", str(exc))),
                        header_line)
            raise ConfigError(f"[{name}] {exc}", line) from exc
        configs.append(cfg)
    logger.info(f"[CONFIG] [OK] parsed {len(configs)} experiment(s): {', '.join(c.name for c in configs)}")
    return configs


def parse_config(text: str, registry=None) -> ExperimentConfig:
    """Exactly one experiment; ConfigError otherwise."""
    configs = parse_configs(text, registry)
    if len(configs) != 1:
        raise ConfigError(f"expected one experiment, found {len(configs)}")
    return configs[0]


def serialize(cfg: ExperimentConfig) -> str:
    """Text that parse_config turns back into an equal config."""
    lines = [f"f = {format_value(cfg.f)}",
             f"seed = {format_value(cfg.seed)}",
             f"out_dir = {format_value(cfg.out_dir)}",
             f"resolution = {format_value(cfg.resolution)}"]
    for key, value in cfg.numerics().items():
        lines.append(f"{key} = {format_value(value)}")
    lines.append("")
    lines.append(f"[{cfg.name}]")
    for key in sorted(cfg.params):
        lines.append(f"{key} = {format_value(cfg.params[key])}")
    return "\n".join(lines) + "\n"


def with_params(cfg: ExperimentConfig, **params) -> ExperimentConfig:
    merged = dict(cfg.params)
    merged.update({k: v for k, v in params.items() if v is not None})
    return replace(cfg, params=merged)
