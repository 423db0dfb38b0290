"""Dispatch of one configured experiment to its pipeline."""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from errors import FrontLabError
from experiments.registry import ExperimentRegistry, get_registry
from experiments.report import Criterion, ExperimentReport, write_report
from lab_config import ExperimentConfig, get_settings, serialize
from nonlinearity import Nonlinearity, parse_nonlinearity
from utils import code_version, ensure_dir, sanitize_filename

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    """Everything a pipeline needs: resolved parameters, f, output folder, rng."""
    cfg: ExperimentConfig
    params: Dict[str, Any]
    f: Nonlinearity
    out_dir: Path
    report: ExperimentReport
    workers: int
    rng: np.random.Generator = field(repr=False)

    def __getitem__(self, key: str) -> Any:
        return self.params[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)


def run_experiment(cfg: ExperimentConfig, registry: Optional[ExperimentRegistry] = None,
                   workers: Optional[int] = None,
                   folder: Optional[Union[str, Path]] = None) -> ExperimentReport:
    """
    Run one experiment and write its report into `folder`
    (default <out_dir>/<experiment name>).

    A FrontLabError raised by the pipeline is recorded as a failed `error`
    criterion; any other exception propagates.
    """
    registry = registry or get_registry()
    entry = registry.get(cfg.name)
    params = entry.resolve(cfg)
    out_dir = ensure_dir(Path(folder) if folder is not None else Path(cfg.out_dir) / sanitize_filename(cfg.name))
    report = ExperimentReport(name=cfg.name, claim=entry.claim, config_text=serialize(cfg),
                              code_version=code_version())
    ctx = RunContext(cfg=cfg, params=params, f=parse_nonlinearity(cfg.f), out_dir=out_dir,
                     report=report, workers=workers or get_settings().threads,
                     rng=np.random.default_rng(cfg.seed))

    logger.info(f"[REGISTRY] running {cfg.name} ({cfg.resolution}) with f={cfg.f}")
    start = time.perf_counter()
    try:
        entry.runner(ctx)
    except FrontLabError as exc:
        logger.error(f"[REGISTRY] [ERROR] {cfg.name}: {type(exc).__name__}: {exc}")
        report.add(Criterion("error", False, float("nan"), "no error", f"{type(exc).__name__}: {exc}"))
    report.wall_time = time.perf_counter() - start

    write_report(report, out_dir)
    return report
