"""
Experiment Registry - named, runnable experiments with smoke/full profiles.
Pipelines register themselves with the `register` decorator; the CLI and the
config parser look them up here.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from errors import ConfigError, DomainError
from lab_config import GRID_KEYS, NUMERIC_KEYS
from nonlinearity import Nonlinearity, parse_nonlinearity

# ============================================================================
# LOGGER SETUP
# ============================================================================

logger = logging.getLogger(__name__)


# ============================================================================
# EXPERIMENT ENTRY
# ============================================================================

@dataclass
class Experiment:
    name: str
    runner: Callable[[Any], None]
    claim: str
    profiles: Dict[str, Dict[str, Any]]
    validator: Optional[Callable[[Dict[str, Any]], None]] = field(default=None, repr=False)
    f_validator: Optional[Callable[[Nonlinearity], None]] = field(default=None, repr=False)
    grid_keys: Tuple[str, ...] = ()

    def param_names(self) -> List[str]:
        names = set()
        for profile in self.profiles.values():
            names.update(k for k in profile if k not in NUMERIC_KEYS)
        return sorted(names)

    def resolve(self, cfg) -> Dict[str, Any]:
        """Profile for cfg.resolution, overridden by the config's numerics and params."""
        if cfg.resolution not in self.profiles:
            raise DomainError(f"{self.name} has no {cfg.resolution!r} profile")
        params = dict(self.profiles[cfg.resolution])
        params.update(cfg.numerics())
        params.update(cfg.params)
        return params

    def validate(self, cfg):
        """Run the precondition checks on f and the resolved parameters (raises DomainError)."""
        for key in GRID_KEYS:
            if getattr(cfg, key) is not None and key not in self.grid_keys:
                raise DomainError(f"{key} is not used by {self.name}; its grid is sized from the run")
        if self.f_validator is not None:
            self.f_validator(parse_nonlinearity(cfg.f))
        if self.validator is not None:
            self.validator(self.resolve(cfg))


# ============================================================================
# REGISTRY
# ============================================================================

class ExperimentRegistry:
    """Name -> Experiment map; registration order is the run order."""

    def __init__(self):
        self._experiments: Dict[str, Experiment] = {}

    def add(self, experiment: Experiment):
        if experiment.name in self._experiments:
            raise DomainError(f"experiment {experiment.name!r} registered twice")
        missing = {"smoke", "full"} - set(experiment.profiles)
        if missing:
            raise DomainError(f"experiment {experiment.name!r} lacks profiles {sorted(missing)}")
        self._experiments[experiment.name] = experiment
        logger.debug(f"[REGISTRY] [OK] {experiment.name} registered")

    def get(self, name: str) -> Experiment:
        try:
            return self._experiments[name]
        except KeyError:
            raise ConfigError(f"unknown experiment {name!r}; known: {', '.join(self.names())}") from None

    def names(self) -> List[str]:
        return list(self._experiments)

    def print_status(self):
        """Print the registered experiments and their claims."""
        print("\n" + "=" * 70)
        print("EXPERIMENT REGISTRY")
        print("=" * 70)
        for exp in self._experiments.values():
            print(f"  {exp.name:<24} {exp.claim}")
        print("=" * 70 + "\n")


# ============================================================================
# SINGLETON INSTANCE
# ============================================================================

_registry_instance: Optional[ExperimentRegistry] = None


def _instance() -> ExperimentRegistry:
    global _registry_instance
    if _registry_instance is None:
        _registry_instance = ExperimentRegistry()
    return _registry_instance


def get_registry() -> ExperimentRegistry:
    """
    Get the experiment registry singleton, with every pipeline loaded.

    Returns:
        ExperimentRegistry instance
    """
    from experiments import pipelines  # noqa: F401  (registers on import)
    return _instance()


def register(name: str, claim: str, smoke: Dict[str, Any], full: Dict[str, Any],
             validator: Optional[Callable[[Dict[str, Any]], None]] = None,
             f_validator: Optional[Callable[[Nonlinearity], None]] = None,
             grid_keys: Tuple[str, ...] = ()):
    """
    Decorator adding a pipeline function to the registry.

    grid_keys names the config keys among shape and origin that the pipeline
    reads; any other experiment rejects them.
    """
    def decorator(runner: Callable[[Any], None]):
        _instance().add(Experiment(name=name, runner=runner, claim=claim,
                                   profiles={"smoke": dict(smoke), "full": dict(full)},
                                   validator=validator, f_validator=f_validator,
                                   grid_keys=tuple(grid_keys)))
        return runner
    return decorator
