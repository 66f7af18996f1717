"""
Pipeline configuration: parameter blocks of every stage, read from and written to YAML
"""

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from loguru import logger

from rigidpath.assumptions import AssumptionParams
from rigidpath.candidates import RansacParams
from rigidpath.clips import ClipParams
from rigidpath.config import DEFAULT_SEED, DEFAULT_THREADS
from rigidpath.errors import ConfigError
from rigidpath.geometry import GeometryParams
from rigidpath.labeling import BackgroundParams, FilterParams
from rigidpath.motiongraph import GraphParams

# section name -> parameter class
SECTIONS = {
    "clips": ClipParams,
    "geometry": GeometryParams,
    "ransac": RansacParams,
    "graph": GraphParams,
    "filter": FilterParams,
    "background": BackgroundParams,
    "assumptions": AssumptionParams,
}


@dataclass
class PipelineConfig:
    """All parameters of a run"""
    clips: ClipParams = field(default_factory=ClipParams)
    geometry: GeometryParams = field(default_factory=GeometryParams)
    ransac: RansacParams = field(default_factory=RansacParams)
    graph: GraphParams = field(default_factory=GraphParams)
    filter: FilterParams = field(default_factory=FilterParams)
    background: BackgroundParams = field(default_factory=BackgroundParams)
    assumptions: AssumptionParams = field(default_factory=AssumptionParams)
    rng_seed: int = DEFAULT_SEED
    threads: int = DEFAULT_THREADS

    def __post_init__(self):
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        self.ransac.rng_seed = self.rng_seed

    def to_dict(self) -> Dict[str, Any]:
        data = {name: asdict(getattr(self, name)) for name in SECTIONS}
        data["ransac"].pop("rng_seed")
        data["rng_seed"] = self.rng_seed
        data["threads"] = self.threads
        return data

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "PipelineConfig":
        """
        Build a config from a possibly partial mapping

        Missing sections and keys take their defaults.

        Raises:
            ConfigError: unknown sections or keys, or values a parameter block rejects
        """
        data = dict(data or {})
        unknown = set(data) - set(SECTIONS) - {"rng_seed", "threads"}
        if unknown:
            raise ConfigError(f"Unknown configuration sections: {', '.join(sorted(unknown))}")

        kwargs: Dict[str, Any] = {}
        for name, params_cls in SECTIONS.items():
            section = data.get(name) or {}
            if not isinstance(section, dict):
                raise ConfigError(f"Section '{name}' must be a mapping")
            allowed = {f.name for f in fields(params_cls)} - ({"rng_seed"} if name == "ransac" else set())
            extra = set(section) - allowed
            if extra:
                raise ConfigError(f"Unknown keys in '{name}': {', '.join(sorted(extra))}")
            try:
                kwargs[name] = params_cls(**section)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Invalid '{name}' parameters: {e}") from e

        try:
            kwargs["rng_seed"] = int(data.get("rng_seed", DEFAULT_SEED))
            kwargs["threads"] = int(data.get("threads", DEFAULT_THREADS))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"rng_seed and threads must be integers: {e}") from e
        return cls(**kwargs)

    def with_overrides(self, seed: Optional[int] = None, threads: Optional[int] = None) -> "PipelineConfig":
        """Copy with command-line values applied on top"""
        data = self.to_dict()
        if seed is not None:
            data["rng_seed"] = seed
        if threads is not None:
            data["threads"] = threads
        return PipelineConfig.from_dict(data)


# Default configuration values
DEFAULT_CONFIG = PipelineConfig().to_dict()


def load_config(path: Optional[Union[str, Path]] = None) -> PipelineConfig:
    """
    Load a YAML configuration, merged over the defaults

    Args:
        path: YAML file; None gives the defaults

    Raises:
        ConfigError: unreadable file, invalid YAML or invalid values
    """
    if path is None:
        logger.info("No configuration file given, using defaults")
        return PipelineConfig()
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read configuration {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in {path}: {e}") from e
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"Configuration {path} must be a mapping")

    config = PipelineConfig.from_dict(data)
    logger.info(f"Loaded configuration from {path}")
    return config


def save_config(config: PipelineConfig, path: Union[str, Path]) -> Path:
    """Write a configuration as YAML"""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(config.to_dict(), f, sort_keys=True)
    logger.info(f"Saved configuration to {path}")
    return path


def dump_config(config: PipelineConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=True)
