from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from ..errors import ConfigError
from ..waveguide.environment import EnvironmentModel

__all__ = [
    "ArrayConfig",
    "ExperimentConfig",
    "GridConfig",
    "NoiseConfig",
    "OutputConfig",
    "PulseConfig",
    "SourceConfig",
    "SweepConfig",
    "config_digest",
    "dump_experiment_config",
    "load_experiment_config",
    "validate_config",
]

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path("config") / "experiment.json"


@dataclass
class SourceConfig:
    depth: float = 99.0


@dataclass
class ArrayConfig:
    """Exactly one of ``hydrophones``, ``spacing`` or ``j_max`` + ``L_eff``."""

    hydrophones: Optional[int] = None
    spacing: Optional[float] = None
    j_max: Optional[int] = None
    L_eff: Optional[float] = None


@dataclass
class SweepConfig:
    kind: str = "frequency"
    start: float = 10.0
    stop: float = 800.0
    step: float = 5.0
    values: Optional[list[float]] = None

    def points(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        count = int(round((self.stop - self.start) / self.step)) + 1
        return self.start + self.step * np.arange(count)


@dataclass
class NoiseConfig:
    snr_db: list[float] = field(default_factory=list)
    varsigma: float = 0.0
    realizations: int = 1
    trials: int = 100
    seed: Optional[int] = None
    complex_noise: bool = True

    @property
    def enabled(self) -> bool:
        return bool(self.snr_db) or self.varsigma > 0


@dataclass
class PulseConfig:
    center_frequencies: list[float] = field(default_factory=lambda: [120.0, 240.0, 420.0])
    spacings: list[float] = field(
        default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 4.5, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0]
    )
    relative_bandwidth: float = 0.5
    time_window: Optional[list[float]] = None
    n_freq: int = 512
    n_time: int = 2048


@dataclass
class GridConfig:
    n_points: Optional[int] = None
    points_per_wavelength: int = 20
    mode_set: str = "discrete"


@dataclass
class OutputConfig:
    directory: str = "runtime"


@dataclass
class ExperimentConfig:
    environment: EnvironmentModel = field(default_factory=EnvironmentModel)
    source: SourceConfig = field(default_factory=SourceConfig)
    ranges: list[float] = field(default_factory=lambda: [1000.0, 10000.0, 40000.0])
    frequency: float = 500.0
    array: ArrayConfig = field(default_factory=lambda: ArrayConfig(hydrophones=20))
    sweep: SweepConfig = field(default_factory=SweepConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    pulse: PulseConfig = field(default_factory=PulseConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["environment"] = self.environment.to_dict()
        return payload

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("Experiment config must be a JSON object")
        _reject_unknown(data, cls, "")
        blocks = {
            "source": SourceConfig,
            "array": ArrayConfig,
            "sweep": SweepConfig,
            "noise": NoiseConfig,
            "pulse": PulseConfig,
            "grid": GridConfig,
            "output": OutputConfig,
        }
        kwargs: Dict[str, Any] = {}
        for name, value in data.items():
            if name in blocks:
                kwargs[name] = _block(blocks[name], value, name)
            elif name == "environment":
                kwargs[name] = EnvironmentModel.from_dict(_block_payload(EnvironmentModel, value, name))
            else:
                kwargs[name] = value
        return cls(**kwargs)

    def with_overrides(
        self, *, seed: Optional[int] = None, out_dir: Optional[str] = None
    ) -> "ExperimentConfig":
        config = self
        if seed is not None:
            config = replace(config, noise=replace(config.noise, seed=seed))
        if out_dir is not None:
            config = replace(config, output=replace(config.output, directory=str(out_dir)))
        return config


def _reject_unknown(payload: Dict[str, Any], cls: type, prefix: str) -> None:
    known = {item.name for item in fields(cls)}
    unknown = sorted(set(payload) - known)
    if unknown:
        paths = ", ".join(f"{prefix}{key}" for key in unknown)
        logger.error("Unknown configuration keys: %s", paths)
        raise ConfigError(f"Unknown configuration keys: {paths}")


def _block_payload(cls: type, value: Any, name: str) -> Dict[str, Any]:
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be a mapping")
    _reject_unknown(value, cls, f"{name}.")
    return value


def _block(cls: type, value: Any, name: str) -> Any:
    return cls(**_block_payload(cls, value, name))


def load_experiment_config(path: Path) -> ExperimentConfig:
    if not path.exists():
        raise FileNotFoundError(f"Missing experiment config at {path}")
    text = path.read_text(encoding="utf-8")
    try:
        content = json.loads(text)
    except json.JSONDecodeError as exc:
        logger.error("Config %s is not valid JSON: %s", path, exc.msg)
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    config = ExperimentConfig.from_dict(content)
    validate_config(config)
    return config


def dump_experiment_config(config: ExperimentConfig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as file:
        json.dump(config.to_dict(), file, ensure_ascii=False, indent=2)
        file.write("\n")


def config_digest(config: ExperimentConfig) -> str:
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


from .validation import validate_config
