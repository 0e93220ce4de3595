"""
Run configuration: a JSON file with model/train/data/output sections.
Precedence is flag > file > default; unknown keys are rejected.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from vfnif.errors import ConfigError
from vfnif.model.config import ModelConfig, checked_keys
from vfnif.model.train import TrainConfig

logger = logging.getLogger(__name__)

DATA_FORMATS = ("jsonl", "pdb")


@dataclass(frozen=True)
class DataConfig:
    train_path: str | None = None
    split_manifest: str | None = None
    format: str = "jsonl"

    def __post_init__(self) -> None:
        if self.format not in DATA_FORMATS:
            raise ConfigError(f"data.format: {self.format!r} is not one of {', '.join(DATA_FORMATS)}")


@dataclass(frozen=True)
class OutputConfig:
    checkpoint_dir: str = "checkpoints"
    log_path: str = "metrics.jsonl"


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    data: DataConfig = field(default_factory=DataConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "train": self.train.to_dict(),
            "data": {f.name: getattr(self.data, f.name) for f in fields(self.data)},
            "output": {f.name: getattr(self.output, f.name) for f in fields(self.output)},
        }

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        data = checked_keys(cls, data, "config")
        try:
            return cls(
                model=ModelConfig.from_dict(data.get("model", {})),
                train=TrainConfig.from_dict(data.get("train", {})),
                data=DataConfig(**checked_keys(DataConfig, data.get("data", {}), "data")),
                output=OutputConfig(**checked_keys(OutputConfig, data.get("output", {}), "output")),
            )
        except TypeError as exc:
            raise ConfigError(f"invalid config value: {exc}") from None

    def with_overrides(
        self,
        seed: int | None = None,
        data_path: str | None = None,
        out: str | None = None,
    ) -> RunConfig:
        cfg = self
        if seed is not None:
            cfg = replace(cfg, train=replace(cfg.train, seed=seed))
        if data_path is not None:
            cfg = replace(cfg, data=replace(cfg.data, train_path=data_path))
        if out is not None:
            cfg = replace(cfg, output=replace(cfg.output, checkpoint_dir=out))
        return cfg


def config_path(flag: str | None) -> str | None:
    return flag or os.getenv("VFN_CONFIG") or None


def load_run_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg}, line {exc.lineno})") from None
    logger.info("Loaded config %s", path)
    return RunConfig.from_dict(raw)
