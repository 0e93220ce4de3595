from __future__ import annotations

import argparse
import logging
from pathlib import Path

from vfnif.commands.config import RunConfig, config_path, load_run_config
from vfnif.data.jsonl import read_jsonl
from vfnif.data.pdb import read_pdb
from vfnif.data.structure import BackboneStructure
from vfnif.errors import CheckpointError, ConfigError
from vfnif.model.checkpoint import Checkpoint, check_compatible, load_checkpoint
from vfnif.model.config import ModelConfig
from vfnif.model.network import init_params

logger = logging.getLogger(__name__)


def add_config_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run config (falls back to $VFN_CONFIG)")


def run_config(args: argparse.Namespace) -> RunConfig:
    return load_run_config(config_path(getattr(args, "config", None)))


def parse_int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def load_structures(
    path: str | None,
    fmt: str = "jsonl",
    split_manifest: str | None = None,
    split: str = "train",
) -> list[BackboneStructure]:
    """Structures of one split from a JSONL chain set, a PDB file or a directory of PDB files."""
    if not path:
        raise ConfigError("no dataset path given (data.train_path or --data)")
    source = Path(path)
    if not source.exists():
        raise ConfigError(f"dataset not found: {source}")
    if fmt == "pdb" or source.suffix.lower() == ".pdb" or source.is_dir():
        files = sorted(source.glob("*.pdb")) if source.is_dir() else [source]
        return [read_pdb(f) for f in files]
    if split_manifest and not Path(split_manifest).exists():
        raise ConfigError(f"split manifest not found: {split_manifest}")
    dataset = read_jsonl(source, split_manifest)
    return dataset.split(split)


def open_checkpoint(path: str, model_cfg: ModelConfig | None = None) -> tuple[Checkpoint, ModelConfig]:
    """Loads a checkpoint and the model config it was trained with, checking parameter shapes."""
    checkpoint = load_checkpoint(path)
    if model_cfg is None:
        echoed = checkpoint.config.get("model")
        if echoed is None:
            raise CheckpointError(f"{path}: header has no model config")
        model_cfg = ModelConfig.from_dict(echoed)
    check_compatible(init_params(model_cfg), checkpoint)
    return checkpoint, model_cfg
