import argparse
import json
import logging
from pathlib import Path

from vfnif.commands.common import add_config_flag, load_structures, open_checkpoint, run_config
from vfnif.errors import ConfigError
from vfnif.model.evaluate import evaluate

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("eval", help="perplexity and recovery of a checkpoint")
    add_config_flag(parser)
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--data", help="evaluation data (overrides data.train_path)")
    parser.add_argument("--out", help="write the JSON report here as well")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = run_config(args).with_overrides(data_path=args.data)
    model_cfg = cfg.model if args.config else None
    checkpoint, model_cfg = open_checkpoint(args.checkpoint, model_cfg)

    split = "test" if cfg.data.split_manifest else "train"
    structures = load_structures(cfg.data.train_path, cfg.data.format, cfg.data.split_manifest, split)
    if not structures:
        raise ConfigError(f"no structures to evaluate in {cfg.data.train_path} ({split} split)")

    report = evaluate(structures, model_cfg, checkpoint.params).to_dict()
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0
