import argparse
import logging

from vfnif.commands.common import add_config_flag, load_structures, open_checkpoint, run_config
from vfnif.model.train import train

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="train a model from a run config")
    add_config_flag(parser)
    parser.add_argument("--data", help="training data (overrides data.train_path)")
    parser.add_argument("--out", help="checkpoint directory (overrides output.checkpoint_dir)")
    parser.add_argument("--seed", type=int, help="overrides train.seed")
    parser.add_argument("--checkpoint", help="resume from this checkpoint")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = run_config(args).with_overrides(seed=args.seed, data_path=args.data, out=args.out)
    structures = load_structures(cfg.data.train_path, cfg.data.format, cfg.data.split_manifest, "train")
    validation = None
    if cfg.data.split_manifest and cfg.data.format == "jsonl":
        validation = load_structures(
            cfg.data.train_path, cfg.data.format, cfg.data.split_manifest, "validation"
        ) or None

    resume = None
    if args.checkpoint:
        resume, _ = open_checkpoint(args.checkpoint, cfg.model)

    result = train(
        structures,
        cfg.model,
        cfg.train,
        resume=resume,
        validation=validation,
        checkpoint_dir=cfg.output.checkpoint_dir,
        log_path=cfg.output.log_path,
        config_echo=cfg.to_dict(),
    )
    logger.info("Finished at step %d", result.step)
    return 0
