import argparse
import json
import logging
from pathlib import Path

from vfnif.commands.common import add_config_flag, open_checkpoint, run_config
from vfnif.data.fasta import write_fasta
from vfnif.data.pdb import read_pdb
from vfnif.errors import ConfigError
from vfnif.model.network import forward

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("predict", help="design a sequence for a backbone")
    add_config_flag(parser)
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--data", required=True, help="input PDB file")
    parser.add_argument("--out", required=True, help="output FASTA")
    parser.add_argument("--logits", help="also dump the n x 20 logits as JSON")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    checkpoint, model_cfg = open_checkpoint(args.checkpoint, cfg.model if args.config else None)
    if not Path(args.data).exists():
        raise ConfigError(f"structure not found: {args.data}")

    structure = read_pdb(args.data)
    pred = forward(structure, model_cfg, checkpoint.params)
    write_fasta([pred.predicted], [structure.name], args.out)
    logger.info("Wrote %d residue(s) for %s to %s", len(pred.predicted), structure.name, args.out)

    if args.logits:
        Path(args.logits).write_text(json.dumps({
            "name": structure.name,
            "residue_ids": structure.residue_ids,
            "logits": pred.logits.tolist(),
        }))
    return 0
