import argparse
import logging

from vfnif.commands.common import add_config_flag, run_config
from vfnif.verify.checks import LEVELS, run_checks

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="run the property and oracle checks")
    add_config_flag(parser)
    parser.add_argument("--level", choices=LEVELS, default="fast")
    parser.add_argument("--seed", type=int, default=0)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    results = run_checks(args.level, cfg.model, seed=args.seed)
    for result in results:
        print(f"{'PASS' if result.passed else 'FAIL'}  {result.name}: {result.detail}")

    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} check(s) failed: {', '.join(failed)}")
        return 1
    print(f"all {len(results)} check(s) passed")
    return 0
