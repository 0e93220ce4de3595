import argparse
import csv
import logging
import sys
import time
from dataclasses import replace

import numpy as np

from vfnif.commands.common import add_config_flag, parse_int_list, run_config
from vfnif.data.synthetic import synthetic_backbone
from vfnif.model.network import forward, init_params

logger = logging.getLogger(__name__)

HEADER = ("layers", "residues", "median_ms", "p95_ms")


def register(subparsers) -> None:
    parser = subparsers.add_parser("bench", help="forward-pass timing table as CSV")
    add_config_flag(parser)
    parser.add_argument("--layers", type=parse_int_list, default=[5, 15])
    parser.add_argument("--sizes", type=parse_int_list, default=[50, 100])
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="CSV path (default stdout)")
    parser.set_defaults(handler=run)


def time_forward(model_cfg, n_residues: int, repeats: int, seed: int = 0) -> tuple[float, float]:
    params = init_params(model_cfg, seed=seed)
    structure = synthetic_backbone(n_residues, seed=seed)
    forward(structure, model_cfg, params)  # warm-up
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        forward(structure, model_cfg, params)
        samples.append((time.perf_counter() - start) * 1000.0)
    return float(np.median(samples)), float(np.percentile(samples, 95))


def run(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    rows = []
    for layers in args.layers:
        for size in args.sizes:
            median, p95 = time_forward(replace(cfg.model, n_layers=layers), size, args.repeats, args.seed)
            logger.info("%d layers, %d residues: median %.1f ms", layers, size, median)
            rows.append((layers, size, f"{median:.3f}", f"{p95:.3f}"))

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        writer.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return 0
