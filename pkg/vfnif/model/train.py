from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from vfnif.data.alphabet import MASK_INDEX
from vfnif.data.structure import BackboneStructure
from vfnif.errors import ConfigError, DegenerateFrameError, NonFiniteError, StructureError, TrainingDivergedError
from vfnif.model import metric_log
from vfnif.model.checkpoint import Checkpoint, save_checkpoint
from vfnif.model.config import ModelConfig, checked_keys
from vfnif.model.evaluate import evaluate
from vfnif.model.graph import ResidueGraph, build_graph
from vfnif.model.network import encode, init_params
from vfnif.numerics import DiffGraph, OneCycleSchedule, OptimizerState, ParameterStore, adamw_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 8
    max_steps: int = 1000
    peak_lr: float = 1e-3
    weight_decay: float = 0.1
    seed: int = 0
    eval_interval: int = 50
    warmup_fraction: float = 0.3
    workers: int = 1

    def __post_init__(self) -> None:
        for key in ("batch_size", "max_steps", "eval_interval", "workers"):
            if getattr(self, key) < 1:
                raise ConfigError(f"train.{key} must be positive")
        if self.peak_lr <= 0:
            raise ConfigError("train.peak_lr must be positive")
        if self.weight_decay < 0:
            raise ConfigError("train.weight_decay must be non-negative")
        if not 0.0 <= self.warmup_fraction <= 1.0:
            raise ConfigError("train.warmup_fraction must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict, path: str = "train") -> TrainConfig:
        return cls(**checked_keys(cls, data, path))

    def optimizer(self) -> OptimizerState:
        schedule = OneCycleSchedule(
            peak_lr=self.peak_lr, total_steps=self.max_steps, warmup_fraction=self.warmup_fraction
        )
        return OptimizerState(schedule=schedule, weight_decay=self.weight_decay)


@dataclass
class TrainResult:
    params: ParameterStore
    optimizer: OptimizerState
    step: int
    history: list[dict] = field(default_factory=list)


# ── Batching ───────────────────────────────────────────────────────────────

def batch_indices(step: int, n: int, batch_size: int, seed: int) -> list[int]:
    """
    Proteins for a given step. Each epoch is a seeded permutation, so the
    sequence depends only on (seed, step) and resumes exactly.
    """
    width = min(batch_size, n)
    out = []
    for position in range(step * width, (step + 1) * width):
        epoch, offset = divmod(position, n)
        out.append(int(np.random.default_rng([seed, epoch]).permutation(n)[offset]))
    return out


def protein_gradients(
    graph: ResidueGraph,
    cfg: ModelConfig,
    params: ParameterStore,
) -> tuple[float, dict[str, np.ndarray]]:
    g = DiffGraph(params)
    try:
        logits = encode(g, graph, cfg)
        loss = g.cross_entropy(logits, graph.sequence, ignore_index=MASK_INDEX)
        gradients = g.backward(loss)
    except NonFiniteError as exc:
        raise TrainingDivergedError(f"training diverged on {graph.name}: {exc}", protein=graph.name) from exc
    value = loss.item()
    if not np.isfinite(value):
        raise TrainingDivergedError(f"non-finite loss on {graph.name}", protein=graph.name)
    return value, gradients


def _batch_gradients(
    graphs: list[ResidueGraph],
    cfg: ModelConfig,
    params: ParameterStore,
    executor: ThreadPoolExecutor | None,
) -> tuple[float, dict[str, np.ndarray]]:
    if executor is None:
        results = [protein_gradients(graph, cfg, params) for graph in graphs]
    else:
        results = list(executor.map(lambda graph: protein_gradients(graph, cfg, params), graphs))

    total = {name: np.zeros_like(arr) for name, arr in params.items()}
    # summed in batch order regardless of completion order
    for _, gradients in results:
        for name, grad in gradients.items():
            total[name] += grad
    return float(np.mean([loss for loss, _ in results])), total


def _trainable(structures: list[BackboneStructure], cfg: ModelConfig) -> list[ResidueGraph]:
    graphs = []
    for structure in structures:
        try:
            graph = build_graph(structure, cfg)
        except (StructureError, DegenerateFrameError) as exc:
            logger.warning("Skipping %s: %s", structure.name, exc)
            continue
        if np.all(graph.sequence == MASK_INDEX):
            logger.warning("Skipping %s: every residue is masked", structure.name)
            continue
        graphs.append(graph)
    return graphs


# ── Loop ───────────────────────────────────────────────────────────────────

def train(
    structures: list[BackboneStructure],
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    *,
    params: ParameterStore | None = None,
    resume: Checkpoint | None = None,
    validation: list[BackboneStructure] | None = None,
    checkpoint_dir: str | Path | None = None,
    log_path: str | Path | None = None,
    config_echo: dict | None = None,
) -> TrainResult:
    graphs = _trainable(list(structures), model_cfg)
    if not graphs:
        raise StructureError("training set is empty")
    eval_graphs = _trainable(list(validation), model_cfg) if validation else graphs

    optimizer = train_cfg.optimizer()
    if resume is not None:
        params = resume.params
        optimizer.step = resume.step
        optimizer.m = {name: arr.copy() for name, arr in resume.moments_m.items()}
        optimizer.v = {name: arr.copy() for name, arr in resume.moments_v.items()}
        logger.info("Resuming from step %d", resume.step)
    elif params is None:
        params = init_params(model_cfg, seed=train_cfg.seed)
    echo = config_echo if config_echo is not None else {
        "model": model_cfg.to_dict(), "train": train_cfg.to_dict(),
    }

    if log_path is not None:
        metric_log.open_metric_log(log_path, append=resume is not None)
    executor = ThreadPoolExecutor(max_workers=train_cfg.workers) if train_cfg.workers > 1 else None

    history: list[dict] = []
    step = optimizer.step
    logger.info(
        "Training on %d protein(s), %d step(s), batch %d", len(graphs), train_cfg.max_steps, train_cfg.batch_size
    )
    try:
        while step < train_cfg.max_steps:
            batch = [graphs[i] for i in batch_indices(step, len(graphs), train_cfg.batch_size, train_cfg.seed)]
            batch_loss, gradients = _batch_gradients(batch, model_cfg, params, executor)
            try:
                adamw_step(optimizer, params, gradients)
            except NonFiniteError as exc:
                raise TrainingDivergedError(f"training diverged at step {step}: {exc}") from exc
            step = optimizer.step

            if step % train_cfg.eval_interval == 0:
                report = evaluate(eval_graphs, model_cfg, params)
                entry = {
                    "step": step,
                    "loss": batch_loss,
                    "perplexity": report.perplexity,
                    "recovery": report.recovery,
                }
                history.append(entry)
                logger.info(
                    "step %d loss %.4f perplexity %.3f recovery %.1f%%",
                    step, batch_loss, report.perplexity, report.recovery,
                )
                if log_path is not None:
                    metric_log.append_metrics(entry)
                if checkpoint_dir is not None:
                    _save(Path(checkpoint_dir) / f"step_{step:06d}.ckpt", params, echo, optimizer)

        if checkpoint_dir is not None:
            _save(Path(checkpoint_dir) / "last.ckpt", params, echo, optimizer)
    finally:
        if executor is not None:
            executor.shutdown()
        if log_path is not None:
            metric_log.close_metric_log()

    return TrainResult(params=params, optimizer=optimizer, step=step, history=history)


def _save(path: Path, params: ParameterStore, echo: dict, optimizer: OptimizerState) -> None:
    save_checkpoint(path, params, echo, step=optimizer.step, moments_m=optimizer.m, moments_v=optimizer.v)
