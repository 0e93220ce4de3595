from vfnif.model.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from vfnif.model.config import Activation, AtomUpdateMode, ModelConfig, VMlpVariant
from vfnif.model.evaluate import evaluate
from vfnif.model.graph import ResidueGraph, build_graph, embed_graph, init_virtual_atoms, knn
from vfnif.model.metrics import EvalReport, Metrics, loss, metrics
from vfnif.model.network import (
    SequencePrediction,
    encode,
    forward,
    global_context_attention,
    init_params,
    zero_head,
)
from vfnif.model.train import TrainConfig, TrainResult, train

__all__ = [
    "Activation",
    "AtomUpdateMode",
    "Checkpoint",
    "EvalReport",
    "Metrics",
    "ModelConfig",
    "ResidueGraph",
    "SequencePrediction",
    "TrainConfig",
    "TrainResult",
    "VMlpVariant",
    "build_graph",
    "embed_graph",
    "encode",
    "evaluate",
    "forward",
    "global_context_attention",
    "init_params",
    "init_virtual_atoms",
    "knn",
    "load_checkpoint",
    "loss",
    "metrics",
    "save_checkpoint",
    "train",
    "zero_head",
]
