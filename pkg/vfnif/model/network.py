from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import softmax

from vfnif.data.alphabet import NUM_CLASSES
from vfnif.data.structure import BackboneStructure
from vfnif.layers.interactions import mlp
from vfnif.layers.layer import init_layer, vfn_layer
from vfnif.layers.params import init_linear, init_mlp
from vfnif.model.config import ModelConfig
from vfnif.model.graph import N_BACKBONE_ATOMS, ResidueGraph, build_graph, embed_graph
from vfnif.numerics import DiffGraph, ParameterStore, Tensor

logger = logging.getLogger(__name__)

HEAD_INIT_STD = 0.01


@dataclass
class SequencePrediction:
    logits: np.ndarray  # (n, 20)
    predicted: np.ndarray  # (n,)
    tensor: Tensor | None = None
    graph: DiffGraph | None = None

    @property
    def probabilities(self) -> np.ndarray:
        return softmax(self.logits, axis=1)


def layer_prefix(index: int) -> str:
    return f"layers.{index}"


def init_params(cfg: ModelConfig, seed: int = 0) -> ParameterStore:
    rng = np.random.default_rng(seed)
    params = ParameterStore()
    params["embed.node"] = rng.normal(0.0, 1.0, size=(1, cfg.d_v))
    params["embed.free_atoms"] = rng.normal(0.0, 1.0, size=(cfg.d_q - N_BACKBONE_ATOMS, 3))
    if cfg.use_edge_featurizer:
        init_linear(params, rng, "embed.edge", cfg.n_rbf, cfg.d_e)
    for index in range(cfg.n_layers):
        init_layer(params, rng, layer_prefix(index), cfg)
        init_mlp(params, rng, f"context.{index}", cfg.d_v, cfg.d_v, cfg.d_v)
    init_linear(params, rng, "head", cfg.d_v, NUM_CLASSES, std=HEAD_INIT_STD)
    logger.debug("Initialized %d parameters in %d tensors", params.size(), len(params))
    return params


def zero_head(params: ParameterStore) -> None:
    params["head.w"] = np.zeros_like(params["head.w"])
    params["head.b"] = np.zeros_like(params["head.b"])


def global_context_attention(g: DiffGraph, s: Tensor, prefix: str, cfg: ModelConfig) -> Tensor:
    """Gates every node by a sigmoid of an MLP over the mean node feature."""
    context = g.reshape(g.mean(s, axis=0), (1, s.shape[1]))
    return g.multiply(s, g.sigmoid(mlp(g, context, prefix, cfg)))


def encode(g: DiffGraph, graph: ResidueGraph, cfg: ModelConfig) -> Tensor:
    graph = embed_graph(g, graph, cfg)
    for index in range(cfg.n_layers):
        graph = vfn_layer(g, graph, layer_prefix(index), cfg)
        gated = global_context_attention(g, graph.node_features, f"context.{index}", cfg)
        graph = replace(graph, node_features=gated)
    s = graph.node_features
    if cfg.normalize_features:
        s = g.layer_norm(s)
    return g.linear(s, "head")


def forward(
    structure: BackboneStructure | ResidueGraph,
    cfg: ModelConfig,
    params: ParameterStore,
) -> SequencePrediction:
    graph = structure if isinstance(structure, ResidueGraph) else build_graph(structure, cfg)
    g = DiffGraph(params)
    logits = encode(g, graph, cfg)
    values = logits.numpy()
    return SequencePrediction(values, np.argmax(values, axis=1), tensor=logits, graph=g)
