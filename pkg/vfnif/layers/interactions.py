from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from vfnif.errors import ShapeError
from vfnif.numerics import DiffGraph, Tensor

if TYPE_CHECKING:
    from vfnif.model.config import ModelConfig
    from vfnif.model.graph import ResidueGraph


@dataclass(frozen=True)
class NodeUpdate:
    node_features: Tensor
    attention: Tensor  # (n, k, heads)


def activate(g: DiffGraph, x: Tensor, cfg: ModelConfig) -> Tensor:
    return g.gelu(x) if cfg.activation.value == "gelu" else g.relu(x)


def mlp(g: DiffGraph, x: Tensor, prefix: str, cfg: ModelConfig, bias: bool = True) -> Tensor:
    hidden = activate(g, g.linear(x, f"{prefix}.0"), cfg)
    if bias:
        return g.linear(hidden, f"{prefix}.1")
    return g.matmul(hidden, g.param(f"{prefix}.1.w"))


def _edge_inputs(g: DiffGraph, graph: ResidueGraph) -> tuple[Tensor, Tensor]:
    s = graph.node_features
    return g.gather_rows(s, graph.self_index), g.gather_rows(s, graph.neighbors)


def _with_geometry(parts: list[Tensor], geometry: Tensor | None) -> list[Tensor]:
    return parts if geometry is None else parts[:-1] + [geometry, parts[-1]]


# ── Node attention ─────────────────────────────────────────────────────────

def node_interaction(
    g: DiffGraph,
    graph: ResidueGraph,
    geometry: Tensor | None,
    prefix: str,
    cfg: ModelConfig,
) -> NodeUpdate:
    """
    Multi-head attention of every node over its neighbor list. Attention
    logits see s_i, s_j, g_ij, e_ij; values see s_j, g_ij, e_ij. The
    head-concatenated aggregate goes through the output MLP as a residual
    increment, layer-normed first when cfg.normalize_features is set.

    The logit MLP has no output bias; a per-head shift cancels in the softmax.
    """
    n, k = graph.neighbors.shape
    if k == 0:
        raise ShapeError("node_interaction: empty neighbor lists")
    s_i, s_j = _edge_inputs(g, graph)
    e = graph.edge_features

    logits = mlp(g, g.concat(_with_geometry([s_i, s_j, e], geometry)), f"{prefix}.attn", cfg, bias=False)
    attention = g.softmax(logits, axis=1)

    values = mlp(g, g.concat(_with_geometry([s_j, e], geometry)), f"{prefix}.value", cfg)
    values = g.reshape(values, (n, k, cfg.heads, cfg.head_width))
    weighted = g.multiply(values, g.reshape(attention, (n, k, cfg.heads, 1)))
    aggregate = g.reshape(g.sum(weighted, axis=1), (n, cfg.d_v))

    if cfg.normalize_features:
        aggregate = g.layer_norm(aggregate)
    update = mlp(g, aggregate, f"{prefix}.node_out", cfg)
    return NodeUpdate(g.add(graph.node_features, update), attention)


# ── Edge update ────────────────────────────────────────────────────────────

def edge_interaction(
    g: DiffGraph,
    graph: ResidueGraph,
    geometry: Tensor | None,
    prefix: str,
    cfg: ModelConfig,
) -> Tensor:
    s_i, s_j = _edge_inputs(g, graph)
    e = graph.edge_features
    if not cfg.edge_uses_geometry:
        geometry = None
    update = mlp(g, g.concat(_with_geometry([s_i, s_j, e], geometry)), f"{prefix}.edge", cfg)
    return g.add(e, update)
