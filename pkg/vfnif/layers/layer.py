from __future__ import annotations

import logging
from dataclasses import replace
from typing import TYPE_CHECKING

import numpy as np

from vfnif.errors import ConfigError, NonFiniteError
from vfnif.layers import atoms as atom_updates
from vfnif.layers import interactions, operator
from vfnif.layers.params import (
    VectorFieldWeights,
    init_linear,
    init_mlp,
    init_vector_field,
    init_vmlp,
)
from vfnif.numerics import DiffGraph, ParameterStore

if TYPE_CHECKING:
    from vfnif.model.config import ModelConfig
    from vfnif.model.graph import ResidueGraph

logger = logging.getLogger(__name__)

MAX_ATOM_MAGNITUDE = 1e4


def init_layer(params: ParameterStore, rng: np.random.Generator, prefix: str, cfg: ModelConfig) -> None:
    d_v, d_e, d_g = cfg.d_v, cfg.d_e, cfg.d_g
    d_edge_geo = d_g if cfg.edge_uses_geometry else 0
    if cfg.use_vector_field:
        init_vector_field(params, rng, f"{prefix}.vf", cfg.d_q)
    init_mlp(params, rng, f"{prefix}.attn", 2 * d_v + d_g + d_e, d_v, cfg.heads, bias=False)
    init_mlp(params, rng, f"{prefix}.value", d_v + d_g + d_e, d_v, d_v)
    init_mlp(params, rng, f"{prefix}.node_out", d_v, d_v, d_v)
    init_mlp(params, rng, f"{prefix}.edge", 2 * d_v + d_edge_geo + d_e, d_v, d_e)
    if cfg.atom_update_mode.value == "linear":
        init_linear(params, rng, f"{prefix}.atoms", d_v, 3 * cfg.d_q)
    elif cfg.vmlp_variant.value == "vmlp":
        init_vmlp(params, rng, f"{prefix}.vmlp", cfg.d_q)
    elif cfg.vmlp_variant.value == "mlp":
        init_mlp(params, rng, f"{prefix}.atom_mlp", 6 * cfg.d_q, d_v, 3 * cfg.d_q)


def _atom_update_key(prefix: str, mode: str, cfg: ModelConfig) -> str | None:
    if mode == "linear":
        return f"{prefix}.atoms.w"
    if mode != "aggregate":
        raise ConfigError(f"unknown atom update mode {mode!r}")
    return {
        "vmlp": f"{prefix}.vmlp.wc",
        "mlp": f"{prefix}.atom_mlp.0.w",
    }.get(cfg.vmlp_variant.value)


def _check_atom_params(g: DiffGraph, prefix: str, mode: str, cfg: ModelConfig) -> None:
    key = _atom_update_key(prefix, mode, cfg)
    if key is not None and (g.params is None or key not in g.params):
        raise ConfigError(
            f"{prefix}: atom update mode {mode!r} needs parameter {key!r}, "
            "which this layer was not initialized with"
        )


def vfn_layer(
    g: DiffGraph,
    graph: ResidueGraph,
    prefix: str,
    cfg: ModelConfig,
    atom_update_mode: str | None = None,
) -> ResidueGraph:
    """
    One VFN layer: vector field features for every directed edge, node
    attention, edge update against the new node features, then the atom
    update. Returns a new graph; the input is left untouched.
    """
    mode = atom_update_mode or cfg.atom_update_mode.value
    _check_atom_params(g, prefix, mode, cfg)
    n, d_q = graph.n, cfg.d_q

    neighbor_atoms = operator.transform_neighbor_atoms(g, graph.atoms, graph)
    geometry = None
    if cfg.use_vector_field:
        qi = g.reshape(graph.atoms, (n, 1, d_q, 3))
        h = operator.vector_field(g, qi, neighbor_atoms, VectorFieldWeights.bind(g, f"{prefix}.vf"))
        geometry = operator.featurize(g, h, cfg)

    node = interactions.node_interaction(g, graph, geometry, prefix, cfg)
    graph = replace(graph, node_features=node.node_features, attention=node.attention)
    edges = interactions.edge_interaction(g, graph, geometry, prefix, cfg)

    if mode == "linear":
        new_atoms = atom_updates.update_atoms_linear(g, node.node_features, f"{prefix}.atoms", d_q)
    else:
        new_atoms = atom_updates.update_atoms_aggregate(
            g, graph.atoms, node.attention, neighbor_atoms, prefix, cfg
        )

    peak = float(np.max(np.abs(new_atoms.value)))
    if peak > MAX_ATOM_MAGNITUDE:
        raise NonFiniteError(f"{prefix}: virtual atom coordinate magnitude {peak:.3g} exceeds {MAX_ATOM_MAGNITUDE:g}")
    return replace(graph, edge_features=edges, atoms=new_atoms)
