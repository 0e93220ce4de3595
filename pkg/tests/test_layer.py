from dataclasses import replace

import numpy as np
import pytest

from vfnif.data.synthetic import synthetic_backbone
from vfnif.errors import ConfigError, NonFiniteError, VfnError
from vfnif.geometry import random_rigid
from vfnif.layers import vfn_layer
from vfnif.model.config import ModelConfig
from vfnif.model.graph import build_graph, embed_graph
from vfnif.model.network import init_params
from vfnif.numerics import DiffGraph, finite_difference_check

PREFIX = "layers.0"
MODES = ["linear", "aggregate"]


def _run(cfg, params, structure):
    g = DiffGraph(params)
    graph = embed_graph(g, build_graph(structure, cfg), cfg)
    return graph, vfn_layer(g, graph, PREFIX, cfg)


@pytest.mark.parametrize("mode", MODES)
def test_layer_preserves_shapes(tiny_cfg, structure, mode):
    cfg = replace(tiny_cfg, atom_update_mode=mode)
    graph, out = _run(cfg, init_params(cfg), structure)
    assert out.node_features.shape == (8, cfg.d_v)
    assert out.edge_features.shape == (8, cfg.knn_k + 1, cfg.d_e)
    assert out.atoms.shape == (8, cfg.d_q, 3)
    assert out.attention.shape == (8, cfg.knn_k + 1, cfg.heads)
    assert graph.attention is None
    np.testing.assert_array_equal(out.neighbors, graph.neighbors)


@pytest.mark.parametrize("mode", MODES)
def test_layer_outputs_are_invariant_under_rigid_motion(tiny_cfg, mode):
    cfg = replace(tiny_cfg, atom_update_mode=mode)
    params = init_params(cfg, seed=2)
    structure = synthetic_backbone(12, seed=5)
    _, base = _run(cfg, params, structure)
    for seed in range(3):
        _, moved = _run(cfg, params, structure.moved(random_rigid(seed)))
        for a, b in [
            (base.node_features, moved.node_features),
            (base.edge_features, moved.edge_features),
            (base.atoms, moved.atoms),
        ]:
            scale = max(np.max(np.abs(a.value)), 1e-12)
            assert np.max(np.abs(a.value - b.value)) / scale < 1e-6


def test_zeroed_output_mlps_leave_features_unchanged(tiny_cfg, structure):
    params = init_params(tiny_cfg, seed=1)
    for name in ("node_out.1", "edge.1"):
        for part in ("w", "b"):
            key = f"{PREFIX}.{name}.{part}"
            params[key] = np.zeros_like(params[key])
    graph, out = _run(tiny_cfg, params, structure)
    np.testing.assert_array_equal(out.node_features.value, graph.node_features.value)
    np.testing.assert_array_equal(out.edge_features.value, graph.edge_features.value)


def test_layer_without_vector_field_has_no_vf_weights(tiny_cfg, structure):
    cfg = replace(tiny_cfg, use_vector_field=False)
    params = init_params(cfg)
    assert not any(".vf." in name for name in params)
    _, out = _run(cfg, params, structure)
    assert np.all(np.isfinite(out.node_features.value))


def test_unknown_mode_is_rejected(tiny_cfg, structure):
    params = init_params(tiny_cfg)
    g = DiffGraph(params)
    graph = embed_graph(g, build_graph(structure, tiny_cfg), tiny_cfg)
    with pytest.raises(ConfigError, match="unknown atom update mode"):
        vfn_layer(g, graph, PREFIX, tiny_cfg, atom_update_mode="spline")


def test_mode_override_without_matching_parameters_is_a_config_error(tiny_cfg, structure):
    params = init_params(tiny_cfg)
    g = DiffGraph(params)
    graph = embed_graph(g, build_graph(structure, tiny_cfg), tiny_cfg)
    with pytest.raises(ConfigError, match="layers.0.vmlp.wc") as info:
        vfn_layer(g, graph, PREFIX, tiny_cfg, atom_update_mode="aggregate")
    assert isinstance(info.value, VfnError)
    assert not isinstance(info.value, KeyError)


def test_runaway_atoms_raise_non_finite_error(tiny_cfg, structure):
    params = init_params(tiny_cfg)
    params[f"{PREFIX}.atoms.w"] = np.full_like(params[f"{PREFIX}.atoms.w"], 1e6)
    with pytest.raises(NonFiniteError, match="magnitude"):
        _run(tiny_cfg, params, structure)


@pytest.mark.parametrize("normalize", [False, True])
@pytest.mark.parametrize("mode", MODES)
def test_layer_gradients_match_finite_differences(mode, normalize):
    cfg = ModelConfig(
        n_layers=1, d_q=5, d_v=8, d_e=4, knn_k=3, n_rbf=3, heads=2,
        atom_update_mode=mode, normalize_features=normalize,
    )
    params = init_params(cfg, seed=3)
    graph = build_graph(synthetic_backbone(4, seed=8), cfg)
    rng = np.random.default_rng(0)
    directions = [rng.normal(size=shape) for shape in ((4, cfg.d_v), (4, 4, cfg.d_e), (4, cfg.d_q, 3))]

    def objective(g, _):
        out = vfn_layer(g, embed_graph(g, graph, cfg), PREFIX, cfg)
        terms = [
            g.sum(g.multiply(t, g.constant(p)))
            for t, p in zip((out.node_features, out.edge_features, out.atoms), directions)
        ]
        return g.add(g.add(terms[0], terms[1]), terms[2])

    assert finite_difference_check(objective, params, eps=1e-5) < 1e-4
