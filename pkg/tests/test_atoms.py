from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vfnif.layers import (
    VMlpWeights,
    aggregate_atoms,
    count_vmlp_parameters,
    update_atoms_aggregate,
    update_atoms_linear,
    v_mlp,
)
from vfnif.layers.layer import init_layer
from vfnif.layers.params import init_vmlp
from vfnif.model.config import ModelConfig
from vfnif.numerics import DiffGraph, ParameterStore
from vfnif.verify import oracles


def _weights(g, wc, wd, we, dirs):
    return VMlpWeights(g.constant(wc), g.constant(wd), g.constant(we), g.constant(dirs))


# ── Linear update ──────────────────────────────────────────────────────────

def test_zero_weights_give_zero_atoms():
    d_q, d_v = 5, 8
    g = DiffGraph(ParameterStore({"atoms.w": np.zeros((d_v, 3 * d_q)), "atoms.b": np.zeros(3 * d_q)}))
    s = g.constant(np.random.default_rng(0).normal(size=(4, d_v)))
    out = update_atoms_linear(g, s, "atoms", d_q).value
    assert out.shape == (4, d_q, 3)
    assert not np.any(out)


def test_identity_readout_reshapes_node_features():
    d_q = 5
    g = DiffGraph(ParameterStore({"atoms.w": np.eye(3 * d_q), "atoms.b": np.zeros(3 * d_q)}))
    s = np.arange(2 * 3 * d_q, dtype=float).reshape(2, 3 * d_q)
    out = update_atoms_linear(g, g.constant(s), "atoms", d_q).value
    np.testing.assert_array_equal(out, s.reshape(2, d_q, 3))


# ── Aggregation ────────────────────────────────────────────────────────────

def test_single_neighbor_aggregation_returns_that_neighbor():
    rng = np.random.default_rng(1)
    atoms = rng.normal(size=(3, 1, 5, 3))
    g = DiffGraph()
    out = aggregate_atoms(g, g.constant(np.ones((3, 1, 4))), g.constant(atoms)).value
    np.testing.assert_allclose(out, atoms[:, 0], atol=1e-15)


def test_concentrated_attention_selects_one_neighbor():
    rng = np.random.default_rng(2)
    atoms = rng.normal(size=(2, 3, 5, 3))
    attention = np.zeros((2, 3, 4))
    attention[0, 2] = 1.0
    attention[1, 0] = 1.0
    g = DiffGraph()
    out = aggregate_atoms(g, g.constant(attention), g.constant(atoms)).value
    np.testing.assert_allclose(out[0], atoms[0, 2], atol=1e-15)
    np.testing.assert_allclose(out[1], atoms[1, 0], atol=1e-15)


def test_heads_are_averaged():
    atoms = np.zeros((1, 2, 5, 3))
    atoms[0, 0, :, 0] = 1.0
    atoms[0, 1, :, 0] = 3.0
    attention = np.zeros((1, 2, 2))
    attention[0, 0, 0] = 1.0
    attention[0, 1, 1] = 1.0
    g = DiffGraph()
    out = aggregate_atoms(g, g.constant(attention), g.constant(atoms)).value
    np.testing.assert_allclose(out[0, :, 0], 2.0)


def test_aggregation_matches_loop():
    rng = np.random.default_rng(3)
    attention = rng.random(size=(4, 3, 4))
    attention /= attention.sum(axis=1, keepdims=True)
    atoms = rng.normal(size=(4, 3, 6, 3)) * 4.0
    g = DiffGraph()
    out = aggregate_atoms(g, g.constant(attention), g.constant(atoms)).value
    np.testing.assert_allclose(out, oracles.aggregate_loop(attention, atoms), atol=1e-12)


# ── Vector perceptron ──────────────────────────────────────────────────────

def test_zero_mixing_weights_give_zero_output():
    rng = np.random.default_rng(4)
    d_q = 5
    g = DiffGraph()
    out = v_mlp(
        g, g.constant(rng.normal(size=(d_q, 3))), g.constant(rng.normal(size=(d_q, 3))),
        _weights(g, np.zeros((d_q, d_q)), np.zeros((d_q, d_q)), rng.normal(size=(d_q, d_q)), rng.normal(size=(d_q, 3))),
    ).value
    assert not np.any(out)


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_gate_aligned_with_vectors_passes_them_signed(sign):
    rng = np.random.default_rng(5)
    d_q = 5
    qi = rng.normal(size=(d_q, 3))
    eye, zero = np.eye(d_q), np.zeros((d_q, d_q))
    g = DiffGraph()
    out = v_mlp(g, g.constant(qi), g.constant(qi), _weights(g, eye, zero, eye, sign * qi)).value
    np.testing.assert_allclose(out, sign * qi, atol=1e-12)


def test_orthogonal_gate_blocks_vector():
    qi = np.zeros((5, 3))
    qi[:, 0] = 1.0
    dirs = np.zeros((5, 3))
    dirs[:, 1] = 1.0
    eye, zero = np.eye(5), np.zeros((5, 5))
    g = DiffGraph()
    out = v_mlp(g, g.constant(qi), g.constant(qi), _weights(g, eye, zero, eye, dirs)).value
    np.testing.assert_allclose(out, 0.0, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d_q=st.sampled_from([3, 5, 8]))
def test_v_mlp_matches_loop_reference(seed, d_q):
    rng = np.random.default_rng(seed)
    qi, qo = rng.normal(size=(2, d_q, 3)) * 5.0
    wc, wd, we = rng.normal(size=(3, d_q, d_q))
    dirs = rng.normal(size=(d_q, 3))
    g = DiffGraph()
    got = v_mlp(g, g.constant(qi), g.constant(qo), _weights(g, wc, wd, we, dirs)).value
    ref = oracles.v_mlp_loop(qi, qo, wc, wd, we, dirs)
    assert np.max(np.abs(got - ref)) / (1.0 + np.max(np.abs(ref))) < 1e-12


def test_v_mlp_is_rotation_equivariant():
    rng = np.random.default_rng(6)
    d_q = 5
    qi, qo = rng.normal(size=(2, d_q, 3))
    params = ParameterStore()
    init_vmlp(params, rng, "vmlp", d_q)
    rotation = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    g = DiffGraph(params)
    w = VMlpWeights.bind(g, "vmlp")
    base = v_mlp(g, g.constant(qi), g.constant(qo), w).value
    turned_dirs = VMlpWeights(w.wc, w.wd, w.we, g.constant(params["vmlp.gate_dirs"] @ rotation.T))
    turned = v_mlp(g, g.constant(qi @ rotation.T), g.constant(qo @ rotation.T), turned_dirs).value
    np.testing.assert_allclose(turned, base @ rotation.T, atol=1e-10)


def test_parameter_count_at_default_width():
    params = ParameterStore()
    init_vmlp(params, np.random.default_rng(0), "vmlp", 32)
    assert params.size() == count_vmlp_parameters(32) == 3168
    np.testing.assert_allclose(np.linalg.norm(params["vmlp.gate_dirs"], axis=-1), 1.0)


# ── Aggregate update variants ──────────────────────────────────────────────

@pytest.mark.parametrize("variant", ["vmlp", "mlp", "none"])
def test_aggregate_update_variants_keep_atom_shape(variant):
    cfg = ModelConfig(n_layers=1, d_q=5, d_v=8, d_e=4, heads=2, atom_update_mode="aggregate", vmlp_variant=variant)
    rng = np.random.default_rng(7)
    params = ParameterStore()
    init_layer(params, rng, "layer", cfg)
    atoms = rng.normal(size=(3, 5, 3))
    neighbor_atoms = rng.normal(size=(3, 2, 5, 3))
    attention = np.full((3, 2, 2), 0.5)
    g = DiffGraph(params)
    out = update_atoms_aggregate(
        g, g.constant(atoms), g.constant(attention), g.constant(neighbor_atoms), "layer", cfg
    ).value
    assert out.shape == (3, 5, 3)
    if variant == "none":
        np.testing.assert_allclose(out, neighbor_atoms.mean(axis=1), atol=1e-14)


def test_aggregate_variants_change_the_layer_parameter_set():
    names = {}
    for variant in ("vmlp", "mlp", "none"):
        cfg = replace(ModelConfig(d_q=5, d_v=8, d_e=4), atom_update_mode="aggregate", vmlp_variant=variant)
        params = ParameterStore()
        init_layer(params, np.random.default_rng(0), "layer", cfg)
        names[variant] = {name.split(".")[1] for name in params}
    assert "vmlp" in names["vmlp"] and "atom_mlp" not in names["vmlp"]
    assert "atom_mlp" in names["mlp"]
    assert not {"vmlp", "atom_mlp", "atoms"} & names["none"]
