import numpy as np
import pytest
from hypothesis import given, settings

from tests.conftest import seeds
from vfnif.errors import ShapeError
from vfnif.geometry import RigidTransform, compose, identity, random_rigid
from vfnif.layers import RbfConfig, VectorFieldWeights, featurize, rbf_numpy, transform_atoms, vector_field
from vfnif.model.config import ModelConfig
from vfnif.numerics import DiffGraph
from vfnif.verify import oracles


def _vf(qi, kj, wa, wb):
    g = DiffGraph()
    return vector_field(
        g, g.constant(qi), g.constant(kj), VectorFieldWeights(g.constant(wa), g.constant(wb))
    ).value


# ── transform_atoms ────────────────────────────────────────────────────────

def test_same_frame_leaves_atoms_unchanged():
    qj = np.random.default_rng(0).normal(size=(5, 3))
    t = random_rigid(1)
    g = DiffGraph()
    np.testing.assert_allclose(transform_atoms(g, g.constant(qj), t, t).value, qj, atol=1e-12)


def test_shifted_frame_shifts_every_atom():
    qj = np.random.default_rng(0).normal(size=(5, 3))
    ti = random_rigid(2)
    d = np.array([1.0, -2.0, 0.5])
    tj = compose(ti, RigidTransform(np.eye(3), d))
    g = DiffGraph()
    np.testing.assert_allclose(transform_atoms(g, g.constant(qj), ti, tj).value, qj + d, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seeds())
def test_transform_atoms_ignores_global_motion(seed):
    rng = np.random.default_rng(seed)
    qj = rng.normal(size=(6, 3)) * 5
    ti, tj, motion = random_rigid(rng), random_rigid(rng), random_rigid(rng)
    g = DiffGraph()
    base = transform_atoms(g, g.constant(qj), ti, tj).value
    moved = transform_atoms(g, g.constant(qj), compose(motion, ti), compose(motion, tj)).value
    np.testing.assert_allclose(moved, base, atol=1e-8)


# ── vector_field ───────────────────────────────────────────────────────────

def test_zero_weights_give_zero_field():
    qi, kj = np.random.default_rng(0).normal(size=(2, 4, 3))
    assert not np.any(_vf(qi, kj, np.zeros((4, 4)), np.zeros((4, 4))))


def test_selector_weights_give_displacement_between_two_atoms():
    qi, kj = np.random.default_rng(1).normal(size=(2, 6, 3)) * 10
    wa, wb = oracles.selector_weights(6, k=2, l=4, m=1)
    h = _vf(qi, kj, wa, wb)
    np.testing.assert_array_equal(h[2], qi[4] - kj[1])
    assert not np.any(np.delete(h, 2, axis=0))


@settings(max_examples=100, deadline=None)
@given(seeds())
def test_vector_field_matches_double_loop(seed):
    rng = np.random.default_rng(seed)
    qi, kj = rng.normal(size=(2, 4, 3))
    wa, wb = rng.normal(size=(2, 4, 4))
    np.testing.assert_allclose(_vf(qi, kj, wa, wb), oracles.vector_field_loop(qi, kj, wa, wb), atol=1e-12)


def test_vector_field_batches_over_edges():
    rng = np.random.default_rng(3)
    qi = rng.normal(size=(3, 1, 4, 3))
    kj = rng.normal(size=(3, 2, 4, 3))
    wa, wb = rng.normal(size=(2, 4, 4))
    h = _vf(qi, kj, wa, wb)
    assert h.shape == (3, 2, 4, 3)
    np.testing.assert_allclose(h[1, 1], oracles.vector_field_loop(qi[1, 0], kj[1, 1], wa, wb), atol=1e-12)


def test_vector_field_dimension_mismatch():
    with pytest.raises(ShapeError, match="vector_field"):
        _vf(np.zeros((4, 3)), np.zeros((5, 3)), np.eye(4), np.eye(4))


# ── featurize ──────────────────────────────────────────────────────────────

CFG = ModelConfig(d_q=5, n_rbf=16)


def _features(h, cfg=CFG):
    g = DiffGraph()
    return featurize(g, g.constant(h), cfg).value


def test_rbf_bank_defaults():
    rbf = RbfConfig()
    assert rbf.centers[0] == 0.0
    assert rbf.centers[-1] == 50.0
    assert rbf.sigma == pytest.approx(50.0 / 15)


def test_direction_and_rbf_blocks():
    h = np.zeros((5, 3))
    h[0] = [3.0, 0.0, 0.0]
    feats = _features(h).reshape(5, 19)
    np.testing.assert_allclose(feats[0, :3], [1.0, 0.0, 0.0])
    assert np.all(feats[0, 3:] > 0)
    nearest = int(np.argmin(np.abs(RbfConfig().centers - 3.0)))
    assert int(np.argmax(feats[0, 3:])) == nearest
    # zero-vector sentinel, RBF at distance zero
    assert not np.any(feats[1, :3])
    np.testing.assert_allclose(feats[1, 3:], rbf_numpy(0.0, RbfConfig()))
    assert feats.shape == (5, 3 + 16)


@settings(max_examples=100, deadline=None)
@given(seeds())
def test_rotation_turns_directions_and_keeps_rbf(seed):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(5, 3)) * 10
    rotation = random_rigid(rng).rotation
    a = _features(h).reshape(5, 19)
    b = _features(h @ rotation.T).reshape(5, 19)
    np.testing.assert_allclose(b[:, :3], a[:, :3] @ rotation.T, atol=1e-12)
    np.testing.assert_allclose(b[:, 3:], a[:, 3:], atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(a[:, :3], axis=-1), 1.0, atol=1e-6)
    assert np.all((a[:, 3:] >= 0) & (a[:, 3:] <= 1))


@pytest.mark.parametrize("use_direction, use_rbf, width", [
    (True, True, 19),
    (True, False, 4),
    (False, True, 16),
    (False, False, 3),
])
def test_feature_ablation_widths(use_direction, use_rbf, width):
    cfg = ModelConfig(d_q=5, n_rbf=16, use_direction=use_direction, use_rbf=use_rbf)
    assert cfg.feature_width == width
    h = np.random.default_rng(0).normal(size=(2, 5, 3))
    assert _features(h, cfg).shape == (2, 5 * width)


def test_identity_frame_helper_is_identity():
    qj = np.ones((5, 3))
    g = DiffGraph()
    np.testing.assert_array_equal(transform_atoms(g, g.constant(qj), identity(), identity()).value, qj)
