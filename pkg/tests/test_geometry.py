import numpy as np
import pytest
from hypothesis import given, settings

from tests.conftest import seeds
from vfnif.errors import DegenerateFrameError, InvalidTransformError
from vfnif.geometry import (
    RigidTransform,
    apply,
    compose,
    frame_from_three_points,
    frames_from_backbone,
    identity,
    invert,
    random_rigid,
    relative_transform,
    relative_transforms,
)


def _assert_same(a: RigidTransform, b: RigidTransform, tol: float = 1e-9) -> None:
    np.testing.assert_allclose(a.rotation, b.rotation, atol=tol)
    np.testing.assert_allclose(a.translation, b.translation, atol=tol)


def test_axis_aligned_frame_is_identity():
    t = frame_from_three_points([0, 1, 0], [0, 0, 0], [1, 0, 0])
    _assert_same(t, identity(), tol=0)


def test_frame_is_translation_equivariant():
    rng = np.random.default_rng(0)
    n, ca, c = rng.normal(size=(3, 3))
    d = np.array([5.0, -3.0, 12.0])
    a = frame_from_three_points(n, ca, c)
    b = frame_from_three_points(n + d, ca + d, c + d)
    np.testing.assert_allclose(b.rotation, a.rotation, atol=1e-12)
    np.testing.assert_allclose(b.translation, a.translation + d, atol=1e-12)


@pytest.mark.parametrize("points", [
    ([0, 0, 0], [1, 0, 0], [2, 0, 0]),
    ([1, 1, 1], [1, 1, 1], [3, 0, 0]),
    ([0, 1, 0], [0, 0, 0], [0, 0, 0]),
])
def test_degenerate_triples_raise(points):
    with pytest.raises(DegenerateFrameError):
        frame_from_three_points(*points, residue_index=7)


def test_degenerate_error_carries_residue_index():
    with pytest.raises(DegenerateFrameError) as info:
        frame_from_three_points([0, 0, 0], [1, 0, 0], [2, 0, 0], residue_index=7)
    assert info.value.residue_index == 7


def test_vectorized_frames_report_degenerate_rows():
    n = np.array([[0.0, 1, 0], [0, 0, 0]])
    ca = np.zeros((2, 3))
    c = np.array([[1.0, 0, 0], [1, 0, 0]])
    rotations, translations, degenerate = frames_from_backbone(n, ca, c)
    assert rotations.shape == (2, 3, 3)
    assert translations.shape == (2, 3)
    assert list(degenerate) == [1]


@settings(max_examples=200, deadline=None)
@given(seeds())
def test_random_frame_invariants(seed):
    rng = np.random.default_rng(seed)
    n, ca, c = rng.normal(size=(3, 3)) * 10.0
    t = frame_from_three_points(n, ca, c)
    assert t.orthonormality_error() < 1e-9
    assert np.linalg.det(t.rotation) == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(apply(invert(t), ca), 0.0, atol=1e-9)
    # C lies on the local +x axis
    local_c = apply(invert(t), c)
    assert local_c[0] > 0
    np.testing.assert_allclose(local_c[1:], 0.0, atol=1e-9)


def test_compose_with_identity_and_inverse():
    t = random_rigid(3)
    _assert_same(compose(identity(), t), t)
    _assert_same(compose(t, invert(t)), identity())


def test_compose_matches_sequential_application():
    a, b = random_rigid(1), random_rigid(2)
    x = np.random.default_rng(0).uniform(-50, 50, size=(100, 3))
    np.testing.assert_allclose(apply(compose(a, b), x), apply(a, apply(b, x)), atol=1e-9)


def test_invert_examples():
    _assert_same(invert(identity()), identity(), tol=0)
    d = np.array([1.0, -2.0, 3.0])
    shifted = invert(RigidTransform(np.eye(3), d))
    np.testing.assert_array_equal(shifted.translation, -d)
    t = random_rigid(9)
    x = np.random.default_rng(1).normal(size=(10, 3)) * 30
    np.testing.assert_allclose(apply(invert(t), apply(t, x)), x, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(seeds())
def test_relative_transform_cancels_global_frame(seed):
    rng = np.random.default_rng(seed)
    ti, tj, g = random_rigid(rng), random_rigid(rng), random_rigid(rng)
    _assert_same(relative_transform(compose(g, ti), compose(g, tj)), relative_transform(ti, tj))


def test_relative_transform_maps_frame_j_into_frame_i():
    ti, tj = random_rigid(4), random_rigid(5)
    rel = relative_transform(ti, tj)
    x = np.random.default_rng(2).normal(size=(5, 3))
    np.testing.assert_allclose(apply(ti, apply(rel, x)), apply(tj, x), atol=1e-9)
    _assert_same(relative_transform(ti, ti), identity())


def test_batched_relative_transforms_match_scalar():
    rng = np.random.default_rng(6)
    frames = [random_rigid(rng) for _ in range(4)]
    rotations = np.stack([f.rotation for f in frames])
    translations = np.stack([f.translation for f in frames])
    neighbors = np.array([[0, 2], [1, 3], [2, 0], [3, 1]])
    rel_rot, rel_trans = relative_transforms(rotations, translations, neighbors)
    for i in range(4):
        for slot, j in enumerate(neighbors[i]):
            rel = relative_transform(frames[i], frames[j])
            np.testing.assert_allclose(rel_rot[i, slot], rel.rotation, atol=1e-12)
            np.testing.assert_allclose(rel_trans[i, slot], rel.translation, atol=1e-12)


@settings(max_examples=1000, deadline=None)
@given(seeds())
def test_random_rigid_is_a_proper_rotation(seed):
    t = random_rigid(seed)
    assert t.orthonormality_error() < 1e-9
    np.testing.assert_allclose(np.linalg.norm(t.rotation, axis=0), 1.0, atol=1e-9)
    assert np.linalg.det(t.rotation) == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.abs(t.translation) <= 100.0)


def test_random_rigid_is_deterministic_per_seed():
    _assert_same(random_rigid(42), random_rigid(42), tol=0)


def test_rigid_transform_rejects_bad_shapes():
    with pytest.raises(InvalidTransformError):
        RigidTransform(np.eye(2), np.zeros(3))
    with pytest.raises(InvalidTransformError):
        RigidTransform(np.eye(3), np.array([np.nan, 0, 0]))


@pytest.mark.parametrize("rotation, match", [
    (np.diag([1.0, 1.0, 1.01]), "orthonormal"),
    (np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]), "determinant"),
    (-np.eye(3), "determinant"),
])
def test_rigid_transform_rejects_non_rotations(rotation, match):
    with pytest.raises(InvalidTransformError, match=match):
        RigidTransform(rotation, np.zeros(3))


def test_long_compose_invert_chains_stay_orthonormal():
    rng = np.random.default_rng(11)
    t = identity()
    for step in range(10_000):
        t = compose(t, random_rigid(rng))
        if step % 3 == 0:
            t = invert(t)
    assert t.orthonormality_error() < 1e-8
    assert np.linalg.det(t.rotation) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(seeds(), seeds())
def test_frame_is_equivariant_under_rigid_motion(point_seed, motion_seed):
    n, ca, c = np.random.default_rng(point_seed).normal(size=(3, 3)) * 10.0
    g = random_rigid(motion_seed)
    moved = frame_from_three_points(apply(g, n), apply(g, ca), apply(g, c))
    _assert_same(moved, compose(g, frame_from_three_points(n, ca, c)), tol=1e-8)
