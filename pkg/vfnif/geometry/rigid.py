"""
Rigid frames. Rotation columns are the frame axes expressed in the parent
frame, so apply(T, x) = R x + t.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from vfnif.errors import DegenerateFrameError, InvalidTransformError

Point3 = np.ndarray

ORTHO_TOL = 1e-9
# Largest drift a stored rotation may carry before it is rejected.
VALID_TOL = 1e-6
DEGENERATE_TOL = 1e-6


@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        rot = np.array(self.rotation, dtype=np.float64)
        trans = np.array(self.translation, dtype=np.float64)
        if rot.shape != (3, 3) or trans.shape != (3,):
            raise InvalidTransformError(
                f"RigidTransform needs a 3x3 rotation and a 3-vector, got {rot.shape} and {trans.shape}"
            )
        if not (np.all(np.isfinite(rot)) and np.all(np.isfinite(trans))):
            raise InvalidTransformError("RigidTransform components must be finite")
        drift = float(np.max(np.abs(rot.T @ rot - np.eye(3))))
        if drift > VALID_TOL:
            raise InvalidTransformError(f"rotation is not orthonormal: |R^T R - I| = {drift:.3g}")
        det = float(np.linalg.det(rot))
        if abs(det - 1.0) > VALID_TOL:
            raise InvalidTransformError(f"rotation has determinant {det:.6g}, expected +1")
        rot.flags.writeable = False
        trans.flags.writeable = False
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)

    def orthonormality_error(self) -> float:
        return float(np.max(np.abs(self.rotation.T @ self.rotation - np.eye(3))))


def as_point(x) -> Point3:
    p = np.asarray(x, dtype=np.float64)
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise ValueError(f"Expected a finite 3-vector, got {x!r}")
    return p


def identity() -> RigidTransform:
    return RigidTransform(np.eye(3), np.zeros(3))


def apply(t: RigidTransform, x: np.ndarray) -> np.ndarray:
    """Maps points (..., 3) from t's local frame into its parent frame."""
    return np.asarray(x, dtype=np.float64) @ t.rotation.T + t.translation


def reorthonormalize(rotation: np.ndarray) -> np.ndarray:
    """Gram–Schmidt on the first two columns; the third is their cross product."""
    e1 = rotation[:, 0] / np.linalg.norm(rotation[:, 0])
    u2 = rotation[:, 1] - np.dot(e1, rotation[:, 1]) * e1
    e2 = u2 / np.linalg.norm(u2)
    return np.stack([e1, e2, np.cross(e1, e2)], axis=1)


def _checked(rotation: np.ndarray, translation: np.ndarray) -> RigidTransform:
    if np.max(np.abs(rotation.T @ rotation - np.eye(3))) > ORTHO_TOL:
        rotation = reorthonormalize(rotation)
    return RigidTransform(rotation, translation)


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """(a ∘ b)(x) = a(b(x))."""
    return _checked(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def invert(t: RigidTransform) -> RigidTransform:
    rt = t.rotation.T
    return RigidTransform(rt, -rt @ t.translation)


def relative_transform(ti: RigidTransform, tj: RigidTransform) -> RigidTransform:
    """T_{i<-j}: maps coordinates in frame j into frame i."""
    return compose(invert(ti), tj)


# ── Gram–Schmidt frames ────────────────────────────────────────────────────

def frames_from_backbone(
    n: np.ndarray,
    ca: np.ndarray,
    c: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorized frame construction over (L, 3) arrays.
    Returns rotations (L, 3, 3), translations (L, 3) and the indices of
    degenerate residues (collinear or coincident atoms).
    """
    n = np.asarray(n, dtype=np.float64)
    ca = np.asarray(ca, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    v1 = c - ca
    v2 = n - ca
    len1 = np.linalg.norm(v1, axis=-1)
    len_nc = np.linalg.norm(n - c, axis=-1)
    safe1 = np.where(len1 > DEGENERATE_TOL, len1, 1.0)
    e1 = v1 / safe1[:, None]
    u2 = v2 - np.sum(e1 * v2, axis=-1, keepdims=True) * e1
    len2 = np.linalg.norm(u2, axis=-1)
    safe2 = np.where(len2 > DEGENERATE_TOL, len2, 1.0)
    e2 = u2 / safe2[:, None]
    e3 = np.cross(e1, e2)

    degenerate = np.nonzero(
        (len1 <= DEGENERATE_TOL) | (len2 <= DEGENERATE_TOL) | (len_nc <= DEGENERATE_TOL)
    )[0]
    rotations = np.stack([e1, e2, e3], axis=-1)
    return rotations, ca.copy(), degenerate


def frame_from_three_points(
    n: Point3,
    ca: Point3,
    c: Point3,
    residue_index: int | None = None,
) -> RigidTransform:
    rotations, translations, degenerate = frames_from_backbone(
        as_point(n)[None], as_point(ca)[None], as_point(c)[None]
    )
    if degenerate.size:
        where = f" at residue {residue_index}" if residue_index is not None else ""
        raise DegenerateFrameError(
            f"N/CA/C are collinear or coincident{where}", residue_index=residue_index
        )
    return RigidTransform(rotations[0], translations[0])


def relative_transforms(
    rotations: np.ndarray,
    translations: np.ndarray,
    neighbors: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Per-edge T_{i<-j} for a (n, k) neighbor table.
    Returns rotations (n, k, 3, 3) and translations (n, k, 3).
    """
    rot_i_t = np.swapaxes(rotations, -1, -2)[:, None]
    rot_j = rotations[neighbors]
    delta = translations[neighbors] - translations[:, None]
    rel_rot = rot_i_t @ rot_j
    rel_trans = np.einsum("nkab,nkb->nka", np.broadcast_to(rot_i_t, rel_rot.shape), delta)
    return rel_rot, rel_trans


def random_rigid(seed: int | np.random.Generator | None = None) -> RigidTransform:
    """Uniform rotation on SO(3), translation uniform in [-100, 100] Å per axis."""
    rng = np.random.default_rng(seed)
    rotation = Rotation.random(None, rng).as_matrix()
    translation = rng.uniform(-100.0, 100.0, size=3)
    return RigidTransform(rotation, translation)
