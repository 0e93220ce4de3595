from vfnif.geometry.rigid import (
    Point3,
    RigidTransform,
    apply,
    as_point,
    compose,
    frame_from_three_points,
    frames_from_backbone,
    identity,
    invert,
    random_rigid,
    relative_transform,
    relative_transforms,
    reorthonormalize,
)

__all__ = [
    "Point3",
    "RigidTransform",
    "apply",
    "as_point",
    "compose",
    "frame_from_three_points",
    "frames_from_backbone",
    "identity",
    "invert",
    "random_rigid",
    "relative_transform",
    "relative_transforms",
    "reorthonormalize",
]
