import numpy as np

from vfnif.data.alphabet import NUM_CLASSES
from vfnif.data.structure import BackboneStructure, ideal_oxygen
from vfnif.geometry import random_rigid

CA_STEP = 3.8
# Step lengths are jittered so no residue has two neighbors at the same distance.
STEP_JITTER = 0.05
# Idealized N and C positions in a residue frame (CA at origin, C on +x).
_LOCAL_N = np.array([-0.525, 1.363, 0.0])
_LOCAL_C = np.array([1.526, 0.0, 0.0])


def synthetic_backbone(n_residues: int, seed: int = 0, name: str | None = None) -> BackboneStructure:
    """
    Random but chemically plausible chain: CA trace as a persistent random
    walk with steps of 3.8 ± 0.05 Å, each residue in a random orientation with
    idealized N/C placement and an idealized carbonyl O.
    """
    if n_residues < 1:
        raise ValueError("n_residues must be positive")
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    ca = np.zeros((n_residues, 3))
    for i in range(1, n_residues):
        direction = direction + rng.normal(scale=0.7, size=3)
        direction /= np.linalg.norm(direction)
        step = CA_STEP + rng.uniform(-STEP_JITTER, STEP_JITTER)
        ca[i] = ca[i - 1] + step * direction

    coords = np.empty((n_residues, 4, 3))
    for i in range(n_residues):
        rotation = random_rigid(rng).rotation
        coords[i, 0] = ca[i] + rotation @ _LOCAL_N
        coords[i, 1] = ca[i]
        coords[i, 2] = ca[i] + rotation @ _LOCAL_C
    coords[:, 3] = ideal_oxygen(coords[:, 0], coords[:, 1], coords[:, 2])

    return BackboneStructure(
        name=name or f"synthetic_{n_residues}_{seed}",
        sequence=rng.integers(0, NUM_CLASSES, size=n_residues),
        coords=coords,
    )
