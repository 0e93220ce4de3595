"""
Vector field operator: move neighbor atoms into the receiving frame, mix
both atom sets with learned weights, and read the resulting vectors out as
unit directions plus Gaussian-expanded lengths.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from vfnif.errors import ShapeError
from vfnif.geometry import RigidTransform, relative_transform
from vfnif.layers.params import VectorFieldWeights
from vfnif.numerics import DiffGraph, Tensor

if TYPE_CHECKING:
    from vfnif.model.config import ModelConfig
    from vfnif.model.graph import ResidueGraph


@dataclass(frozen=True)
class RbfConfig:
    n_rbf: int = 16
    d_max: float = 50.0

    @property
    def centers(self) -> np.ndarray:
        return np.linspace(0.0, self.d_max, self.n_rbf)

    @property
    def sigma(self) -> float:
        return self.d_max / (self.n_rbf - 1) if self.n_rbf > 1 else self.d_max

    @classmethod
    def from_model(cls, cfg: ModelConfig) -> RbfConfig:
        return cls(n_rbf=cfg.n_rbf, d_max=cfg.rbf_max)


def rbf_numpy(distances: np.ndarray, rbf: RbfConfig) -> np.ndarray:
    d = np.asarray(distances, dtype=np.float64)[..., None]
    return np.exp(-((d - rbf.centers) ** 2) / (2.0 * rbf.sigma ** 2))


def rbf_expand(g: DiffGraph, lengths: Tensor, rbf: RbfConfig) -> Tensor:
    """(..., m) lengths -> (..., m, n_rbf) Gaussian bank."""
    diff = g.add(g.reshape(lengths, lengths.shape + (1,)), g.constant(-rbf.centers))
    return g.exp(g.scale(g.multiply(diff, diff), -1.0 / (2.0 * rbf.sigma ** 2)))


# ── Neighbor atoms in the receiving frame ──────────────────────────────────

def transform_atoms(g: DiffGraph, qj: Tensor, ti: RigidTransform, tj: RigidTransform) -> Tensor:
    rel = relative_transform(ti, tj)
    rotated = g.matmul(qj, g.constant(rel.rotation.T))
    return g.add(rotated, g.constant(rel.translation))


def transform_neighbor_atoms(g: DiffGraph, atoms: Tensor, graph: ResidueGraph) -> Tensor:
    """(n, d_q, 3) atoms -> (n, k, d_q, 3), neighbor j expressed in frame i."""
    gathered = g.gather_rows(atoms, graph.neighbors)
    rot_t = np.swapaxes(graph.rel_rotations, -1, -2)
    rotated = g.matmul(gathered, g.constant(rot_t))
    return g.add(rotated, g.constant(graph.rel_translations[:, :, None, :]))


# ── Vector field and its features ──────────────────────────────────────────

def vector_field(g: DiffGraph, qi: Tensor, kj: Tensor, w: VectorFieldWeights) -> Tensor:
    d_q = w.wa.shape[0]
    if w.wa.shape != (d_q, d_q) or w.wb.shape != (d_q, d_q):
        raise ShapeError(f"vector_field: weights must be square, got {w.wa.shape} and {w.wb.shape}")
    for label, atoms in (("qi", qi), ("kj", kj)):
        if atoms.ndim < 2 or atoms.shape[-2:] != (d_q, 3):
            raise ShapeError(f"vector_field: {label} has shape {atoms.shape}, expected (..., {d_q}, 3)")
    return g.add(g.matmul(w.wa, qi), g.matmul(w.wb, kj))


def featurize(g: DiffGraph, h: Tensor, cfg: ModelConfig) -> Tensor:
    """(..., d_q, 3) vectors -> (..., d_q * feature_width) features."""
    lead = h.shape[:-1]
    if not (cfg.use_direction or cfg.use_rbf):
        return g.reshape(h, lead[:-1] + (lead[-1] * 3,))

    blocks = []
    if cfg.use_direction:
        blocks.append(g.normalize(h))
    lengths = g.sqrt(g.sum(g.multiply(h, h), axis=-1))
    if cfg.use_rbf:
        blocks.append(rbf_expand(g, lengths, RbfConfig.from_model(cfg)))
    else:
        blocks.append(g.reshape(lengths, lead + (1,)))
    per_vector = g.concat(blocks, axis=-1)
    return g.reshape(per_vector, lead[:-1] + (lead[-1] * cfg.feature_width,))
