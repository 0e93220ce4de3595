"""
Residue graph construction. build_graph does the geometry once per
structure (frames, k-NN table, per-edge relative transforms, backbone atoms
in local frames); embed_graph attaches the learned starting features on a
fresh tape for every forward pass.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist

from vfnif.data.structure import BackboneStructure, ResidueFlag, ideal_oxygen
from vfnif.errors import DegenerateFrameError, StructureError
from vfnif.geometry import RigidTransform, frames_from_backbone, relative_transforms
from vfnif.layers.operator import RbfConfig, rbf_numpy
from vfnif.model.config import ModelConfig
from vfnif.numerics import DiffGraph, Tensor

logger = logging.getLogger(__name__)

N_BACKBONE_ATOMS = 4
# Distances equal to this many decimals (in Å) count as tied.
KNN_DECIMALS = 6


@dataclass(frozen=True)
class ResidueGraph:
    name: str
    sequence: np.ndarray  # (n,)
    flags: np.ndarray  # (n,)
    rotations: np.ndarray  # (n, 3, 3)
    translations: np.ndarray  # (n, 3)
    neighbors: np.ndarray  # (n, k), self first
    rel_rotations: np.ndarray  # (n, k, 3, 3)
    rel_translations: np.ndarray  # (n, k, 3)
    edge_distances: np.ndarray  # (n, k) CA-CA
    backbone_local: np.ndarray  # (n, 4, 3)
    node_features: Tensor | None = None
    edge_features: Tensor | None = None
    atoms: Tensor | None = None
    attention: Tensor | None = None

    @property
    def n(self) -> int:
        return len(self.sequence)

    @property
    def k(self) -> int:
        return self.neighbors.shape[1]

    @property
    def self_index(self) -> np.ndarray:
        return np.broadcast_to(np.arange(self.n)[:, None], self.neighbors.shape)

    @property
    def frames(self) -> list[RigidTransform]:
        return [RigidTransform(r, t) for r, t in zip(self.rotations, self.translations)]


def knn(ca: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Self plus the k nearest other residues by CA distance, min(k + 1, n)
    entries per row. Distances are ranked after rounding to KNN_DECIMALS,
    so ties go to the lower index whatever the rounding noise of a rigid
    motion.
    """
    dist = cdist(ca, ca)
    ranked = np.round(dist, KNN_DECIMALS)
    np.fill_diagonal(ranked, -1.0)
    width = min(k + 1, len(ca))
    neighbors = np.argsort(ranked, axis=1, kind="stable")[:, :width]
    return neighbors, np.take_along_axis(dist, neighbors, axis=1)


def _complete_backbone(structure: BackboneStructure) -> BackboneStructure:
    complete = np.all(np.isfinite(structure.coords[:, :3]), axis=(1, 2))
    if not complete.all():
        skipped = [rid for rid, ok in zip(structure.residue_ids, complete) if not ok]
        logger.warning("%s: excluding %d residue(s) without N/CA/C: %s", structure.name, len(skipped), ", ".join(skipped))
        structure = structure.subset(complete)
    if len(structure) < 2:
        raise StructureError(f"{structure.name}: need at least 2 residues with complete N/CA/C, got {len(structure)}")
    return structure


def build_graph(structure: BackboneStructure, cfg: ModelConfig) -> ResidueGraph:
    structure = _complete_backbone(structure)
    coords = structure.coords.copy()
    n_atom, ca, c = coords[:, 0], coords[:, 1], coords[:, 2]

    rotations, translations, degenerate = frames_from_backbone(n_atom, ca, c)
    if degenerate.size:
        index = int(degenerate[0])
        raise DegenerateFrameError(
            f"{structure.name}: N/CA/C collinear or coincident at residue {structure.residue_ids[index]}",
            residue_index=index,
        )

    missing_o = (structure.flags & ResidueFlag.MISSING_O).astype(bool)
    if missing_o.any():
        coords[missing_o, 3] = ideal_oxygen(n_atom[missing_o], ca[missing_o], c[missing_o])
        ids = [rid for rid, m in zip(structure.residue_ids, missing_o) if m]
        logger.warning("%s: imputed carbonyl O for residue(s) %s", structure.name, ", ".join(ids))

    neighbors, distances = knn(ca, cfg.knn_k)
    rel_rot, rel_trans = relative_transforms(rotations, translations, neighbors)
    # x_local = R^T (x - t), row-vector form
    local = np.einsum("nab,nka->nkb", rotations, coords - translations[:, None, :])

    return ResidueGraph(
        name=structure.name,
        sequence=structure.sequence.copy(),
        flags=structure.flags.copy(),
        rotations=rotations,
        translations=translations,
        neighbors=neighbors,
        rel_rotations=rel_rot,
        rel_translations=rel_trans,
        edge_distances=distances,
        backbone_local=local,
    )


# ── Learned starting features ──────────────────────────────────────────────

def init_virtual_atoms(g: DiffGraph, graph: ResidueGraph, cfg: ModelConfig) -> Tensor:
    """
    Atoms 0-3 are the backbone N, CA, C, O in each residue's own frame;
    the remaining d_q - 4 are free parameters shared by every residue.
    """
    backbone = g.constant(graph.backbone_local)
    free = g.param("embed.free_atoms")
    free = g.gather_rows(
        g.reshape(free, (1, cfg.d_q - N_BACKBONE_ATOMS, 3)), np.zeros(graph.n, dtype=np.int64)
    )
    return g.concat([backbone, free], axis=1)


def embed_graph(g: DiffGraph, graph: ResidueGraph, cfg: ModelConfig) -> ResidueGraph:
    n, k = graph.neighbors.shape
    nodes = g.gather_rows(g.param("embed.node"), np.zeros(n, dtype=np.int64))
    if cfg.use_edge_featurizer:
        edges = g.linear(g.constant(rbf_numpy(graph.edge_distances, RbfConfig.from_model(cfg))), "embed.edge")
    else:
        edges = g.constant(np.zeros((n, k, cfg.d_e)))
    return replace(
        graph,
        node_features=nodes,
        edge_features=edges,
        atoms=init_virtual_atoms(g, graph, cfg),
        attention=None,
    )
