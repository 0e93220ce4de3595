"""Virtual-atom updates: linear readout from node features, or attention
aggregation of neighbor atoms followed by a vector perceptron."""
from __future__ import annotations

from typing import TYPE_CHECKING

from vfnif.layers.interactions import mlp
from vfnif.layers.params import VMlpWeights
from vfnif.numerics import DiffGraph, Tensor

if TYPE_CHECKING:
    from vfnif.model.config import ModelConfig


def update_atoms_linear(g: DiffGraph, s: Tensor, prefix: str, d_q: int) -> Tensor:
    n = s.shape[0]
    return g.reshape(g.linear(s, prefix), (n, d_q, 3))


def aggregate_atoms(g: DiffGraph, attention: Tensor, neighbor_atoms: Tensor) -> Tensor:
    """Attention-weighted sum of neighbor atoms; attention (n, k, heads) is averaged over heads."""
    n, k, heads = attention.shape
    weights = g.scale(g.sum(attention, axis=-1), 1.0 / heads)
    weighted = g.multiply(neighbor_atoms, g.reshape(weights, (n, k, 1, 1)))
    return g.sum(weighted, axis=1)


def v_mlp(g: DiffGraph, qi: Tensor, qo: Tensor, w: VMlpWeights) -> Tensor:
    v = g.add(g.matmul(w.wc, qi), g.matmul(w.wd, qo))
    # cosine is zero when either side is below the normalize threshold
    cos = g.sum(g.multiply(g.normalize(v), g.normalize(w.gate_dirs)), axis=-1)
    gated = g.multiply(v, g.reshape(cos, cos.shape + (1,)))
    return g.matmul(w.we, gated)


def update_atoms_aggregate(
    g: DiffGraph,
    atoms: Tensor,
    attention: Tensor,
    neighbor_atoms: Tensor,
    prefix: str,
    cfg: ModelConfig,
) -> Tensor:
    qo = aggregate_atoms(g, attention, neighbor_atoms)
    variant = cfg.vmlp_variant.value
    if variant == "none":
        return qo
    if variant == "mlp":
        n = atoms.shape[0]
        flat = g.concat([g.reshape(atoms, (n, 3 * cfg.d_q)), g.reshape(qo, (n, 3 * cfg.d_q))])
        return g.reshape(mlp(g, flat, f"{prefix}.atom_mlp", cfg), (n, cfg.d_q, 3))
    return v_mlp(g, atoms, qo, VMlpWeights.bind(g, f"{prefix}.vmlp"))
